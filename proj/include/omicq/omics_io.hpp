#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omicq/matrix.hpp"

namespace omicq {

enum class OmicKind { DNAme, RNAseq, miRNAseq };

std::string_view to_string(OmicKind kind);
OmicKind omic_kind_from_string(std::string_view name);
// Namespace prefix applied to feature ids on multi-omic integration.
std::string_view feature_prefix(OmicKind kind);

enum class Subtype { LUSC_I, LUAD_II };
enum class SampleType { PrimaryTumor, SolidTissueNormal };

// 0 = LUSC (subtype I), 1 = LUAD (subtype II).
inline int label_of(Subtype s) { return s == Subtype::LUAD_II ? 1 : 0; }

struct OmicsMatrix {
  OmicKind omic_kind = OmicKind::RNAseq;
  std::vector<std::string> feature_ids;
  std::vector<std::string> sample_ids;
  Matrix values;  // samples x features
  std::string unit;

  // Throws ValidationError when a structural invariant is broken.
  void validate() const;
};

struct ClinicalRecord {
  std::string sample_id;
  Subtype subtype = Subtype::LUSC_I;
  SampleType sample_type = SampleType::PrimaryTumor;
  std::map<std::string, std::string> attributes;
};

struct ClinicalTable {
  std::vector<ClinicalRecord> records;
  void validate() const;
};

struct LabeledDataset {
  std::vector<std::string> feature_ids;
  std::vector<std::string> sample_ids;
  Matrix values;            // samples x features
  std::vector<int> labels;  // 0 = LUSC, 1 = LUAD
  std::optional<OmicKind> omic_kind;

  std::size_t n_samples() const { return sample_ids.size(); }
  std::size_t n_features() const { return feature_ids.size(); }
  void validate() const;

  std::size_t feature_index(std::string_view id) const;
  LabeledDataset select_features(const std::vector<std::string>& ids) const;
  LabeledDataset select_features(const std::vector<std::size_t>& cols) const;
  LabeledDataset select_samples(const std::vector<std::size_t>& rows) const;
};

struct ParseOptions {
  bool impute_mean = false;
  std::string unit;
};

// On-disk layout is feature-by-sample: first column holds feature ids, header
// row holds sample ids. The loaded matrix is transposed to samples x features.
OmicsMatrix parse_omic_matrix_text(std::string_view text, OmicKind kind, const ParseOptions& opts = {});
OmicsMatrix parse_omic_matrix(const std::filesystem::path& path, OmicKind kind, const ParseOptions& opts = {});
std::string format_omic_matrix(const OmicsMatrix& m);
void write_omic_matrix(const std::filesystem::path& path, const OmicsMatrix& m);

ClinicalTable parse_clinical_text(std::string_view text);
ClinicalTable parse_clinical(const std::filesystem::path& path);
std::string format_clinical(const ClinicalTable& c);
void write_clinical(const std::filesystem::path& path, const ClinicalTable& c);

// Labeled datasets are stored as a matrix file plus a two-column label file.
std::string format_dataset_matrix(const LabeledDataset& d);
std::string format_labels(const LabeledDataset& d);
LabeledDataset parse_labeled_dataset_text(std::string_view matrix_text, std::string_view labels_text,
                                          std::optional<OmicKind> kind, const std::string& source);
void write_labeled_dataset(const std::filesystem::path& matrix_path, const std::filesystem::path& labels_path,
                           const LabeledDataset& d);
LabeledDataset read_labeled_dataset(const std::filesystem::path& matrix_path, const std::filesystem::path& labels_path,
                                    std::optional<OmicKind> kind = std::nullopt);

OmicsMatrix drop_nonpositive_features(const OmicsMatrix& m);
OmicsMatrix concat_cohorts(const OmicsMatrix& a, const OmicsMatrix& b);
LabeledDataset join_clinical(const OmicsMatrix& m, const ClinicalTable& c);
LabeledDataset intersect_and_join(const std::vector<LabeledDataset>& omics);
LabeledDataset subsample_features(const LabeledDataset& d, std::size_t n, std::uint64_t seed);

struct EffectGroup {
  std::size_t count = 0;
  double effect = 0.0;  // mean shift of the LUAD class, in noise-sd units
};

struct SyntheticOmicSpec {
  OmicKind kind = OmicKind::RNAseq;
  std::size_t n_features = 0;
  std::vector<EffectGroup> effects;
  double base_mean = 5.0;
  double noise_sd = 1.0;
  double missing_fraction = 0.0;  // share of samples absent from this omic
  std::string unit = "log2(count+1)";
  int decimals = 4;  // values are rounded to this many decimals; negative keeps full precision
};

struct SyntheticSpec {
  std::size_t n_lusc = 0;
  std::size_t n_luad = 0;
  std::vector<SyntheticOmicSpec> omics;
};

struct SyntheticCohort {
  std::vector<OmicsMatrix> omics;
  ClinicalTable clinical;
  // Per omic: informative feature id -> signed effect.
  std::vector<std::map<std::string, double>> informative;
};

// Class-conditional Gaussian cohort. Informative features sit at seeded
// positions and alternate the sign of their shift.
SyntheticCohort generate_synthetic_cohort(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace omicq
