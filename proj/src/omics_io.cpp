#include "omicq/omics_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "omicq/errors.hpp"
#include "omicq/tsv.hpp"

namespace omicq {

std::string_view to_string(OmicKind kind) {
  switch (kind) {
    case OmicKind::DNAme: return "DNAme";
    case OmicKind::RNAseq: return "RNAseq";
    case OmicKind::miRNAseq: return "miRNAseq";
  }
  return "unknown";
}

OmicKind omic_kind_from_string(std::string_view name) {
  if (name == "DNAme" || name == "dna" || name == "DNA") return OmicKind::DNAme;
  if (name == "RNAseq" || name == "rna" || name == "RNA") return OmicKind::RNAseq;
  if (name == "miRNAseq" || name == "mirna" || name == "miRNA" || name == "MIR") return OmicKind::miRNAseq;
  throw ValidationError("unknown omic kind '" + std::string(name) + "'");
}

std::string_view feature_prefix(OmicKind kind) {
  switch (kind) {
    case OmicKind::DNAme: return "DNA:";
    case OmicKind::RNAseq: return "RNA:";
    case OmicKind::miRNAseq: return "MIR:";
  }
  return "";
}

namespace {

void require_unique(const std::vector<std::string>& ids, const char* what) {
  std::unordered_set<std::string> seen;
  seen.reserve(ids.size());
  for (const auto& id : ids)
    if (!seen.insert(id).second) throw ValidationError(std::string("duplicate ") + what + " id '" + id + "'");
}

bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    auto line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = pos + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

void OmicsMatrix::validate() const {
  if (values.rows() != sample_ids.size()) throw ValidationError("row count does not match sample ids");
  if (values.cols() != feature_ids.size()) throw ValidationError("column count does not match feature ids");
  require_unique(feature_ids, "feature");
  require_unique(sample_ids, "sample");
  for (double v : values.data())
    if (!std::isfinite(v)) throw ValidationError("non-finite value in omics matrix");
}

void ClinicalTable::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& r : records)
    if (!seen.insert(r.sample_id).second) throw ValidationError("duplicate clinical record '" + r.sample_id + "'");
}

void LabeledDataset::validate() const {
  if (values.rows() != sample_ids.size() || values.cols() != feature_ids.size())
    throw ValidationError("dataset shape does not match its ids");
  if (labels.size() != sample_ids.size()) throw ValidationError("label count does not match sample count");
  for (int y : labels)
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
  require_unique(feature_ids, "feature");
  require_unique(sample_ids, "sample");
}

std::size_t LabeledDataset::feature_index(std::string_view id) const {
  auto it = std::find(feature_ids.begin(), feature_ids.end(), id);
  if (it == feature_ids.end()) throw ValidationError("unknown feature '" + std::string(id) + "'");
  return static_cast<std::size_t>(it - feature_ids.begin());
}

LabeledDataset LabeledDataset::select_features(const std::vector<std::string>& ids) const {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < feature_ids.size(); ++j) index.emplace(feature_ids[j], j);
  std::vector<std::size_t> cols;
  cols.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError("unknown feature '" + id + "'");
    cols.push_back(it->second);
  }
  return select_features(cols);
}

LabeledDataset LabeledDataset::select_features(const std::vector<std::size_t>& cols) const {
  LabeledDataset out;
  out.sample_ids = sample_ids;
  out.labels = labels;
  out.omic_kind = omic_kind;
  out.values = values.select_columns(cols);
  out.feature_ids.reserve(cols.size());
  for (auto c : cols) out.feature_ids.push_back(feature_ids.at(c));
  return out;
}

LabeledDataset LabeledDataset::select_samples(const std::vector<std::size_t>& rows) const {
  LabeledDataset out;
  out.feature_ids = feature_ids;
  out.omic_kind = omic_kind;
  out.values = values.select_rows(rows);
  for (auto r : rows) {
    out.sample_ids.push_back(sample_ids.at(r));
    out.labels.push_back(labels.at(r));
  }
  return out;
}

OmicsMatrix parse_omic_matrix_text(std::string_view text, OmicKind kind, const ParseOptions& opts) {
  auto lines = split_lines(text);
  if (lines.empty() || lines.front().empty()) throw ValidationError("no header");
  auto header = split_tabs(lines.front());
  if (header.size() < 2) throw ValidationError("malformed header: expected an id column and at least one sample");

  OmicsMatrix m;
  m.omic_kind = kind;
  m.unit = opts.unit;
  m.sample_ids.assign(header.begin() + 1, header.end());
  for (const auto& s : m.sample_ids)
    if (s.empty()) throw ValidationError("malformed header: empty sample id");
  require_unique(m.sample_ids, "sample");

  const std::size_t n_samples = m.sample_ids.size();
  const std::size_t n_features = lines.size() - 1;
  m.values = Matrix(n_samples, n_features);
  std::vector<std::vector<std::size_t>> missing(n_features);

  for (std::size_t f = 0; f < n_features; ++f) {
    auto cells = split_tabs(lines[f + 1]);
    if (cells.size() != n_samples + 1)
      throw ValidationError("malformed row " + std::to_string(f + 2) + ": expected " + std::to_string(n_samples + 1) +
                            " cells, found " + std::to_string(cells.size()));
    m.feature_ids.push_back(cells[0]);
    for (std::size_t s = 0; s < n_samples; ++s) {
      double v = 0.0;
      const auto& cell = cells[s + 1];
      if (parse_double(cell, v) && std::isfinite(v)) {
        m.values(s, f) = v;
      } else if (opts.impute_mean && is_missing_token(cell)) {
        missing[f].push_back(s);
      } else {
        throw ValidationError("non-numeric cell '" + cell + "' at feature '" + cells[0] + "', sample '" +
                              m.sample_ids[s] + "'");
      }
    }
  }
  require_unique(m.feature_ids, "feature");

  for (std::size_t f = 0; f < n_features; ++f) {
    if (missing[f].empty()) continue;
    if (missing[f].size() == n_samples)
      throw ValidationError("feature '" + m.feature_ids[f] + "' has no numeric values to impute from");
    std::vector<char> is_missing(n_samples, 0);
    for (auto s : missing[f]) is_missing[s] = 1;
    double sum = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s)
      if (!is_missing[s]) sum += m.values(s, f);
    const double mean = sum / static_cast<double>(n_samples - missing[f].size());
    for (auto s : missing[f]) m.values(s, f) = mean;
  }
  return m;
}

OmicsMatrix parse_omic_matrix(const std::filesystem::path& path, OmicKind kind, const ParseOptions& opts) {
  try {
    return parse_omic_matrix_text(read_text_file(path), kind, opts);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string format_omic_matrix(const OmicsMatrix& m) {
  std::string out = "feature_id";
  for (const auto& s : m.sample_ids) {
    out += '\t';
    out += s;
  }
  out += '\n';
  for (std::size_t f = 0; f < m.feature_ids.size(); ++f) {
    out += m.feature_ids[f];
    for (std::size_t s = 0; s < m.sample_ids.size(); ++s) {
      out += '\t';
      out += format_double(m.values(s, f));
    }
    out += '\n';
  }
  return out;
}

void write_omic_matrix(const std::filesystem::path& path, const OmicsMatrix& m) {
  write_text_file(path, format_omic_matrix(m));
}

namespace {

Subtype parse_subtype(std::string_view s) {
  if (s == "LUSC" || s == "LUSC_I" || s == "0") return Subtype::LUSC_I;
  if (s == "LUAD" || s == "LUAD_II" || s == "1") return Subtype::LUAD_II;
  throw ValidationError("unknown subtype '" + std::string(s) + "'");
}

SampleType parse_sample_type(std::string_view s) {
  if (s == "Primary Tumor" || s == "PrimaryTumor") return SampleType::PrimaryTumor;
  if (s == "Solid Tissue Normal" || s == "SolidTissueNormal") return SampleType::SolidTissueNormal;
  throw ValidationError("unknown sample_type '" + std::string(s) + "'");
}

}  // namespace

ClinicalTable parse_clinical_text(std::string_view text) {
  auto lines = split_lines(text);
  if (lines.empty() || lines.front().empty()) throw ValidationError("no header");
  auto header = split_tabs(lines.front());
  auto col = [&](std::string_view name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError("clinical table lacks column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto id_col = col("sample_id");
  const auto subtype_col = col("subtype");
  const auto type_col = col("sample_type");

  ClinicalTable table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cells = split_tabs(lines[i]);
    if (cells.size() != header.size())
      throw ValidationError("malformed clinical row " + std::to_string(i + 1));
    ClinicalRecord r;
    r.sample_id = cells[id_col];
    r.subtype = parse_subtype(cells[subtype_col]);
    r.sample_type = parse_sample_type(cells[type_col]);
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != id_col && c != subtype_col && c != type_col) r.attributes[header[c]] = cells[c];
    table.records.push_back(std::move(r));
  }
  table.validate();
  return table;
}

ClinicalTable parse_clinical(const std::filesystem::path& path) {
  try {
    return parse_clinical_text(read_text_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string format_clinical(const ClinicalTable& c) {
  std::set<std::string> attr_names;
  for (const auto& r : c.records)
    for (const auto& [k, v] : r.attributes) attr_names.insert(k);
  std::string out = "sample_id\tsubtype\tsample_type";
  for (const auto& a : attr_names) out += "\t" + a;
  out += '\n';
  for (const auto& r : c.records) {
    out += r.sample_id;
    out += r.subtype == Subtype::LUAD_II ? "\tLUAD" : "\tLUSC";
    out += r.sample_type == SampleType::PrimaryTumor ? "\tPrimary Tumor" : "\tSolid Tissue Normal";
    for (const auto& a : attr_names) {
      auto it = r.attributes.find(a);
      out += '\t';
      if (it != r.attributes.end()) out += it->second;
    }
    out += '\n';
  }
  return out;
}

void write_clinical(const std::filesystem::path& path, const ClinicalTable& c) {
  write_text_file(path, format_clinical(c));
}

std::string format_labels(const LabeledDataset& d) {
  std::string labels = "sample_id\tlabel\n";
  for (std::size_t i = 0; i < d.sample_ids.size(); ++i)
    labels += d.sample_ids[i] + "\t" + std::to_string(d.labels[i]) + "\n";
  return labels;
}

std::string format_dataset_matrix(const LabeledDataset& d) {
  OmicsMatrix m;
  m.feature_ids = d.feature_ids;
  m.sample_ids = d.sample_ids;
  m.values = d.values;
  return format_omic_matrix(m);
}

void write_labeled_dataset(const std::filesystem::path& matrix_path, const std::filesystem::path& labels_path,
                           const LabeledDataset& d) {
  write_text_file(matrix_path, format_dataset_matrix(d));
  write_text_file(labels_path, format_labels(d));
}

LabeledDataset parse_labeled_dataset_text(std::string_view matrix_text, std::string_view labels_text,
                                          std::optional<OmicKind> kind, const std::string& source) {
  auto m = parse_omic_matrix_text(matrix_text, kind.value_or(OmicKind::RNAseq));
  auto lines = split_lines(labels_text);
  std::unordered_map<std::string, int> label_of_id;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cells = split_tabs(lines[i]);
    if (cells.size() != 2 || (cells[1] != "0" && cells[1] != "1"))
      throw ValidationError(source + ": malformed label row " + std::to_string(i + 1));
    label_of_id[cells[0]] = cells[1] == "1" ? 1 : 0;
  }
  LabeledDataset d;
  d.feature_ids = std::move(m.feature_ids);
  d.sample_ids = std::move(m.sample_ids);
  d.values = std::move(m.values);
  d.omic_kind = kind;
  for (const auto& s : d.sample_ids) {
    auto it = label_of_id.find(s);
    if (it == label_of_id.end()) throw ValidationError(source + ": no label for sample '" + s + "'");
    d.labels.push_back(it->second);
  }
  d.validate();
  return d;
}

LabeledDataset read_labeled_dataset(const std::filesystem::path& matrix_path, const std::filesystem::path& labels_path,
                                    std::optional<OmicKind> kind) {
  return parse_labeled_dataset_text(read_text_file(matrix_path), read_text_file(labels_path), kind,
                                    labels_path.string());
}

OmicsMatrix drop_nonpositive_features(const OmicsMatrix& m) {
  std::vector<std::size_t> keep;
  for (std::size_t f = 0; f < m.feature_ids.size(); ++f) {
    double sum = 0.0;
    for (std::size_t s = 0; s < m.sample_ids.size(); ++s) sum += m.values(s, f);
    if (sum > 0.0) keep.push_back(f);
  }
  OmicsMatrix out;
  out.omic_kind = m.omic_kind;
  out.unit = m.unit;
  out.sample_ids = m.sample_ids;
  out.values = m.values.select_columns(keep);
  for (auto f : keep) out.feature_ids.push_back(m.feature_ids[f]);
  return out;
}

OmicsMatrix concat_cohorts(const OmicsMatrix& a, const OmicsMatrix& b) {
  if (a.omic_kind != b.omic_kind) throw ValidationError("cannot concatenate different omic kinds");
  if (a.feature_ids != b.feature_ids) throw ValidationError("feature mismatch between cohorts");
  std::unordered_set<std::string> ids(a.sample_ids.begin(), a.sample_ids.end());
  for (const auto& s : b.sample_ids)
    if (ids.count(s)) throw ValidationError("overlapping sample id '" + s + "'");

  OmicsMatrix out;
  out.omic_kind = a.omic_kind;
  out.unit = a.unit.empty() ? b.unit : a.unit;
  out.feature_ids = a.feature_ids;
  out.sample_ids = a.sample_ids;
  out.sample_ids.insert(out.sample_ids.end(), b.sample_ids.begin(), b.sample_ids.end());
  out.values = Matrix(out.sample_ids.size(), out.feature_ids.size());
  auto& dst = out.values.data();
  std::copy(a.values.data().begin(), a.values.data().end(), dst.begin());
  std::copy(b.values.data().begin(), b.values.data().end(), dst.begin() + static_cast<std::ptrdiff_t>(a.values.data().size()));
  return out;
}

LabeledDataset join_clinical(const OmicsMatrix& m, const ClinicalTable& c) {
  std::unordered_map<std::string, int> label_of_id;
  for (const auto& r : c.records) label_of_id.emplace(r.sample_id, label_of(r.subtype));

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (std::size_t s = 0; s < m.sample_ids.size(); ++s)
    if (label_of_id.count(m.sample_ids[s])) kept.emplace_back(m.sample_ids[s], s);
  if (kept.empty()) throw ValidationError("no samples shared between omics matrix and clinical table");
  std::sort(kept.begin(), kept.end());

  LabeledDataset d;
  d.feature_ids = m.feature_ids;
  d.omic_kind = m.omic_kind;
  std::vector<std::size_t> rows;
  for (const auto& [id, row] : kept) {
    d.sample_ids.push_back(id);
    d.labels.push_back(label_of_id.at(id));
    rows.push_back(row);
  }
  d.values = m.values.select_rows(rows);
  return d;
}

LabeledDataset intersect_and_join(const std::vector<LabeledDataset>& omics) {
  if (omics.size() < 2) throw ValidationError("integration needs at least two datasets");

  std::map<std::string, int> common;
  for (std::size_t i = 0; i < omics[0].sample_ids.size(); ++i) common.emplace(omics[0].sample_ids[i], omics[0].labels[i]);
  for (std::size_t k = 1; k < omics.size(); ++k) {
    std::map<std::string, int> next;
    for (std::size_t i = 0; i < omics[k].sample_ids.size(); ++i) {
      auto it = common.find(omics[k].sample_ids[i]);
      if (it == common.end()) continue;
      if (it->second != omics[k].labels[i])
        throw ValidationError("conflicting labels for sample '" + it->first + "'");
      next.emplace(*it);
    }
    common = std::move(next);
  }
  if (common.empty()) throw ValidationError("no samples common to all datasets");

  LabeledDataset out;
  for (const auto& [id, y] : common) {
    out.sample_ids.push_back(id);
    out.labels.push_back(y);
  }

  std::vector<std::vector<std::size_t>> rows(omics.size());
  std::size_t width = 0;
  for (std::size_t k = 0; k < omics.size(); ++k) {
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < omics[k].sample_ids.size(); ++i) row_of.emplace(omics[k].sample_ids[i], i);
    for (const auto& id : out.sample_ids) rows[k].push_back(row_of.at(id));
    std::string prefix = omics[k].omic_kind ? std::string(feature_prefix(*omics[k].omic_kind)) : std::string();
    for (const auto& f : omics[k].feature_ids)
      out.feature_ids.push_back(!prefix.empty() && f.rfind(prefix, 0) != 0 ? prefix + f : f);
    width += omics[k].n_features();
  }

  out.values = Matrix(out.sample_ids.size(), width);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < omics.size(); ++k) {
    const auto& src = omics[k].values;
    for (std::size_t i = 0; i < out.sample_ids.size(); ++i) {
      auto from = src.row(rows[k][i]);
      std::copy(from.begin(), from.end(), out.values.row(i).begin() + static_cast<std::ptrdiff_t>(offset));
    }
    offset += src.cols();
  }
  out.validate();
  return out;
}

LabeledDataset subsample_features(const LabeledDataset& d, std::size_t n, std::uint64_t seed) {
  if (n > d.n_features())
    throw ValidationError("cannot draw " + std::to_string(n) + " features from " + std::to_string(d.n_features()));
  std::vector<std::size_t> idx(d.n_features());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates; the drawn set is then restored to input order.
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return d.select_features(idx);
}

namespace {

std::string synthetic_feature_id(OmicKind kind, std::size_t i) {
  char buf[48];
  switch (kind) {
    case OmicKind::DNAme: std::snprintf(buf, sizeof(buf), "cg%08zu", i); break;
    case OmicKind::RNAseq: std::snprintf(buf, sizeof(buf), "ENSG%011zu", i); break;
    case OmicKind::miRNAseq: std::snprintf(buf, sizeof(buf), "hsa-mir-%zu", 10000 + i); break;
  }
  return buf;
}

}  // namespace

SyntheticCohort generate_synthetic_cohort(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n_lusc == 0 || spec.n_luad == 0) throw ValidationError("synthetic cohort needs samples in both classes");
  if (spec.omics.empty()) throw ValidationError("synthetic cohort needs at least one omic");
  for (const auto& o : spec.omics) {
    if (o.n_features == 0) throw ValidationError("synthetic omic needs a positive feature count");
    if (!(o.noise_sd > 0.0)) throw ValidationError("synthetic noise sd must be positive");
    if (o.missing_fraction < 0.0 || o.missing_fraction >= 1.0)
      throw ValidationError("missing fraction must lie in [0, 1)");
    std::size_t informative = 0;
    for (const auto& g : o.effects) informative += g.count;
    if (informative > o.n_features) throw ValidationError("more informative features than features");
  }

  const std::size_t n = spec.n_lusc + spec.n_luad;
  SyntheticCohort cohort;
  std::vector<std::string> sample_ids;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "TCGA-SY-%05zu-01", i);
    sample_ids.emplace_back(buf);
    const bool luad = i >= spec.n_lusc;
    labels.push_back(luad ? 1 : 0);
    ClinicalRecord r;
    r.sample_id = sample_ids.back();
    r.subtype = luad ? Subtype::LUAD_II : Subtype::LUSC_I;
    r.sample_type = SampleType::PrimaryTumor;
    cohort.clinical.records.push_back(std::move(r));
  }

  for (const auto& o : spec.omics) {
    Rng rng(derive_seed(seed, to_string(o.kind)));
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<std::size_t> positions(o.n_features);
    std::iota(positions.begin(), positions.end(), 0);
    std::shuffle(positions.begin(), positions.end(), rng);
    std::vector<double> shift(o.n_features, 0.0);
    std::map<std::string, double> informative;
    std::size_t next = 0;
    for (const auto& g : o.effects) {
      for (std::size_t k = 0; k < g.count; ++k, ++next) {
        const double signed_effect = (k % 2 == 0) ? g.effect : -g.effect;
        shift[positions[next]] = signed_effect;
        informative.emplace(synthetic_feature_id(o.kind, positions[next]), signed_effect);
      }
    }

    std::vector<std::size_t> present;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
      if (unit(rng) >= o.missing_fraction) present.push_back(i);

    OmicsMatrix m;
    m.omic_kind = o.kind;
    m.unit = o.unit;
    for (std::size_t f = 0; f < o.n_features; ++f) m.feature_ids.push_back(synthetic_feature_id(o.kind, f));
    m.values = Matrix(present.size(), o.n_features);
    const double quantum = o.decimals >= 0 ? std::pow(10.0, o.decimals) : 0.0;
    for (std::size_t r = 0; r < present.size(); ++r) {
      const std::size_t i = present[r];
      m.sample_ids.push_back(sample_ids[i]);
      for (std::size_t f = 0; f < o.n_features; ++f) {
        double v = o.base_mean + o.noise_sd * (normal(rng) + shift[f] * labels[i]);
        if (quantum > 0.0) v = std::round(v * quantum) / quantum;
        m.values(r, f) = v;
      }
    }
    cohort.omics.push_back(std::move(m));
    cohort.informative.push_back(std::move(informative));
  }
  return cohort;
}

}  // namespace omicq
