#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "omicq/baselines.hpp"
#include "omicq/checkpoint.hpp"
#include "omicq/feature_select.hpp"
#include "omicq/hier_cluster.hpp"
#include "omicq/importance.hpp"
#include "omicq/omics_io.hpp"
#include "omicq/qnn.hpp"
#include "omicq/stats.hpp"

namespace omicq {

namespace fs = std::filesystem;

struct OmicPlan {
  OmicKind kind = OmicKind::RNAseq;
  std::vector<PValueRange> scheme;   // one range per subset
  std::vector<std::size_t> targets;  // features kept per subset; empty keeps whatever clustering yields
  std::size_t final_count = 0;       // cap on the concatenated list; 0 = no cap
};

struct PipelineConfig {
  std::uint64_t seed = 42;
  SyntheticSpec synth;

  // Raw inputs; when empty, ingest reads the synth stage output.
  std::map<OmicKind, std::vector<fs::path>> input_omics;
  fs::path input_clinical;
  bool impute_missing = true;

  TMode t_mode = TMode::Welch;
  double alpha = 0.05;
  std::vector<OmicPlan> omics;

  std::size_t bins = 10;
  std::map<ScoreMethod, std::size_t> k_best;
  std::size_t pca_components = 10;
  std::size_t rf_trees = 100;
  int rf_max_depth = -1;
  double auc_threshold = 0.80;
  std::size_t auc_trees = 250;
  int auc_max_depth = -1;
  double test_fraction = 0.2;
  CutCriterion cluster_criterion = CutCriterion::Distance;
  double distance_threshold = 3.5;
  std::optional<std::size_t> maxclust;  // unset: each subset's target
  std::size_t k_per_cluster = 1;

  std::vector<std::size_t> widths{256, 64, 32};

  std::string model = "qnn256";
  QnnConfig qnn;  // training knobs; circuit shape comes from the model preset
  std::optional<std::size_t> qnn_dense_width;
  LrOptions lr;
  MlpOptions mlp;
  RfOptions rf;
  std::size_t baseline_width = 256;

  std::size_t top_n = 32;
  std::size_t deviation_top_n = 40;
  ImportanceMode importance_mode = ImportanceMode::Gradient;
  fs::path name_map;

  Json snapshot;  // the configuration as recorded in manifests
};

PipelineConfig default_config();
// Keys absent from j keep their defaults.
PipelineConfig config_from_json(const Json& j);
PipelineConfig load_config(const fs::path& path);
void set_seed(PipelineConfig& c, std::uint64_t seed);

bool is_model_name(const std::string& name);
QnnConfig qnn_config_for(const PipelineConfig& c, const std::string& model);
// Integrated dataset width a model trains on.
std::size_t model_width(const PipelineConfig& c, const std::string& model);

void cmd_synth(const PipelineConfig& c, const fs::path& out);
void cmd_ingest(const PipelineConfig& c, const fs::path& out);
void cmd_engineer(const PipelineConfig& c, const fs::path& out);
void cmd_select(const PipelineConfig& c, const fs::path& out);
void cmd_integrate(const PipelineConfig& c, const fs::path& out);
void cmd_train(const PipelineConfig& c, const fs::path& out, const std::string& model);
void cmd_evaluate(const PipelineConfig& c, const fs::path& out, const std::string& model);
void cmd_report(const PipelineConfig& c, const fs::path& out, const std::string& model);
// All stages in order; synth only when no raw inputs are configured.
void cmd_run(const PipelineConfig& c, const fs::path& out, const std::string& model);

}  // namespace omicq
