#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "omicq/omics_io.hpp"

namespace omicq {

enum class ScoreMethod { MI, Chi2, PCA, RF };
std::string to_string(ScoreMethod m);

struct ScoreEntry {
  std::string feature_id;
  double score = 0.0;
};

struct ScoreTable {
  ScoreMethod method = ScoreMethod::MI;
  std::vector<ScoreEntry> entries;  // one per feature, in dataset order
};

std::string format_score_table(const ScoreTable& t);

// Equal-width bins over [min, max]; a constant vector maps to bin 0.
std::vector<int> discretize(std::span<const double> x, std::size_t bins);

// Plug-in estimates over the empirical joint of two discrete codes.
double mutual_information(std::span<const int> x, std::span<const int> y);  // nats
double chi_square(std::span<const int> x, std::span<const int> y);
// Pearson statistic of an observed contingency table (rows x columns).
double chi_square_table(const std::vector<std::vector<double>>& observed);

ScoreTable mutual_info_scores(const LabeledDataset& d, std::size_t bins = 10);
ScoreTable chi_square_scores(const LabeledDataset& d, std::size_t bins = 10);

enum class PcaRoute { Auto, Covariance, Gram };

// Variance-weighted absolute loadings: feature j scores
// sum_{i<k} lambda_i |e_ij| / sum lambda, on z-scored columns.
ScoreTable pca_feature_scores(const LabeledDataset& d, std::size_t k_components, PcaRoute route = PcaRoute::Auto);

ScoreTable rf_feature_importances(const LabeledDataset& d, std::size_t n_trees, int max_depth, std::uint64_t seed);

// Top k by score; ties go to the lexicographically smaller id.
std::vector<std::string> select_k_best(const ScoreTable& s, std::size_t k);

struct SelectionResult {
  std::vector<std::vector<std::string>> per_method;
  std::vector<std::string> common;  // in first-list order
  std::vector<std::string> unique;  // union, first-appearance order
  // |union| - |common|, the count printed alongside the Venn diagrams.
  std::size_t union_minus_common = 0;
};

SelectionResult venn_partition(const std::vector<std::vector<std::string>>& per_method);

struct AucFilterOptions {
  double threshold = 0.80;
  std::size_t n_trees = 250;
  int max_depth = -1;
  std::uint64_t seed = 42;
};

struct FeatureAuc {
  std::string feature_id;
  double train_auc = 0.0;
  double test_auc = 0.0;
  bool kept = false;
};

struct AucFilterResult {
  std::vector<std::string> kept;      // candidate order, duplicates removed
  std::vector<FeatureAuc> evaluated;  // one per distinct candidate
};

// Single-feature forest per candidate; a feature survives when its ROC-AUC
// exceeds the threshold on both the training and the test split.
AucFilterResult auc_filter(const LabeledDataset& train, const LabeledDataset& test,
                           const std::vector<std::string>& candidates, const AucFilterOptions& opts = {});

}  // namespace omicq
