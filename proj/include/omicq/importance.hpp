#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "omicq/baselines.hpp"
#include "omicq/omics_io.hpp"
#include "omicq/qnn.hpp"
#include "omicq/stats.hpp"

namespace omicq {

enum class ImportanceMode { Gradient, Dense };
ImportanceMode importance_mode_from_string(const std::string& s);

using ScaledProbFn = std::function<double(std::span<const double>)>;

// Mean over rows of |d f / d x_i|, by central differences with step h.
std::vector<double> gradient_importance(const ScaledProbFn& f, const Matrix& x_scaled, double h = 1e-4);

// x is raw; the model's own scaler is applied first.
std::vector<double> weight_importance(const QnnModel& m, const Matrix& x, ImportanceMode mode = ImportanceMode::Gradient);
std::vector<double> weight_importance(const BaselineModel& m, const Matrix& x);

struct ClassMeans {
  std::vector<double> luad;
  std::vector<double> lusc;
};
ClassMeans class_mean_levels(const LabeledDataset& d);

enum class Association { LUAD, LUSC };
enum class Significance { MostSignificant, LessSignificant };
std::string to_string(Association a);
std::string to_string(Significance s);

inline constexpr double kSignificanceAlpha = 0.05;

Association associate(double mean_luad, double mean_lusc);

struct FeatureReport {
  std::string feature_id;
  std::string name;  // optional display name
  double importance = 0.0;
  double mean_luad = 0.0;
  double mean_lusc = 0.0;
  Association association = Association::LUSC;
  double p_value = 1.0;
  Significance significance = Significance::LessSignificant;
};

// One record per feature, ranked by importance (ties by id).
std::vector<FeatureReport> build_report(const std::vector<double>& importance, const LabeledDataset& d,
                                        const std::vector<FeatureStats>& stats);
std::vector<FeatureReport> build_report(const QnnModel& m, const LabeledDataset& d,
                                        const std::vector<FeatureStats>& stats,
                                        ImportanceMode mode = ImportanceMode::Gradient);

std::vector<FeatureReport> top_n(const std::vector<FeatureReport>& r, std::size_t n);
void apply_names(std::vector<FeatureReport>& r, const std::map<std::string, std::string>& names);
// Two-column TSV: feature_id, name.
std::map<std::string, std::string> read_name_map(const std::filesystem::path& path);

std::string format_feature_report(const std::vector<FeatureReport>& r);

struct DeviationRanking {
  std::vector<std::string> top;     // best first
  std::vector<double> scores;       // per feature, dataset order
  std::vector<double> tp_deviation;
  std::vector<double> tn_deviation;
};

// Features whose true-positive and true-negative means stray furthest from the
// overall mean, each deviation vector min-max normalised before summing.
DeviationRanking tp_tn_deviation_scores(const LabeledDataset& test, std::span<const int> preds, std::size_t n = 40);
DeviationRanking tp_tn_deviation_scores(const QnnModel& m, const LabeledDataset& test, std::size_t n = 40);

// Long-format values per sample for the listed features.
std::string format_class_distributions(const LabeledDataset& d, const std::vector<std::string>& ids);

}  // namespace omicq
