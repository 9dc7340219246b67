#pragma once

#include <string>
#include <vector>

#include "omicq/omics_io.hpp"

namespace omicq {

enum class TMode {
  Paper,  // (mean_lusc - mean_luad) / (sd_lusc + sd_luad), df = n1 + n2 - 2
  Welch,  // difference over sqrt(s1^2/n1 + s2^2/n2), Welch-Satterthwaite df
};

TMode t_mode_from_string(const std::string& s);

struct FeatureStats {
  std::string feature_id;
  double mean_lusc = 0.0;
  double mean_luad = 0.0;
  double sd_lusc = 0.0;  // sample sd, denominator n - 1
  double sd_luad = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  double df = 0.0;
};

// Per-feature mean over samples carrying `label`.
std::vector<double> column_means(const LabeledDataset& d, int label);

std::vector<FeatureStats> t_statistic(const LabeledDataset& d, TMode mode = TMode::Welch);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Two-sided Student t tail probability.
double p_value(double t, double df);

struct PValueRange {
  double low = 0.0;   // exclusive, except that a range starting at 0 includes p = 0
  double high = 1.0;  // inclusive
  std::size_t max_count = 0;  // 0 means unbounded
};

// Features sorted ascending by p (ties by id), bucketed into the ranges and
// truncated to each range's max_count.
std::vector<std::vector<std::string>> split_by_pvalue(const std::vector<FeatureStats>& stats,
                                                      const std::vector<PValueRange>& scheme);

std::string format_feature_stats(const std::vector<FeatureStats>& stats);

}  // namespace omicq
