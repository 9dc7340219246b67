#include "omicq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "omicq/errors.hpp"
#include "omicq/tsv.hpp"

namespace omicq {

TMode t_mode_from_string(const std::string& s) {
  if (s == "paper") return TMode::Paper;
  if (s == "welch") return TMode::Welch;
  throw ValidationError("unknown t-test mode '" + s + "'");
}

std::vector<double> column_means(const LabeledDataset& d, int label) {
  std::vector<double> sum(d.n_features(), 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < d.n_samples(); ++i) {
    if (d.labels[i] != label) continue;
    ++count;
    auto row = d.values.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) sum[j] += row[j];
  }
  if (count == 0) throw ValidationError("class " + std::to_string(label) + " has no samples");
  for (auto& s : sum) s /= static_cast<double>(count);
  return sum;
}

std::vector<FeatureStats> t_statistic(const LabeledDataset& d, TMode mode) {
  std::size_t n[2] = {0, 0};
  for (int y : d.labels) ++n[y];
  if (n[0] < 2 || n[1] < 2) throw ValidationError("t-test needs at least two samples per class");

  const auto mean0 = column_means(d, 0);
  const auto mean1 = column_means(d, 1);
  std::vector<double> ss0(d.n_features(), 0.0), ss1(d.n_features(), 0.0);
  for (std::size_t i = 0; i < d.n_samples(); ++i) {
    auto row = d.values.row(i);
    auto& ss = d.labels[i] == 0 ? ss0 : ss1;
    const auto& mu = d.labels[i] == 0 ? mean0 : mean1;
    for (std::size_t j = 0; j < row.size(); ++j) ss[j] += (row[j] - mu[j]) * (row[j] - mu[j]);
  }

  const double n0 = static_cast<double>(n[0]);
  const double n1 = static_cast<double>(n[1]);
  std::vector<FeatureStats> out(d.n_features());
  for (std::size_t j = 0; j < d.n_features(); ++j) {
    auto& s = out[j];
    s.feature_id = d.feature_ids[j];
    s.mean_lusc = mean0[j];
    s.mean_luad = mean1[j];
    const double var0 = ss0[j] / (n0 - 1.0);
    const double var1 = ss1[j] / (n1 - 1.0);
    s.sd_lusc = std::sqrt(var0);
    s.sd_luad = std::sqrt(var1);
    const double diff = s.mean_lusc - s.mean_luad;

    double denom = 0.0;
    if (mode == TMode::Paper) {
      denom = s.sd_lusc + s.sd_luad;
      s.df = n0 + n1 - 2.0;
    } else {
      const double a = var0 / n0;
      const double b = var1 / n1;
      denom = std::sqrt(a + b);
      s.df = (a + b) > 0.0 ? (a + b) * (a + b) / (a * a / (n0 - 1.0) + b * b / (n1 - 1.0)) : n0 + n1 - 2.0;
    }

    if (denom > 0.0) {
      s.t_stat = diff / denom;
      s.p_value = p_value(s.t_stat, s.df);
    } else if (diff != 0.0) {
      s.t_stat = std::copysign(std::numeric_limits<double>::infinity(), diff);
      s.p_value = 0.0;
    } else {
      s.t_stat = 0.0;
      s.p_value = 1.0;
    }
  }
  return out;
}

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double dd = 1.0 - qab * x / qap;
  if (std::fabs(dd) < kTiny) dd = kTiny;
  dd = 1.0 / dd;
  double h = dd;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    dd = 1.0 + aa * dd;
    if (std::fabs(dd) < kTiny) dd = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    dd = 1.0 / dd;
    h *= dd * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    dd = 1.0 + aa * dd;
    if (std::fabs(dd) < kTiny) dd = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    dd = 1.0 / dd;
    const double del = dd * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete beta needs positive shape parameters");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double p_value(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("p-value needs positive degrees of freedom");
  if (std::isnan(t)) throw ValidationError("p-value of NaN statistic");
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double x = df / (df + t * t);
  return std::clamp(incomplete_beta(0.5 * df, 0.5, x), 0.0, 1.0);
}

std::vector<std::vector<std::string>> split_by_pvalue(const std::vector<FeatureStats>& stats,
                                                      const std::vector<PValueRange>& scheme) {
  std::vector<std::size_t> by_low(scheme.size());
  std::iota(by_low.begin(), by_low.end(), 0);
  std::sort(by_low.begin(), by_low.end(), [&](auto a, auto b) { return scheme[a].low < scheme[b].low; });
  for (std::size_t k = 0; k < by_low.size(); ++k) {
    const auto& r = scheme[by_low[k]];
    if (!(r.low >= 0.0) || !(r.high <= 1.0) || !(r.low < r.high))
      throw ValidationError("invalid p-value range (" + format_double(r.low) + ", " + format_double(r.high) + "]");
    if (k > 0 && scheme[by_low[k - 1]].high > r.low) throw ValidationError("invalid p-value range: ranges overlap");
  }

  std::vector<const FeatureStats*> sorted;
  sorted.reserve(stats.size());
  for (const auto& s : stats) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](const FeatureStats* a, const FeatureStats* b) {
    if (a->p_value != b->p_value) return a->p_value < b->p_value;
    return a->feature_id < b->feature_id;
  });

  std::vector<std::vector<std::string>> subsets(scheme.size());
  for (std::size_t k = 0; k < scheme.size(); ++k) {
    const auto& r = scheme[k];
    for (const auto* s : sorted) {
      const bool above_low = r.low <= 0.0 ? s->p_value >= 0.0 : s->p_value > r.low;
      if (!above_low || s->p_value > r.high) continue;
      if (r.max_count != 0 && subsets[k].size() >= r.max_count) break;
      subsets[k].push_back(s->feature_id);
    }
  }
  return subsets;
}

std::string format_feature_stats(const std::vector<FeatureStats>& stats) {
  std::string out = "feature_id\tmean_lusc\tmean_luad\tsd_lusc\tsd_luad\tt_stat\tp_value\n";
  for (const auto& s : stats) {
    out += s.feature_id;
    for (double v : {s.mean_lusc, s.mean_luad, s.sd_lusc, s.sd_luad, s.t_stat, s.p_value}) {
      out += '\t';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace omicq
