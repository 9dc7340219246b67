#include "omicq/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "omicq/errors.hpp"
#include "omicq/metrics.hpp"
#include "omicq/tsv.hpp"

namespace omicq {

ImportanceMode importance_mode_from_string(const std::string& s) {
  if (s == "gradient") return ImportanceMode::Gradient;
  if (s == "dense") return ImportanceMode::Dense;
  throw ValidationError("unknown importance mode '" + s + "'");
}

std::vector<double> gradient_importance(const ScaledProbFn& f, const Matrix& x, double h) {
  if (x.rows() == 0) throw ValidationError("importance needs at least one instance");
  std::vector<double> imp(x.cols(), 0.0);
  std::vector<double> row;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto src = x.row(r);
    row.assign(src.begin(), src.end());
    for (std::size_t i = 0; i < row.size(); ++i) {
      const double keep = row[i];
      row[i] = keep + h;
      const double up = f(row);
      row[i] = keep - h;
      const double down = f(row);
      row[i] = keep;
      imp[i] += std::fabs((up - down) / (2.0 * h));
    }
  }
  for (auto& v : imp) v /= static_cast<double>(x.rows());
  return imp;
}

std::vector<double> weight_importance(const QnnModel& m, const Matrix& x, ImportanceMode mode) {
  if (x.rows() == 0) throw ValidationError("importance needs at least one instance");
  if (x.cols() != m.config.n_features) throw ValidationError("importance: feature width mismatch");
  if (mode == ImportanceMode::Dense) {
    const std::size_t w = m.config.dense_width;
    const std::size_t nq = m.config.n_qubits;
    if (w != m.config.n_features)
      throw ValidationError("dense importance needs dense_width == n_features (" + std::to_string(w) + " vs " +
                            std::to_string(m.config.n_features) + ")");
    std::vector<double> imp(w, 0.0);
    for (std::size_t u = 0; u < w; ++u) {
      for (std::size_t q = 0; q < nq; ++q) imp[u] += std::fabs(m.params.w1[u * nq + q]);
      imp[u] /= static_cast<double>(nq);
    }
    return imp;
  }
  const Matrix xs = m.scaler.apply(x);
  return gradient_importance([&](std::span<const double> v) { return forward(m.config, m.params, v); }, xs);
}

std::vector<double> weight_importance(const BaselineModel& m, const Matrix& x) {
  if (x.cols() != m.n_features()) throw ValidationError("importance: feature width mismatch");
  // Finite differences through the model's own prediction path; rows are
  // unscaled back so baseline_predict can re-apply the scaler.
  const Matrix xs = m.scaler.apply(x);
  Matrix one(1, m.n_features());
  return gradient_importance(
      [&](std::span<const double> v) {
        for (std::size_t j = 0; j < v.size(); ++j) one(0, j) = v[j] * m.scaler.scale[j] + m.scaler.shift[j];
        return baseline_predict(m, one)[0];
      },
      xs);
}

ClassMeans class_mean_levels(const LabeledDataset& d) { return {column_means(d, 1), column_means(d, 0)}; }

std::string to_string(Association a) { return a == Association::LUAD ? "LUAD" : "LUSC"; }
std::string to_string(Significance s) {
  return s == Significance::MostSignificant ? "most_significant" : "less_significant";
}

Association associate(double mean_luad, double mean_lusc) {
  return mean_luad > mean_lusc ? Association::LUAD : Association::LUSC;
}

namespace {

void sort_report(std::vector<FeatureReport>& r) {
  std::sort(r.begin(), r.end(), [](const FeatureReport& a, const FeatureReport& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.feature_id < b.feature_id;
  });
}

}  // namespace

std::vector<FeatureReport> build_report(const std::vector<double>& importance, const LabeledDataset& d,
                                        const std::vector<FeatureStats>& stats) {
  if (importance.size() != d.n_features()) throw ValidationError("one importance per feature required");
  std::map<std::string, const FeatureStats*> by_id;
  for (const auto& s : stats) by_id[s.feature_id] = &s;
  const ClassMeans means = class_mean_levels(d);
  std::vector<FeatureReport> out;
  out.reserve(d.n_features());
  for (std::size_t j = 0; j < d.n_features(); ++j) {
    const auto it = by_id.find(d.feature_ids[j]);
    if (it == by_id.end()) throw ValidationError("no statistics for feature '" + d.feature_ids[j] + "'");
    FeatureReport f;
    f.feature_id = d.feature_ids[j];
    f.importance = importance[j];
    f.mean_luad = means.luad[j];
    f.mean_lusc = means.lusc[j];
    f.association = associate(f.mean_luad, f.mean_lusc);
    f.p_value = it->second->p_value;
    f.significance = f.p_value < kSignificanceAlpha ? Significance::MostSignificant : Significance::LessSignificant;
    out.push_back(std::move(f));
  }
  sort_report(out);
  return out;
}

std::vector<FeatureReport> build_report(const QnnModel& m, const LabeledDataset& d,
                                        const std::vector<FeatureStats>& stats, ImportanceMode mode) {
  return build_report(weight_importance(m, d.values, mode), d, stats);
}

std::vector<FeatureReport> top_n(const std::vector<FeatureReport>& r, std::size_t n) {
  return {r.begin(), r.begin() + static_cast<std::ptrdiff_t>(std::min(n, r.size()))};
}

void apply_names(std::vector<FeatureReport>& r, const std::map<std::string, std::string>& names) {
  for (auto& f : r) {
    const auto it = names.find(f.feature_id);
    if (it != names.end()) f.name = it->second;
  }
}

std::map<std::string, std::string> read_name_map(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::map<std::string, std::string> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    start = end + 1;
    if (line.empty()) continue;
    const auto cells = split_tabs(line);
    if (cells.size() < 2) throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    if (line_no == 1 && cells[0] == "feature_id") continue;
    out[cells[0]] = cells[1];
  }
  return out;
}

std::string format_feature_report(const std::vector<FeatureReport>& r) {
  std::string out = "rank\tfeature_id\tname\tp_value\timportance\tmean_luad\tmean_lusc\tassociation\tsignificance\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto& f = r[i];
    out += std::to_string(i + 1) + "\t" + f.feature_id + "\t" + f.name + "\t" + format_double(f.p_value) + "\t" +
           format_double(f.importance) + "\t" + format_double(f.mean_luad) + "\t" + format_double(f.mean_lusc) + "\t" +
           to_string(f.association) + "\t" + to_string(f.significance) + "\n";
  }
  return out;
}

namespace {

void min_max_normalise(std::vector<double>& v) {
  if (v.empty()) return;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double a = *lo;
  const double range = *hi - a;
  for (auto& x : v) x = range > 0.0 ? (x - a) / range : 0.0;
}

}  // namespace

DeviationRanking tp_tn_deviation_scores(const LabeledDataset& test, std::span<const int> preds, std::size_t n) {
  if (preds.size() != test.n_samples()) throw ValidationError("one prediction per test sample required");
  const std::size_t p = test.n_features();
  std::vector<double> overall(p, 0.0), tp_mean(p, 0.0), tn_mean(p, 0.0);
  std::size_t n_tp = 0, n_tn = 0;
  for (std::size_t r = 0; r < test.n_samples(); ++r) {
    const auto row = test.values.row(r);
    const bool tp = test.labels[r] == 1 && preds[r] == 1;
    const bool tn = test.labels[r] == 0 && preds[r] == 0;
    n_tp += tp;
    n_tn += tn;
    for (std::size_t j = 0; j < p; ++j) {
      overall[j] += row[j];
      if (tp) tp_mean[j] += row[j];
      if (tn) tn_mean[j] += row[j];
    }
  }
  if (n_tp == 0) throw ValidationError("no true-positive samples");
  if (n_tn == 0) throw ValidationError("no true-negative samples");
  DeviationRanking out;
  out.tp_deviation.resize(p);
  out.tn_deviation.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double mu = overall[j] / static_cast<double>(test.n_samples());
    out.tp_deviation[j] = std::fabs(tp_mean[j] / static_cast<double>(n_tp) - mu);
    out.tn_deviation[j] = std::fabs(tn_mean[j] / static_cast<double>(n_tn) - mu);
  }
  std::vector<double> a = out.tp_deviation, b = out.tn_deviation;
  min_max_normalise(a);
  min_max_normalise(b);
  out.scores.resize(p);
  for (std::size_t j = 0; j < p; ++j) out.scores[j] = a[j] + b[j];

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (out.scores[x] != out.scores[y]) return out.scores[x] > out.scores[y];
    return test.feature_ids[x] < test.feature_ids[y];
  });
  for (std::size_t i = 0; i < std::min(n, p); ++i) out.top.push_back(test.feature_ids[order[i]]);
  return out;
}

DeviationRanking tp_tn_deviation_scores(const QnnModel& m, const LabeledDataset& test, std::size_t n) {
  return tp_tn_deviation_scores(test, predict_labels(m, test.values), n);
}

std::string format_class_distributions(const LabeledDataset& d, const std::vector<std::string>& ids) {
  std::string out = "feature_id\tsample_id\tsubtype\tvalue\n";
  for (const auto& id : ids) {
    const std::size_t j = d.feature_index(id);
    for (std::size_t r = 0; r < d.n_samples(); ++r)
      out += id + "\t" + d.sample_ids[r] + "\t" + (d.labels[r] == 1 ? "LUAD" : "LUSC") + "\t" +
             format_double(d.values(r, j)) + "\n";
  }
  return out;
}

}  // namespace omicq
