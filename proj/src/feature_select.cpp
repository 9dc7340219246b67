#include "omicq/feature_select.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "omicq/errors.hpp"
#include "omicq/forest.hpp"
#include "omicq/metrics.hpp"
#include "omicq/tsv.hpp"

namespace omicq {

std::string to_string(ScoreMethod m) {
  switch (m) {
    case ScoreMethod::MI: return "MI";
    case ScoreMethod::Chi2: return "Chi2";
    case ScoreMethod::PCA: return "PCA";
    case ScoreMethod::RF: return "RF";
  }
  return "?";
}

std::string format_score_table(const ScoreTable& t) {
  std::string out = "feature_id\t" + to_string(t.method) + "\n";
  for (const auto& e : t.entries) out += e.feature_id + "\t" + format_double(e.score) + "\n";
  return out;
}

std::vector<int> discretize(std::span<const double> x, std::size_t bins) {
  if (bins < 2) throw ValidationError("discretize needs at least two bins");
  std::vector<int> out(x.size(), 0);
  if (x.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return out;
  const double width = (hi - lo) / static_cast<double>(bins);
  const int last = static_cast<int>(bins) - 1;
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = std::min(last, static_cast<int>(std::floor((x[i] - lo) / width)));
  return out;
}

namespace {

// Dense contingency counts of two code vectors.
struct Contingency {
  std::vector<double> counts;  // row-major, nx x ny
  std::vector<double> row_totals;
  std::vector<double> col_totals;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double total = 0.0;
};

std::vector<std::size_t> compress_codes(std::span<const int> v, std::size_t& levels) {
  std::vector<int> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  levels = sorted.size();
  std::vector<std::size_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v[i]) - sorted.begin());
  return out;
}

Contingency contingency(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size()) throw ValidationError("contingency: length mismatch");
  Contingency c;
  const auto cx = compress_codes(x, c.nx);
  const auto cy = compress_codes(y, c.ny);
  c.counts.assign(c.nx * c.ny, 0.0);
  c.row_totals.assign(c.nx, 0.0);
  c.col_totals.assign(c.ny, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    c.counts[cx[i] * c.ny + cy[i]] += 1.0;
    c.row_totals[cx[i]] += 1.0;
    c.col_totals[cy[i]] += 1.0;
  }
  c.total = static_cast<double>(x.size());
  return c;
}

double mi_of(const Contingency& c) {
  double mi = 0.0;
  for (std::size_t a = 0; a < c.nx; ++a)
    for (std::size_t b = 0; b < c.ny; ++b) {
      const double n = c.counts[a * c.ny + b];
      if (n <= 0.0) continue;
      mi += (n / c.total) * std::log(n * c.total / (c.row_totals[a] * c.col_totals[b]));
    }
  return std::max(0.0, mi);
}

double chi2_of(const Contingency& c) {
  double chi2 = 0.0;
  for (std::size_t a = 0; a < c.nx; ++a)
    for (std::size_t b = 0; b < c.ny; ++b) {
      const double e = c.row_totals[a] * c.col_totals[b] / c.total;
      if (e <= 0.0) continue;
      const double o = c.counts[a * c.ny + b];
      chi2 += (o - e) * (o - e) / e;
    }
  return chi2;
}

void require_samples(const LabeledDataset& d, std::size_t n, const char* what) {
  if (d.n_samples() < n) throw ValidationError(std::string(what) + " needs at least " + std::to_string(n) + " samples");
}

}  // namespace

double mutual_information(std::span<const int> x, std::span<const int> y) {
  if (x.empty()) return 0.0;
  return mi_of(contingency(x, y));
}

double chi_square(std::span<const int> x, std::span<const int> y) {
  if (x.empty()) return 0.0;
  return chi2_of(contingency(x, y));
}

double chi_square_table(const std::vector<std::vector<double>>& observed) {
  Contingency c;
  c.nx = observed.size();
  c.ny = c.nx ? observed[0].size() : 0;
  c.row_totals.assign(c.nx, 0.0);
  c.col_totals.assign(c.ny, 0.0);
  for (std::size_t a = 0; a < c.nx; ++a) {
    if (observed[a].size() != c.ny) throw ValidationError("chi-square table rows differ in length");
    for (std::size_t b = 0; b < c.ny; ++b) {
      if (observed[a][b] < 0.0) throw ValidationError("chi-square table has a negative count");
      c.counts.push_back(observed[a][b]);
      c.row_totals[a] += observed[a][b];
      c.col_totals[b] += observed[a][b];
      c.total += observed[a][b];
    }
  }
  if (c.total <= 0.0) return 0.0;
  return chi2_of(c);
}

ScoreTable mutual_info_scores(const LabeledDataset& d, std::size_t bins) {
  require_samples(d, 2, "mutual information");
  ScoreTable t{ScoreMethod::MI, {}};
  for (std::size_t j = 0; j < d.n_features(); ++j) {
    const auto col = d.values.column(j);
    t.entries.push_back({d.feature_ids[j], mutual_information(discretize(col, bins), d.labels)});
  }
  return t;
}

ScoreTable chi_square_scores(const LabeledDataset& d, std::size_t bins) {
  require_samples(d, 2, "chi-square");
  ScoreTable t{ScoreMethod::Chi2, {}};
  for (std::size_t j = 0; j < d.n_features(); ++j) {
    auto col = d.values.column(j);
    // Non-negative inputs as chi2 selectors expect; equal-width binning is shift invariant.
    const double lo = *std::min_element(col.begin(), col.end());
    for (auto& v : col) v -= lo;
    t.entries.push_back({d.feature_ids[j], chi_square(discretize(col, bins), d.labels)});
  }
  return t;
}

ScoreTable pca_feature_scores(const LabeledDataset& d, std::size_t k_components, PcaRoute route) {
  require_samples(d, 2, "PCA");
  const std::size_t n = d.n_samples();
  const std::size_t p = d.n_features();
  if (k_components == 0 || k_components > std::min(n, p))
    throw ValidationError("PCA components must lie in [1, min(samples, features)]");

  std::vector<std::size_t> active;
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), 0);
  {
    std::vector<std::vector<double>> cols;
    for (std::size_t j = 0; j < p; ++j) {
      auto col = d.values.column(j);
      const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
      double ss = 0.0;
      for (double v : col) ss += (v - mean) * (v - mean);
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      if (!(sd > 0.0) || sd < 1e-300) continue;
      for (auto& v : col) v = (v - mean) / sd;
      active.push_back(j);
      cols.push_back(std::move(col));
    }
    z.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(active.size()));
    for (std::size_t c = 0; c < active.size(); ++c)
      for (std::size_t i = 0; i < n; ++i) z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = cols[c][i];
  }

  ScoreTable t{ScoreMethod::PCA, {}};
  for (std::size_t j = 0; j < p; ++j) t.entries.push_back({d.feature_ids[j], 0.0});
  const std::size_t q = active.size();
  if (q == 0) return t;

  const double denom = static_cast<double>(n - 1);
  Eigen::VectorXd lambda;
  Eigen::MatrixXd vectors;  // q x m, columns are unit eigenvectors of the covariance
  const bool use_gram = route == PcaRoute::Gram || (route == PcaRoute::Auto && q > n);
  if (!use_gram) {
    const Eigen::MatrixXd cov = (z.transpose() * z) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    lambda = es.eigenvalues();
    vectors = es.eigenvectors();
  } else {
    // Same non-zero spectrum through the n x n Gram matrix; e = Z^T u / sqrt(denom * lambda).
    const Eigen::MatrixXd gram = (z * z.transpose()) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    lambda = es.eigenvalues();
    vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q), lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (lambda(i) <= 1e-12 * std::max(1.0, lambda.maxCoeff())) {
        lambda(i) = 0.0;
        continue;
      }
      vectors.col(i) = z.transpose() * es.eigenvectors().col(i) / std::sqrt(denom * lambda(i));
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(lambda.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return lambda(a) > lambda(b); });

  // Total variance of standardized columns equals their count.
  const double total = static_cast<double>(q);
  const std::size_t k = std::min<std::size_t>(k_components, order.size());
  std::vector<double> score(q, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const auto i = order[c];
    const double l = std::max(0.0, lambda(i));
    Eigen::VectorXd e = vectors.col(i);
    Eigen::Index arg = 0;
    e.cwiseAbs().maxCoeff(&arg);
    if (e(arg) < 0.0) e = -e;
    for (std::size_t j = 0; j < q; ++j) score[j] += l * std::fabs(e(static_cast<Eigen::Index>(j))) / total;
  }
  for (std::size_t c = 0; c < q; ++c) t.entries[active[c]].score = score[c];
  return t;
}

ScoreTable rf_feature_importances(const LabeledDataset& d, std::size_t n_trees, int max_depth, std::uint64_t seed) {
  ForestOptions opts;
  opts.n_trees = n_trees;
  opts.max_depth = max_depth;
  opts.criterion = SplitCriterion::Gini;
  opts.seed = seed;
  RandomForest rf;
  rf.fit(d.values, d.labels, opts);
  ScoreTable t{ScoreMethod::RF, {}};
  for (std::size_t j = 0; j < d.n_features(); ++j) t.entries.push_back({d.feature_ids[j], rf.feature_importances()[j]});
  return t;
}

std::vector<std::string> select_k_best(const ScoreTable& s, std::size_t k) {
  if (k > s.entries.size())
    throw ValidationError("k = " + std::to_string(k) + " exceeds " + std::to_string(s.entries.size()) + " features");
  std::vector<const ScoreEntry*> sorted;
  for (const auto& e : s.entries) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const ScoreEntry* a, const ScoreEntry* b) {
    if (a->score != b->score) return a->score > b->score;
    return a->feature_id < b->feature_id;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(sorted[i]->feature_id);
  return out;
}

SelectionResult venn_partition(const std::vector<std::vector<std::string>>& per_method) {
  if (per_method.size() < 2) throw ValidationError("Venn partition needs at least two sets");
  SelectionResult r;
  r.per_method = per_method;
  std::unordered_set<std::string> seen;
  for (const auto& set : per_method)
    for (const auto& id : set)
      if (seen.insert(id).second) r.unique.push_back(id);

  std::vector<std::unordered_set<std::string>> sets;
  for (const auto& s : per_method) sets.emplace_back(s.begin(), s.end());
  std::unordered_set<std::string> emitted;
  for (const auto& id : per_method[0]) {
    bool everywhere = true;
    for (std::size_t k = 1; k < sets.size() && everywhere; ++k) everywhere = sets[k].count(id) > 0;
    if (everywhere && emitted.insert(id).second) r.common.push_back(id);
  }
  r.union_minus_common = r.unique.size() - r.common.size();
  return r;
}

AucFilterResult auc_filter(const LabeledDataset& train, const LabeledDataset& test,
                           const std::vector<std::string>& candidates, const AucFilterOptions& opts) {
  if (candidates.empty()) throw ValidationError("AUC filter: empty candidate list");
  AucFilterResult result;
  std::unordered_set<std::string> done;
  for (const auto& id : candidates) {
    if (!done.insert(id).second) continue;
    const std::size_t j_train = train.feature_index(id);
    const std::size_t j_test = test.feature_index(id);

    Matrix x_train(train.n_samples(), 1);
    for (std::size_t i = 0; i < train.n_samples(); ++i) x_train(i, 0) = train.values(i, j_train);
    Matrix x_test(test.n_samples(), 1);
    for (std::size_t i = 0; i < test.n_samples(); ++i) x_test(i, 0) = test.values(i, j_test);

    ForestOptions fo;
    fo.n_trees = opts.n_trees;
    fo.max_depth = opts.max_depth;
    fo.criterion = SplitCriterion::Gini;
    fo.seed = derive_seed(opts.seed, id);
    RandomForest rf;
    rf.fit(x_train, train.labels, fo);

    FeatureAuc fa;
    fa.feature_id = id;
    fa.train_auc = roc_auc(train.labels, rf.predict_proba(x_train));
    fa.test_auc = roc_auc(test.labels, rf.predict_proba(x_test));
    fa.kept = fa.train_auc > opts.threshold && fa.test_auc > opts.threshold;
    if (fa.kept) result.kept.push_back(id);
    result.evaluated.push_back(std::move(fa));
  }
  return result;
}

}  // namespace omicq
