#include "omicq/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "omicq/errors.hpp"
#include "omicq/tsv.hpp"

namespace omicq {

int DecisionTree::predict(std::span<const double> x) const {
  int i = 0;
  while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<std::size_t>(i)].vote;
}

int DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

namespace {

double impurity(double w0, double w1, SplitCriterion c) {
  const double w = w0 + w1;
  if (w <= 0.0) return 0.0;
  const double p0 = w0 / w;
  const double p1 = w1 / w;
  if (c == SplitCriterion::Gini) return 1.0 - p0 * p0 - p1 * p1;
  double h = 0.0;
  if (p0 > 0.0) h -= p0 * std::log2(p0);
  if (p1 > 0.0) h -= p1 * std::log2(p1);
  return h;
}

struct TreeBuilder {
  const Matrix& x;
  std::span<const int> y;
  const std::vector<double>& weight;
  const ForestOptions& opts;
  std::size_t max_features;
  double root_weight = 0.0;
  std::vector<double>& importance;
  std::vector<TreeNode>& nodes;
  std::vector<std::pair<double, std::size_t>> scratch;

  int grow(std::vector<std::size_t>& idx, int depth, std::uint64_t node_seed) {
    double w0 = 0.0, w1 = 0.0;
    for (auto i : idx) (y[i] == 1 ? w1 : w0) += weight[i];
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{});
    nodes.back().vote = w1 > w0 ? 1 : 0;

    const double w = w0 + w1;
    const double parent_impurity = impurity(w0, w1, opts.criterion);
    if (parent_impurity <= 0.0 || (opts.max_depth >= 0 && depth >= opts.max_depth) ||
        w < static_cast<double>(opts.min_samples_split))
      return id;

    // Candidate features drawn from a generator keyed by the node's path, so a
    // node's choices do not depend on how much of the tree was grown before it.
    const std::size_t p = x.cols();
    std::vector<std::size_t> features(p);
    std::iota(features.begin(), features.end(), 0);
    const std::size_t m = std::min(max_features, p);
    if (m < p)
      for (std::size_t k = 0; k < m; ++k) std::swap(features[k], features[k + mix64(node_seed + k + 1) % (p - k)]);

    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t f = features[k];
      scratch.clear();
      for (auto i : idx) scratch.emplace_back(x(i, f), i);
      // With a single column the index list stays sorted through every partition.
      if (p > 1) std::sort(scratch.begin(), scratch.end());
      double l0 = 0.0, l1 = 0.0;
      for (std::size_t s = 0; s + 1 < scratch.size(); ++s) {
        const auto i = scratch[s].second;
        (y[i] == 1 ? l1 : l0) += weight[i];
        if (scratch[s].first == scratch[s + 1].first) continue;
        const double lw = l0 + l1;
        const double rw = w - lw;
        const double child = (lw * impurity(l0, l1, opts.criterion) + rw * impurity(w0 - l0, w1 - l1, opts.criterion)) / w;
        const double gain = parent_impurity - child;
        if (gain > best_gain + 1e-15) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          const double a = scratch[s].first;
          const double b = scratch[s + 1].first;
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) (x(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right).push_back(i);
    importance[static_cast<std::size_t>(best_feature)] += (w / root_weight) * best_gain;
    idx.clear();
    idx.shrink_to_fit();

    nodes[static_cast<std::size_t>(id)].feature = best_feature;
    nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
    const int l = grow(left, depth + 1, mix64(node_seed * 2 + 1));
    nodes[static_cast<std::size_t>(id)].left = l;
    const int r = grow(right, depth + 1, mix64(node_seed * 2 + 2));
    nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

}  // namespace

void RandomForest::fit(const Matrix& x, std::span<const int> y, const ForestOptions& opts) {
  if (x.rows() != y.size()) throw ValidationError("forest: label count does not match rows");
  if (x.rows() == 0 || x.cols() == 0) throw ValidationError("forest: empty training matrix");
  if (opts.n_trees == 0) throw ValidationError("forest: need at least one tree");
  bool has0 = false, has1 = false;
  for (int v : y) (v == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw ValidationError("forest: training data holds a single class");

  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  n_features_ = p;
  const std::size_t max_features =
      opts.max_features > 0 ? opts.max_features
                            : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))));

  trees_.assign(opts.n_trees, DecisionTree{});
  std::vector<double> total(p, 0.0);
  for (std::size_t t = 0; t < opts.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(opts.seed, static_cast<std::uint64_t>(t));
    std::vector<double> weight(n, 0.0);
    if (opts.bootstrap) {
      Rng rng(tree_seed);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t k = 0; k < n; ++k) weight[pick(rng)] += 1.0;
    } else {
      std::fill(weight.begin(), weight.end(), 1.0);
    }
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (weight[i] > 0.0) idx.push_back(i);
    if (p == 1)
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return x(a, 0) < x(b, 0) || (x(a, 0) == x(b, 0) && a < b);
      });

    std::vector<double> importance(p, 0.0);
    TreeBuilder builder{x, y, weight, opts, max_features, static_cast<double>(n), importance, trees_[t].nodes(), {}};
    builder.grow(idx, 0, mix64(tree_seed ^ 0xA5A5A5A5ULL));
    for (std::size_t f = 0; f < p; ++f) total[f] += importance[f];
  }

  importances_.assign(p, 0.0);
  double sum = 0.0;
  for (std::size_t f = 0; f < p; ++f) {
    importances_[f] = total[f] / static_cast<double>(opts.n_trees);
    sum += importances_[f];
  }
  if (sum > 0.0)
    for (auto& v : importances_) v /= sum;
}

double RandomForest::predict_proba(std::span<const double> x) const {
  if (x.size() != n_features_) throw ValidationError("forest: feature width mismatch");
  std::size_t votes = 0;
  for (const auto& t : trees_) votes += static_cast<std::size_t>(t.predict(x));
  return static_cast<double>(votes) / static_cast<double>(trees_.size());
}

std::vector<double> RandomForest::predict_proba(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_proba(x.row(i));
  return out;
}

}  // namespace omicq
