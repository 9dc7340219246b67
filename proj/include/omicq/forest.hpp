#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "omicq/matrix.hpp"

namespace omicq {

enum class SplitCriterion { Gini, Entropy };

struct ForestOptions {
  std::size_t n_trees = 100;
  int max_depth = -1;  // negative: grow until pure
  SplitCriterion criterion = SplitCriterion::Gini;
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  // 0: floor(sqrt(p)), at least 1
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int vote = 0;  // majority class of the (bootstrap-weighted) node samples
};

class DecisionTree {
 public:
  int predict(std::span<const double> x) const;
  int depth() const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& nodes() { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

// Bagged CART ensemble. predict_proba is the fraction of trees voting for
// class 1; feature importances are mean impurity decrease, normalised to 1.
class RandomForest {
 public:
  void fit(const Matrix& x, std::span<const int> y, const ForestOptions& opts);

  double predict_proba(std::span<const double> x) const;
  std::vector<double> predict_proba(const Matrix& x) const;

  const std::vector<double>& feature_importances() const { return importances_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::vector<DecisionTree>& trees() { return trees_; }
  std::size_t n_features() const { return n_features_; }
  void set_n_features(std::size_t n) { n_features_ = n; }
  void set_importances(std::vector<double> v) { importances_ = std::move(v); }

 private:
  std::vector<DecisionTree> trees_;
  std::vector<double> importances_;
  std::size_t n_features_ = 0;
};

}  // namespace omicq
