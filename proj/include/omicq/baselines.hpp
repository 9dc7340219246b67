#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "omicq/checkpoint.hpp"
#include "omicq/forest.hpp"
#include "omicq/omics_io.hpp"
#include "omicq/scaling.hpp"

namespace omicq {

enum class BaselineKind { LR, MLP, RF };
std::string to_string(BaselineKind k);
BaselineKind baseline_kind_from_string(const std::string& s);

struct LrOptions {
  double C = 0.1;
  std::size_t iters = 5000;
  double lr = 0.1;
  double tol = 1e-6;  // stop once the gradient norm falls below this
  ScalingKind scaling = ScalingKind::ZScore;
};

struct MlpOptions {
  std::size_t hidden = 64;
  std::size_t iters = 2000;
  double lr = 0.01;
  std::uint64_t seed = 42;
  ScalingKind scaling = ScalingKind::ZScore;
};

struct RfOptions {
  std::size_t n_trees = 100;
  int max_depth = -1;
  SplitCriterion criterion = SplitCriterion::Entropy;
  std::uint64_t seed = 42;
};

struct BaselineModel {
  BaselineKind kind = BaselineKind::LR;
  std::vector<std::string> feature_ids;
  Scaler scaler;
  Json options;  // snapshot of the trainer options

  // LR
  std::vector<double> w;
  double b = 0.0;
  // MLP: hidden x n_features first layer, then a single sigmoid unit
  std::size_t hidden = 0;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
  // RF
  RandomForest forest;

  std::size_t n_features() const { return feature_ids.size(); }
};

BaselineModel lr_train(const LabeledDataset& d, const LrOptions& opts = {});
BaselineModel mlp_train(const LabeledDataset& d, const MlpOptions& opts = {});
BaselineModel rf_train(const LabeledDataset& d, const RfOptions& opts = {});

// Probability of LUAD for each raw row.
std::vector<double> baseline_predict(const BaselineModel& m, const Matrix& x);

// MLP internals on already-scaled rows; parameters flattened as w1, b1, w2, b2.
double mlp_forward(const BaselineModel& m, std::span<const double> x_scaled);
std::vector<double> mlp_flat(const BaselineModel& m);
void mlp_set_flat(BaselineModel& m, std::span<const double> v);
std::pair<double, std::vector<double>> mlp_loss_gradient(const BaselineModel& m, const Matrix& x_scaled,
                                                          std::span<const int> y);

Json to_json(const BaselineModel& m);
BaselineModel baseline_model_from_json(const Json& j);

}  // namespace omicq
