#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "omicq/adam.hpp"
#include "omicq/checkpoint.hpp"
#include "omicq/omics_io.hpp"
#include "omicq/scaling.hpp"
#include "omicq/statevector.hpp"

namespace omicq {

struct QnnConfig {
  std::size_t n_features = 32;
  std::size_t n_qubits = 5;
  std::size_t depth = 5;
  std::size_t dense_width = 32;
  std::uint64_t seed = 42;
  double learning_rate = 0.01;
  std::size_t batch_size = 16;
  std::size_t epochs = 100;
  double test_fraction = 0.2;
  ScalingKind scaling = ScalingKind::MinMax;

  // "qnn256", "qnn64" or "qnn32".
  static QnnConfig preset(const std::string& name);
  void validate() const;
};

Json to_json(const QnnConfig& c);
QnnConfig qnn_config_from_json(const Json& j, QnnConfig base = {});

struct QnnParams {
  std::vector<double> angles;  // (depth, n_qubits, {theta, phi, lambda})
  std::vector<double> w1;      // dense_width x n_qubits
  std::vector<double> b1;      // dense_width
  std::vector<double> w2;      // dense_width
  double b2 = 0.0;

  static QnnParams zeros(const QnnConfig& c);
  static QnnParams random(const QnnConfig& c, std::uint64_t seed);

  RotParams rot(std::size_t layer, std::size_t qubit, std::size_t n_qubits) const;
  std::vector<double> flat() const;
  void set_flat(std::span<const double> v);
  std::size_t size() const { return angles.size() + w1.size() + b1.size() + w2.size() + 1; }
  friend bool operator==(const QnnParams&, const QnnParams&) = default;
};

// Circuit part alone: per-qubit <Z> after encoding x and running the ansatz.
std::vector<double> circuit_readout(const QnnConfig& c, const QnnParams& p, std::span<const double> x);

// x is the already-scaled feature vector.
double forward(const QnnConfig& c, const QnnParams& p, std::span<const double> x);

inline constexpr double kProbClamp = 1e-7;
double bce_loss(std::span<const double> preds, std::span<const int> labels);

// Mean clamped-BCE gradient over the rows of x: head by backprop, circuit
// angles by the parameter-shift rule.
QnnParams gradients(const QnnConfig& c, const QnnParams& p, const Matrix& x, std::span<const int> y);

void adam_step(QnnParams& p, const QnnParams& grads, AdamState& state, const AdamOptions& opts = {});

struct EpochRecord {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

std::string format_history(const TrainHistory& h);

struct QnnModel {
  QnnConfig config;
  QnnParams params;
  Scaler scaler;
  std::vector<std::string> feature_ids;
};

// Raw (unscaled) rows in, probabilities out.
std::vector<double> predict_proba(const QnnModel& m, const Matrix& x);
std::vector<int> predict_labels(const QnnModel& m, const Matrix& x, double threshold = 0.5);

struct QnnTrainResult {
  QnnModel model;
  TrainHistory history;
  TrainTestSplit split;
};

QnnTrainResult train(const QnnConfig& c, const LabeledDataset& d);

Json to_json(const QnnModel& m);
QnnModel qnn_model_from_json(const Json& j);

}  // namespace omicq
