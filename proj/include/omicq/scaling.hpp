#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "omicq/matrix.hpp"

namespace omicq {

struct TrainTestSplit {
  std::vector<std::size_t> train;  // ascending row indices
  std::vector<std::size_t> test;
};

// Per-class seeded shuffle; round(n_class * test_fraction) rows of each class
// go to the test side. Throws when either side would miss a class.
TrainTestSplit stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed);

enum class ScalingKind { None, ZScore, MinMax };
ScalingKind scaling_from_string(const std::string& s);
std::string to_string(ScalingKind k);

// Column-wise affine map x -> (x - shift) / scale fitted on one matrix and
// applied to others. Constant columns get scale 1.
struct Scaler {
  ScalingKind kind = ScalingKind::None;
  std::vector<double> shift;
  std::vector<double> scale;

  static Scaler fit(const Matrix& x, ScalingKind kind);
  Matrix apply(const Matrix& x) const;
  std::vector<double> apply(std::span<const double> row) const;
};

}  // namespace omicq
