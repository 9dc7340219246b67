#include "omicq/scaling.hpp"

#include <algorithm>
#include <cmath>

#include "omicq/errors.hpp"
#include "omicq/tsv.hpp"

namespace omicq {

TrainTestSplit stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test fraction must lie in (0, 1)");
  Rng rng(seed);
  TrainTestSplit split;
  for (int c = 0; c <= 1; ++c) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) rows.push_back(i);
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(rows.size()) * test_fraction));
    if (n_test == 0 || n_test >= rows.size())
      throw ValidationError("degenerate split: class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                            " samples");
    split.test.insert(split.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

ScalingKind scaling_from_string(const std::string& s) {
  if (s == "none") return ScalingKind::None;
  if (s == "zscore") return ScalingKind::ZScore;
  if (s == "minmax") return ScalingKind::MinMax;
  throw ValidationError("unknown scaling '" + s + "'");
}

std::string to_string(ScalingKind k) {
  switch (k) {
    case ScalingKind::None: return "none";
    case ScalingKind::ZScore: return "zscore";
    case ScalingKind::MinMax: return "minmax";
  }
  return "none";
}

Scaler Scaler::fit(const Matrix& x, ScalingKind kind) {
  Scaler s;
  s.kind = kind;
  const std::size_t p = x.cols();
  s.shift.assign(p, 0.0);
  s.scale.assign(p, 1.0);
  if (kind == ScalingKind::None || x.rows() == 0) return s;
  for (std::size_t j = 0; j < p; ++j) {
    if (kind == ScalingKind::ZScore) {
      double mean = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
      mean /= static_cast<double>(x.rows());
      double ss = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
      const double sd = std::sqrt(ss / static_cast<double>(x.rows()));
      s.shift[j] = mean;
      s.scale[j] = sd > 0.0 ? sd : 1.0;
    } else {
      double lo = x(0, j), hi = x(0, j);
      for (std::size_t i = 1; i < x.rows(); ++i) {
        lo = std::min(lo, x(i, j));
        hi = std::max(hi, x(i, j));
      }
      s.shift[j] = lo;
      s.scale[j] = hi > lo ? hi - lo : 1.0;
    }
  }
  return s;
}

Matrix Scaler::apply(const Matrix& x) const {
  if (x.cols() != shift.size()) throw ValidationError("scaler: feature width mismatch");
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - shift[j]) / scale[j];
  return out;
}

std::vector<double> Scaler::apply(std::span<const double> row) const {
  if (row.size() != shift.size()) throw ValidationError("scaler: feature width mismatch");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - shift[j]) / scale[j];
  return out;
}

}  // namespace omicq
