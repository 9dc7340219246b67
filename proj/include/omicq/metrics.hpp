#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace omicq {

// Positive class is label 1 (LUAD).
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;
  std::uint64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> preds);

struct ClassificationScores {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the corresponding denominator was zero and the value reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

ClassificationScores classification_scores(const ConfusionMatrix& cm);

// Same matrix seen with label 0 (LUSC) as the positive class.
ConfusionMatrix swap_positive_class(const ConfusionMatrix& cm);

// AUC as an exact ratio: numerator counts 2 per correctly ordered
// positive/negative pair and 1 per tie; denominator is 2 * n_pos * n_neg.
struct AucRatio {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;
  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
};

AucRatio roc_auc_ratio(std::span<const int> labels, std::span<const double> scores);
double roc_auc(std::span<const int> labels, std::span<const double> scores);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

// One point per distinct score (descending), preceded by the (0, 0) corner.
std::vector<RocPoint> roc_curve(std::span<const int> labels, std::span<const double> scores);
std::string format_roc_curve(const std::vector<RocPoint>& pts);

}  // namespace omicq
