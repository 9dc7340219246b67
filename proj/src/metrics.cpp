#include "omicq/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "omicq/errors.hpp"
#include "omicq/tsv.hpp"

namespace omicq {

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> preds) {
  if (labels.size() != preds.size()) throw ValidationError("confusion: length mismatch");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    const int p = preds[i];
    if ((y != 0 && y != 1) || (p != 0 && p != 1)) throw ValidationError("confusion: entries must be 0 or 1");
    if (y == 1) (p == 1 ? cm.tp : cm.fn)++;
    else (p == 1 ? cm.fp : cm.tn)++;
  }
  return cm;
}

ClassificationScores classification_scores(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ValidationError("classification scores of an empty confusion matrix");
  ClassificationScores s;
  s.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  if (cm.tp + cm.fp > 0) s.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  else s.precision_undefined = true;
  if (cm.tp + cm.fn > 0) s.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  else s.recall_undefined = true;
  // 2PR/(P+R) reduces to 2tp/(2tp+fp+fn); the reduced form is exact in one division.
  if (cm.tp > 0) s.f1 = static_cast<double>(2 * cm.tp) / static_cast<double>(2 * cm.tp + cm.fp + cm.fn);
  else s.f1_undefined = true;
  return s;
}

ConfusionMatrix swap_positive_class(const ConfusionMatrix& cm) {
  return ConfusionMatrix{cm.tn, cm.fn, cm.tp, cm.fp};
}

AucRatio roc_auc_ratio(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw ValidationError("roc_auc: length mismatch");
  const std::size_t n = labels.size();
  std::uint64_t n_pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("roc_auc: labels must be 0 or 1");
    n_pos += static_cast<std::uint64_t>(y);
  }
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("roc_auc needs both classes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  // Doubled mid-ranks keep tied ranks integral: tied block [i, j) gets i + j + 1.
  std::uint64_t rank_sum_x2 = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t rank_x2 = i + j + 1;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) rank_sum_x2 += rank_x2;
    i = j;
  }
  AucRatio r;
  r.numerator = rank_sum_x2 - n_pos * (n_pos + 1);
  r.denominator = 2 * n_pos * n_neg;
  return r;
}

double roc_auc(std::span<const int> labels, std::span<const double> scores) {
  return roc_auc_ratio(labels, scores).value();
}

std::vector<RocPoint> roc_curve(std::span<const int> labels, std::span<const double> scores) {
  roc_auc_ratio(labels, scores);  // same preconditions
  double np = 0.0;
  for (int y : labels) np += y;
  const double nn = static_cast<double>(labels.size()) - np;
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> pts{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  double tp = 0.0, fp = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp) += 1.0;
      ++i;
    }
    pts.push_back({s, fp / nn, tp / np});
  }
  return pts;
}

std::string format_roc_curve(const std::vector<RocPoint>& pts) {
  std::string out = "threshold\tfpr\ttpr\n";
  for (const auto& p : pts)
    out += format_double(p.threshold) + "\t" + format_double(p.fpr) + "\t" + format_double(p.tpr) + "\n";
  return out;
}

}  // namespace omicq
