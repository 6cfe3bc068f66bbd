#include "dermfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dermfuse/error.hpp"

namespace dermfuse::metrics {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw ValidationError("length mismatch: " + std::to_string(a) + " vs " +
                          std::to_string(b));
  }
  if (a == 0) throw ValidationError("metrics need at least one row");
}

}  // namespace

ConfusionCounts confusion_counts(std::span<const ClassLabel> predicted,
                                 std::span<const ClassLabel> actual, ClassLabel positive) {
  check_lengths(predicted.size(), actual.size());
  ConfusionCounts cm;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool pred_pos = predicted[i] == positive;
    const bool true_pos = actual[i] == positive;
    if (pred_pos && true_pos) {
      ++cm.tp;
    } else if (pred_pos) {
      ++cm.fp;
    } else if (true_pos) {
      ++cm.fn;
    } else {
      ++cm.tn;
    }
  }
  return cm;
}

double f1_score(double precision, double recall) {
  const double den = precision + recall;
  return den > 0.0 ? 2.0 * precision * recall / den : 0.0;
}

MetricSet metric_set(const ConfusionCounts& cm, double auc) {
  if (cm.total() == 0) throw ValidationError("metric_set on empty confusion counts");
  MetricSet m;
  m.acc = ratio(cm.tp + cm.tn, cm.total());
  m.pre = ratio(cm.tp, cm.tp + cm.fp);
  m.rec = ratio(cm.tp, cm.tp + cm.fn);
  // 2TP / (2TP + FP + FN); identical to the harmonic mean when both are defined.
  m.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn);
  m.roc_auc = auc;
  return m;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const ClassLabel> actual,
                   ClassLabel positive) {
  check_lengths(scores.size(), actual.size());
  const auto n = scores.size();
  const auto n_pos = static_cast<std::size_t>(
      std::count(actual.begin(), actual.end(), positive));
  const auto n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw ValidationError("ROC curve undefined: both classes must be present");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw ValidationError("ROC scores must be finite");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < n) {
    const double threshold = scores[order[i]];
    // Equal scores move together; the trapezoid over the group gives ties half credit.
    while (i < n && scores[order[i]] == threshold) {
      if (actual[order[i]] == positive) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    curve.push_back({threshold, ratio(fp, n_neg), ratio(tp, n_pos)});
  }
  return curve;
}

double trapezoid_area(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) * 0.5;
  }
  return area;
}

double roc_auc(std::span<const double> scores, std::span<const ClassLabel> actual,
               ClassLabel positive) {
  return trapezoid_area(roc_curve(scores, actual, positive));
}

}  // namespace dermfuse::metrics
