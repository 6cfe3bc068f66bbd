#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dermfuse/labels.hpp"

namespace dermfuse::metrics {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// All values are fractions in [0, 1]; percent rendering happens at the report layer.
struct MetricSet {
  double acc = 0.0;
  double pre = 0.0;
  double rec = 0.0;
  double f1 = 0.0;
  double roc_auc = 0.0;

  friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

struct RocPoint {
  double threshold;  // +inf for the (0, 0) endpoint
  double fpr;
  double tpr;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

using RocCurve = std::vector<RocPoint>;

// Throws ValidationError on length mismatch or empty input.
ConfusionCounts confusion_counts(std::span<const ClassLabel> predicted,
                                 std::span<const ClassLabel> actual,
                                 ClassLabel positive = ClassLabel::kMalignant);

// Zero denominators yield 0 for PRE, REC and F1. Throws when the counts are empty.
MetricSet metric_set(const ConfusionCounts& cm, double auc);

// Harmonic mean of precision and recall, 0 when both are 0.
double f1_score(double precision, double recall);

// Points sorted by descending threshold: the (+inf, 0, 0) endpoint first, then one point
// per distinct score. The lowest score always lands on (1, 1).
// Throws ValidationError unless both classes are present.
RocCurve roc_curve(std::span<const double> scores, std::span<const ClassLabel> actual,
                   ClassLabel positive = ClassLabel::kMalignant);

// Trapezoidal area under roc_curve.
double roc_auc(std::span<const double> scores, std::span<const ClassLabel> actual,
               ClassLabel positive = ClassLabel::kMalignant);

double trapezoid_area(const RocCurve& curve);

}  // namespace dermfuse::metrics
