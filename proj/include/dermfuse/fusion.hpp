#pragma once

// Decision-level fusion of per-model class probabilities and metric-driven weights.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dermfuse/labels.hpp"
#include "dermfuse/metrics.hpp"
#include "dermfuse/predictions.hpp"

namespace dermfuse::fusion {

struct FusedPrediction {
  std::string image_id;
  double m_pred = 0.0;
  double b_pred = 0.0;
  ClassLabel label = ClassLabel::kMalignant;

  friend bool operator==(const FusedPrediction&, const FusedPrediction&) = default;
};

enum class Method { kHard, kSoft, kMax, kWeighted };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view text);

// argmax(b_pred, m_pred); an exact tie resolves to malignant.
ClassLabel decide(double b_pred, double m_pred);

// Modal label. On a tie the soft average of `tie_break` decides when supplied
// (one pair per voter); otherwise the tie resolves to malignant.
ClassLabel hard_majority_vote(std::span<const ClassLabel> votes,
                              std::span<const ClassProbs> tie_break = {});

// Hard vote over each model's argmax label. Scores are the vote fractions.
FusedPrediction hard_vote(std::span<const ClassProbs> pv);

FusedPrediction soft_average(std::span<const ClassProbs> pv);

// Per-class maxima; the two scores need not sum to 1.
FusedPrediction max_rule(std::span<const ClassProbs> pv);

// Throws ValidationError on length mismatch, negative or non-finite weights, or all-zero weights.
FusedPrediction weighted_average(std::span<const ClassProbs> pv, std::span<const double> weights);

enum class Metric { kAcc, kPre, kRec, kF1, kAuc };

// Unique metrics in canonical order (acc, pre, rec, f1, auc).
using MetricSelection = std::vector<Metric>;

std::string_view to_string(Metric metric);
// Comma list such as "pre,rec,f1,auc". Throws ConfigError on unknown or empty input.
MetricSelection parse_metric_selection(std::string_view text);
std::string format_metric_selection(const MetricSelection& selection);
const MetricSelection& default_metric_selection();  // pre, rec, f1, auc
double metric_value(const metrics::MetricSet& m, Metric metric);

// How the selected metrics turn into a weight.
enum class WeightTransform {
  kTanh,  // sum of tanh(metric)
  kRaw,   // sum of the metric values themselves (e.g. plain accuracy weights)
};

std::string_view to_string(WeightTransform transform);
std::optional<WeightTransform> parse_weight_transform(std::string_view text);

struct WeightVector {
  std::vector<std::string> model_ids;
  std::vector<double> weights;
  MetricSelection selection;
  WeightTransform transform = WeightTransform::kTanh;
  // Which labelled split the metrics came from, recorded for auditability.
  std::string split = "calibration";

  // Weights reordered to match `model_ids`; throws ConfigError on any mismatch.
  std::vector<double> for_models(std::span<const std::string> model_ids) const;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

// Weight of model i is the sum over the selection of tanh(metric). Metrics outside
// [0, 1] raise ValidationError.
WeightVector tanh_weights(std::span<const metrics::MetricSet> metric_sets,
                          const MetricSelection& selection = default_metric_selection(),
                          std::vector<std::string> model_ids = {});

WeightVector compute_weights(std::span<const metrics::MetricSet> metric_sets,
                             const MetricSelection& selection, WeightTransform transform,
                             std::vector<std::string> model_ids = {});

// Structured text keyed by model id, with the metric selection recorded.
std::string format_weights(const WeightVector& w);
WeightVector parse_weights(std::string_view text);

// Applies one rule per image; output order matches the dataset.
// The weighted method requires `weights` (ConfigError otherwise).
std::vector<FusedPrediction> fuse_dataset(const AlignedDataset& ds, Method method,
                                          const WeightVector* weights = nullptr);

std::vector<ClassLabel> labels_of(std::span<const FusedPrediction> fused);
std::vector<double> malignant_scores(std::span<const FusedPrediction> fused);

}  // namespace dermfuse::fusion
