#include "dermfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "dermfuse/error.hpp"
#include "dermfuse/vendor_json.hpp"

namespace dermfuse::fusion {

namespace {

void require_models(std::span<const ClassProbs> pv) {
  if (pv.empty()) throw ValidationError("fusion needs at least one model");
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kHard: return "hard";
    case Method::kSoft: return "soft";
    case Method::kMax: return "max";
    case Method::kWeighted: return "weighted";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view text) {
  for (auto m : {Method::kHard, Method::kSoft, Method::kMax, Method::kWeighted}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

ClassLabel decide(double b_pred, double m_pred) {
  return m_pred >= b_pred ? ClassLabel::kMalignant : ClassLabel::kBenign;
}

ClassLabel hard_majority_vote(std::span<const ClassLabel> votes,
                              std::span<const ClassProbs> tie_break) {
  if (votes.empty()) throw ValidationError("hard vote needs at least one voter");
  const auto malignant = std::count(votes.begin(), votes.end(), ClassLabel::kMalignant);
  const auto benign = static_cast<std::ptrdiff_t>(votes.size()) - malignant;
  if (malignant != benign) return malignant > benign ? ClassLabel::kMalignant : ClassLabel::kBenign;
  if (tie_break.empty()) return ClassLabel::kMalignant;
  if (tie_break.size() != votes.size()) {
    throw ValidationError("tie-break probabilities must match the number of voters");
  }
  return soft_average(tie_break).label;
}

FusedPrediction hard_vote(std::span<const ClassProbs> pv) {
  require_models(pv);
  std::vector<ClassLabel> votes;
  votes.reserve(pv.size());
  for (const auto& p : pv) votes.push_back(decide(p.benign, p.malignant));
  const auto n = static_cast<double>(pv.size());
  const auto malignant = std::count(votes.begin(), votes.end(), ClassLabel::kMalignant);
  FusedPrediction out;
  out.m_pred = static_cast<double>(malignant) / n;
  out.b_pred = static_cast<double>(static_cast<std::ptrdiff_t>(pv.size()) - malignant) / n;
  out.label = hard_majority_vote(votes, pv);
  return out;
}

FusedPrediction soft_average(std::span<const ClassProbs> pv) {
  require_models(pv);
  double m = 0.0;
  double b = 0.0;
  for (const auto& p : pv) {
    m += p.malignant;
    b += p.benign;
  }
  const auto n = static_cast<double>(pv.size());
  FusedPrediction out;
  out.m_pred = m / n;
  out.b_pred = b / n;
  out.label = decide(out.b_pred, out.m_pred);
  return out;
}

FusedPrediction max_rule(std::span<const ClassProbs> pv) {
  require_models(pv);
  FusedPrediction out;
  out.m_pred = pv.front().malignant;
  out.b_pred = pv.front().benign;
  for (const auto& p : pv.subspan(1)) {
    out.m_pred = std::max(out.m_pred, p.malignant);
    out.b_pred = std::max(out.b_pred, p.benign);
  }
  out.label = decide(out.b_pred, out.m_pred);
  return out;
}

FusedPrediction weighted_average(std::span<const ClassProbs> pv, std::span<const double> weights) {
  require_models(pv);
  if (weights.size() != pv.size()) {
    throw ValidationError("weight count " + std::to_string(weights.size()) +
                          " does not match model count " + std::to_string(pv.size()));
  }
  // Equal weights cancel out of the ratio; using 1 keeps the result bit-identical to soft.
  const bool equal = std::adjacent_find(weights.begin(), weights.end(),
                                        std::not_equal_to<>()) == weights.end();
  double m = 0.0;
  double b = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
      throw ValidationError("weights must be finite and non-negative");
    }
    const double w = equal && weights[i] > 0.0 ? 1.0 : weights[i];
    m += w * pv[i].malignant;
    b += w * pv[i].benign;
    total += w;
  }
  if (!(total > 0.0)) throw ValidationError("all fusion weights are zero");
  FusedPrediction out;
  out.m_pred = m / total;
  out.b_pred = b / total;
  out.label = decide(out.b_pred, out.m_pred);
  return out;
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kAcc: return "acc";
    case Metric::kPre: return "pre";
    case Metric::kRec: return "rec";
    case Metric::kF1: return "f1";
    case Metric::kAuc: return "auc";
  }
  return "?";
}

MetricSelection parse_metric_selection(std::string_view text) {
  constexpr Metric kAll[] = {Metric::kAcc, Metric::kPre, Metric::kRec, Metric::kF1,
                             Metric::kAuc};
  bool chosen[5] = {};
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    auto token = text.substr(start, comma - start);
    bool matched = false;
    for (std::size_t i = 0; i < 5; ++i) {
      if (token == to_string(kAll[i])) {
        chosen[i] = true;
        matched = true;
      }
    }
    if (!matched) {
      throw ConfigError("unknown weight metric '" + std::string(token) +
                        "' (expected acc, pre, rec, f1 or auc)");
    }
    start = comma + 1;
  }
  MetricSelection selection;
  for (std::size_t i = 0; i < 5; ++i) {
    if (chosen[i]) selection.push_back(kAll[i]);
  }
  return selection;
}

std::string format_metric_selection(const MetricSelection& selection) {
  std::string out;
  for (std::size_t i = 0; i < selection.size(); ++i) {
    if (i) out += ',';
    out += to_string(selection[i]);
  }
  return out;
}

const MetricSelection& default_metric_selection() {
  static const MetricSelection kDefault = {Metric::kPre, Metric::kRec, Metric::kF1,
                                           Metric::kAuc};
  return kDefault;
}

double metric_value(const metrics::MetricSet& m, Metric metric) {
  switch (metric) {
    case Metric::kAcc: return m.acc;
    case Metric::kPre: return m.pre;
    case Metric::kRec: return m.rec;
    case Metric::kF1: return m.f1;
    case Metric::kAuc: return m.roc_auc;
  }
  return 0.0;
}

std::string_view to_string(WeightTransform transform) {
  return transform == WeightTransform::kTanh ? "tanh" : "raw";
}

std::optional<WeightTransform> parse_weight_transform(std::string_view text) {
  if (text == "tanh") return WeightTransform::kTanh;
  if (text == "raw") return WeightTransform::kRaw;
  return std::nullopt;
}

std::vector<double> WeightVector::for_models(std::span<const std::string> ids) const {
  if (weights.size() != ids.size()) {
    throw ConfigError("weight vector has " + std::to_string(weights.size()) +
                      " entries but the dataset has " + std::to_string(ids.size()) + " models");
  }
  if (model_ids.empty()) return weights;
  if (model_ids.size() != weights.size()) {
    throw ConfigError("weight vector model ids do not match its weights");
  }
  std::map<std::string, double> by_id;
  for (std::size_t i = 0; i < model_ids.size(); ++i) by_id.emplace(model_ids[i], weights[i]);
  std::vector<double> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ConfigError("no weight for model " + id);
    out.push_back(it->second);
  }
  return out;
}

WeightVector compute_weights(std::span<const metrics::MetricSet> metric_sets,
                             const MetricSelection& selection, WeightTransform transform,
                             std::vector<std::string> model_ids) {
  if (metric_sets.empty()) throw ValidationError("weights need at least one metric set");
  if (selection.empty()) throw ValidationError("weight metric selection is empty");
  if (!model_ids.empty() && model_ids.size() != metric_sets.size()) {
    throw ValidationError("model id count does not match metric set count");
  }
  WeightVector w;
  w.model_ids = std::move(model_ids);
  w.selection = selection;
  w.transform = transform;
  w.weights.reserve(metric_sets.size());
  for (const auto& m : metric_sets) {
    double sum = 0.0;
    for (auto metric : selection) {
      const double value = metric_value(m, metric);
      if (!(value >= 0.0 && value <= 1.0)) {
        throw ValidationError("metric " + std::string(to_string(metric)) + " = " +
                              std::to_string(value) + " outside [0,1]");
      }
      sum += transform == WeightTransform::kTanh ? std::tanh(value) : value;
    }
    w.weights.push_back(sum);
  }
  return w;
}

WeightVector tanh_weights(std::span<const metrics::MetricSet> metric_sets,
                          const MetricSelection& selection, std::vector<std::string> model_ids) {
  return compute_weights(metric_sets, selection, WeightTransform::kTanh, std::move(model_ids));
}

std::string format_weights(const WeightVector& w) {
  nlohmann::ordered_json doc;
  doc["metric_selection"] = nlohmann::ordered_json::array();
  for (auto metric : w.selection) doc["metric_selection"].push_back(std::string(to_string(metric)));
  doc["transform"] = std::string(to_string(w.transform));
  doc["split"] = w.split;
  doc["models"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < w.weights.size(); ++i) {
    nlohmann::ordered_json entry;
    entry["model_id"] = i < w.model_ids.size() ? w.model_ids[i] : std::to_string(i);
    entry["weight"] = w.weights[i];
    doc["models"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

WeightVector parse_weights(std::string_view text) {
  WeightVector w;
  try {
    auto doc = nlohmann::ordered_json::parse(text);
    std::string selection;
    for (const auto& metric : doc.at("metric_selection")) {
      if (!selection.empty()) selection += ',';
      selection += metric.get<std::string>();
    }
    w.selection = parse_metric_selection(selection);
    auto transform = parse_weight_transform(doc.at("transform").get<std::string>());
    if (!transform) throw ConfigError("unknown weight transform");
    w.transform = *transform;
    w.split = doc.value("split", std::string("calibration"));
    for (const auto& entry : doc.at("models")) {
      w.model_ids.push_back(entry.at("model_id").get<std::string>());
      w.weights.push_back(entry.at("weight").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed weights document: ") + e.what());
  }
  if (w.weights.empty()) throw ConfigError("weights document lists no models");
  return w;
}

std::vector<FusedPrediction> fuse_dataset(const AlignedDataset& ds, Method method,
                                          const WeightVector* weights) {
  std::vector<double> w;
  if (method == Method::kWeighted) {
    if (!weights) throw ConfigError("weighted fusion requires a weight vector");
    w = weights->for_models(ds.model_ids());
  }
  std::vector<FusedPrediction> out;
  out.reserve(ds.n_images());
  for (std::size_t i = 0; i < ds.n_images(); ++i) {
    auto row = ds.row(i);
    FusedPrediction fp;
    switch (method) {
      case Method::kHard: fp = hard_vote(row); break;
      case Method::kSoft: fp = soft_average(row); break;
      case Method::kMax: fp = max_rule(row); break;
      case Method::kWeighted: fp = weighted_average(row, w); break;
    }
    fp.image_id = ds.image_ids()[i];
    out.push_back(std::move(fp));
  }
  return out;
}

std::vector<ClassLabel> labels_of(std::span<const FusedPrediction> fused) {
  std::vector<ClassLabel> out;
  out.reserve(fused.size());
  for (const auto& f : fused) out.push_back(f.label);
  return out;
}

std::vector<double> malignant_scores(std::span<const FusedPrediction> fused) {
  std::vector<double> out;
  out.reserve(fused.size());
  for (const auto& f : fused) out.push_back(f.m_pred);
  return out;
}

}  // namespace dermfuse::fusion
