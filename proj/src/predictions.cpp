#include "dermfuse/predictions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include "dermfuse/error.hpp"
#include "dermfuse/textio.hpp"

namespace dermfuse {

namespace {

const std::vector<std::string> kPredictionHeader = {"image_id", "p_benign", "p_malignant"};
const std::vector<std::string> kLabelHeader = {"image_id", "label"};
constexpr std::size_t kMaxReportedIds = 10;

std::string list_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < kMaxReportedIds; ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  if (ids.size() > kMaxReportedIds) {
    out += " (+" + std::to_string(ids.size() - kMaxReportedIds) + " more)";
  }
  return out;
}

}  // namespace

ClassProbs validate_probs(double benign, double malignant) {
  if (!(benign >= 0.0 && benign <= 1.0) || !(malignant >= 0.0 && malignant <= 1.0)) {
    throw ValidationError("probability outside [0,1]: (" + textio::format_double(benign) +
                          ", " + textio::format_double(malignant) + ")");
  }
  const double sum = benign + malignant;
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw ValidationError("probabilities sum to " + textio::format_double(sum) +
                          ", expected 1");
  }
  if (sum == 1.0) return {benign, malignant};
  const double m = malignant / sum;
  return {1.0 - m, m};
}

PredictionSet parse_predictions(std::string_view contents, std::string model_id,
                                std::string_view source) {
  auto table = textio::parse_table(contents, source, kPredictionHeader);
  PredictionSet set;
  set.model_id = std::move(model_id);
  set.rows.reserve(table.rows.size());
  std::unordered_set<std::string> seen;
  for (auto& row : table.rows) {
    auto& id = row.fields[0];
    if (id.empty()) throw ParseError(std::string(source), row.line, "empty image_id");
    auto benign = textio::parse_double(row.fields[1]);
    auto malignant = textio::parse_double(row.fields[2]);
    if (!benign || !malignant) {
      throw ParseError(std::string(source), row.line, "probabilities must be decimal literals");
    }
    ClassProbs probs;
    try {
      probs = validate_probs(*benign, *malignant);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(source) + ":" + std::to_string(row.line) + ": " +
                            e.what());
    }
    if (!seen.insert(id).second) {
      throw ValidationError(std::string(source) + ":" + std::to_string(row.line) +
                            ": duplicate image_id " + id);
    }
    set.rows.push_back({std::move(id), probs});
  }
  return set;
}

PredictionSet load_predictions(const std::filesystem::path& path, std::string model_id) {
  return parse_predictions(textio::read_file(path), std::move(model_id), path.string());
}

PredictionSet load_predictions(const std::filesystem::path& path) {
  return load_predictions(path, path.stem().string());
}

LabelSet parse_labels(std::string_view contents, std::string_view source) {
  auto table = textio::parse_table(contents, source, kLabelHeader);
  LabelSet labels;
  labels.rows.reserve(table.rows.size());
  std::unordered_set<std::string> seen;
  for (auto& row : table.rows) {
    auto& id = row.fields[0];
    if (id.empty()) throw ParseError(std::string(source), row.line, "empty image_id");
    auto label = parse_class_label(row.fields[1]);
    if (!label) {
      throw ValidationError(std::string(source) + ":" + std::to_string(row.line) +
                            ": unknown label '" + row.fields[1] + "'");
    }
    if (!seen.insert(id).second) {
      throw ValidationError(std::string(source) + ":" + std::to_string(row.line) +
                            ": duplicate image_id " + id);
    }
    labels.rows.push_back({std::move(id), *label});
  }
  return labels;
}

LabelSet load_labels(const std::filesystem::path& path) {
  return parse_labels(textio::read_file(path), path.string());
}

std::string format_predictions(const PredictionSet& set) {
  std::string out = "image_id,p_benign,p_malignant\n";
  for (const auto& row : set.rows) {
    out += row.image_id + ',' + textio::format_double(row.probs.benign) + ',' +
           textio::format_double(row.probs.malignant) + '\n';
  }
  return out;
}

std::string format_labels(const LabelSet& labels) {
  std::string out = "image_id,label\n";
  for (const auto& row : labels.rows) {
    out += row.image_id + ',' + std::string(to_string(row.label)) + '\n';
  }
  return out;
}

AlignedDataset::AlignedDataset(std::vector<std::string> image_ids,
                               std::vector<std::string> model_ids,
                               std::vector<ClassProbs> probs,
                               std::optional<std::vector<ClassLabel>> labels)
    : image_ids_(std::move(image_ids)),
      model_ids_(std::move(model_ids)),
      probs_(std::move(probs)),
      labelled_(labels.has_value()) {
  if (labels) labels_ = std::move(*labels);
  if (model_ids_.empty()) throw ValidationError("aligned dataset needs at least one model");
  if (probs_.size() != image_ids_.size() * model_ids_.size()) {
    throw ValidationError("probability matrix does not match images x models");
  }
  if (labelled_ && labels_.size() != image_ids_.size()) {
    throw ValidationError("label count does not match image count");
  }
  if (!std::is_sorted(image_ids_.begin(), image_ids_.end()) ||
      std::adjacent_find(image_ids_.begin(), image_ids_.end()) != image_ids_.end()) {
    throw ValidationError("image ids must be unique and sorted");
  }
}

std::vector<double> AlignedDataset::scores(std::size_t model, ClassLabel cls) const {
  std::vector<double> out(n_images());
  for (std::size_t i = 0; i < n_images(); ++i) out[i] = at(i, model).of(cls);
  return out;
}

AlignedDataset AlignedDataset::subset(std::span<const std::string> keep_ids) const {
  std::set<std::string> keep(keep_ids.begin(), keep_ids.end());
  std::vector<std::string> missing;
  for (const auto& id : keep) {
    if (!std::binary_search(image_ids_.begin(), image_ids_.end(), id)) missing.push_back(id);
  }
  if (!missing.empty()) throw MismatchError("subset ids not in dataset: " + list_ids(missing));

  std::vector<std::string> ids;
  std::vector<ClassProbs> probs;
  std::vector<ClassLabel> labels;
  for (std::size_t i = 0; i < n_images(); ++i) {
    if (!keep.count(image_ids_[i])) continue;
    ids.push_back(image_ids_[i]);
    auto r = row(i);
    probs.insert(probs.end(), r.begin(), r.end());
    if (labelled_) labels.push_back(labels_[i]);
  }
  std::optional<std::vector<ClassLabel>> maybe_labels;
  if (labelled_) maybe_labels = std::move(labels);
  return AlignedDataset(std::move(ids), model_ids_, std::move(probs), std::move(maybe_labels));
}

namespace {

AlignedDataset align_impl(std::span<const PredictionSet> predsets, const LabelSet* labels) {
  if (predsets.empty()) throw ValidationError("align_dataset needs at least one prediction set");

  std::set<std::string> model_ids;
  for (const auto& set : predsets) {
    if (!model_ids.insert(set.model_id).second) {
      throw ValidationError("duplicate model id " + set.model_id);
    }
  }

  // Reference id set: the labels when present, otherwise the first prediction set.
  std::set<std::string> reference;
  std::string reference_name;
  if (labels) {
    for (const auto& row : labels->rows) reference.insert(row.image_id);
    if (reference.size() != labels->rows.size()) {
      throw ValidationError("duplicate image_id in labels");
    }
    reference_name = "labels";
  } else {
    for (const auto& row : predsets.front().rows) reference.insert(row.image_id);
    reference_name = "predictions[" + predsets.front().model_id + "]";
  }

  std::vector<std::map<std::string, ClassProbs>> by_id(predsets.size());
  for (std::size_t m = 0; m < predsets.size(); ++m) {
    for (const auto& row : predsets[m].rows) by_id[m].emplace(row.image_id, row.probs);
    if (by_id[m].size() != predsets[m].rows.size()) {
      throw ValidationError("duplicate image_id in predictions[" + predsets[m].model_id + "]");
    }
    std::vector<std::string> diff;
    for (const auto& id : reference) {
      if (!by_id[m].count(id)) diff.push_back(id);
    }
    for (const auto& [id, probs] : by_id[m]) {
      if (!reference.count(id)) diff.push_back(id);
    }
    if (!diff.empty()) {
      std::sort(diff.begin(), diff.end());
      throw MismatchError("image ids differ between " + reference_name + " and predictions[" +
                          predsets[m].model_id + "]: " + list_ids(diff));
    }
  }

  std::vector<std::string> image_ids(reference.begin(), reference.end());
  std::vector<std::string> ordered_models;
  for (const auto& set : predsets) ordered_models.push_back(set.model_id);

  std::vector<ClassProbs> probs;
  probs.reserve(image_ids.size() * predsets.size());
  for (const auto& id : image_ids) {
    for (const auto& table : by_id) probs.push_back(table.at(id));
  }

  std::optional<std::vector<ClassLabel>> aligned_labels;
  if (labels) {
    std::map<std::string, ClassLabel> label_of;
    for (const auto& row : labels->rows) label_of.emplace(row.image_id, row.label);
    aligned_labels.emplace();
    for (const auto& id : image_ids) aligned_labels->push_back(label_of.at(id));
  }
  return AlignedDataset(std::move(image_ids), std::move(ordered_models), std::move(probs),
                        std::move(aligned_labels));
}

}  // namespace

AlignedDataset align_dataset(std::span<const PredictionSet> predsets, const LabelSet& labels) {
  return align_impl(predsets, &labels);
}

AlignedDataset align_dataset(std::span<const PredictionSet> predsets) {
  return align_impl(predsets, nullptr);
}

}  // namespace dermfuse
