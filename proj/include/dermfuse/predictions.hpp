#pragma once

// Prediction and label ingestion, validation and strict alignment.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dermfuse/labels.hpp"

namespace dermfuse {

// Maximum allowed |p_benign + p_malignant - 1| before renormalization.
inline constexpr double kProbabilitySumTolerance = 1e-6;

struct PredictionRow {
  std::string image_id;
  ClassProbs probs;
};

struct PredictionSet {
  std::string model_id;
  std::vector<PredictionRow> rows;  // file order
};

struct LabelRow {
  std::string image_id;
  ClassLabel label;
};

struct LabelSet {
  std::vector<LabelRow> rows;
};

// Checks the range and sum invariants and returns the pair renormalized so that
// benign + malignant == 1 exactly. Throws ValidationError otherwise.
ClassProbs validate_probs(double benign, double malignant);

// Prediction file: header `image_id,p_benign,p_malignant`.
PredictionSet parse_predictions(std::string_view contents, std::string model_id,
                                std::string_view source = "<predictions>");
PredictionSet load_predictions(const std::filesystem::path& path, std::string model_id);
// Model id defaults to the file stem.
PredictionSet load_predictions(const std::filesystem::path& path);

// Label file: header `image_id,label`.
LabelSet parse_labels(std::string_view contents, std::string_view source = "<labels>");
LabelSet load_labels(const std::filesystem::path& path);

std::string format_predictions(const PredictionSet& set);
std::string format_labels(const LabelSet& labels);

// Predictions of every model on a common, lexicographically ordered set of images.
class AlignedDataset {
 public:
  // `labels` is either empty (unlabelled) or one per image.
  AlignedDataset(std::vector<std::string> image_ids, std::vector<std::string> model_ids,
                 std::vector<ClassProbs> probs, std::optional<std::vector<ClassLabel>> labels);

  std::size_t n_images() const { return image_ids_.size(); }
  std::size_t n_models() const { return model_ids_.size(); }
  bool has_labels() const { return labelled_; }

  const std::vector<std::string>& image_ids() const { return image_ids_; }
  const std::vector<std::string>& model_ids() const { return model_ids_; }
  const std::vector<ClassLabel>& labels() const { return labels_; }

  // Probabilities of every model for one image, in model order.
  std::span<const ClassProbs> row(std::size_t image) const {
    return {probs_.data() + image * n_models(), n_models()};
  }
  const ClassProbs& at(std::size_t image, std::size_t model) const {
    return probs_[image * n_models() + model];
  }

  // Malignant (or benign) score column of one model, in image order.
  std::vector<double> scores(std::size_t model, ClassLabel cls = ClassLabel::kMalignant) const;

  // Keeps only the listed images (ids must exist). Order stays lexicographic.
  AlignedDataset subset(std::span<const std::string> keep_ids) const;

  friend bool operator==(const AlignedDataset&, const AlignedDataset&) = default;

 private:
  std::vector<std::string> image_ids_;
  std::vector<std::string> model_ids_;
  std::vector<ClassProbs> probs_;  // n_images x n_models, row-major
  std::vector<ClassLabel> labels_;
  bool labelled_ = false;
};

// Strict join: every prediction set and the label set must cover exactly the same ids.
// Throws MismatchError naming up to 10 offending ids.
AlignedDataset align_dataset(std::span<const PredictionSet> predsets, const LabelSet& labels);
// Unlabelled variant used when only fusion is required.
AlignedDataset align_dataset(std::span<const PredictionSet> predsets);

}  // namespace dermfuse
