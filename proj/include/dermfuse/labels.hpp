#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace dermfuse {

enum class ClassLabel { kBenign, kMalignant };

constexpr std::string_view to_string(ClassLabel label) {
  return label == ClassLabel::kBenign ? "benign" : "malignant";
}

// Exact lowercase match; anything else is nullopt.
inline std::optional<ClassLabel> parse_class_label(std::string_view text) {
  if (text == "benign") return ClassLabel::kBenign;
  if (text == "malignant") return ClassLabel::kMalignant;
  return std::nullopt;
}

constexpr ClassLabel other(ClassLabel label) {
  return label == ClassLabel::kBenign ? ClassLabel::kMalignant : ClassLabel::kBenign;
}

// Probability pair emitted by one classifier for one image.
struct ClassProbs {
  double benign = 0.5;
  double malignant = 0.5;

  double of(ClassLabel label) const {
    return label == ClassLabel::kBenign ? benign : malignant;
  }
  friend bool operator==(const ClassProbs&, const ClassProbs&) = default;
};

}  // namespace dermfuse
