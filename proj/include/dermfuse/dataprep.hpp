#pragma once

// Dataset manifests: unknown-label removal, majority-class downsampling,
// merging and stratified k-fold assignment.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dermfuse::dataprep {

enum class Diagnosis { kBenign, kMalignant, kUnknown };

std::string_view to_string(Diagnosis d);
std::optional<Diagnosis> parse_diagnosis(std::string_view text);

struct ManifestRecord {
  std::string image_id;
  std::string path;
  Diagnosis label = Diagnosis::kUnknown;
  std::string source;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;

  std::size_t count(Diagnosis label) const;
  std::size_t count(std::string_view source, Diagnosis label) const;
  // Sources in order of first appearance.
  std::vector<std::string> sources() const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// Manifest file: header `image_id,path,label,source`.
DatasetManifest parse_manifest(std::string_view contents, std::string_view source = "<manifest>");
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string format_manifest(const DatasetManifest& m);

// Records whose label is not unknown, in input order.
DatasetManifest drop_unknown(const DatasetManifest& m);

// Keeps the minority class and a uniform seeded sample of the majority class of the
// same size. Output keeps input order. Throws ValidationError when a class is missing
// or unknown labels remain.
DatasetManifest downsample_balance(const DatasetManifest& m, std::uint64_t seed);

// Concatenation; throws ValidationError on an image id collision.
DatasetManifest merge_manifests(const std::vector<DatasetManifest>& ms);

// drop_unknown, then downsample_balance on each source separately, then merge.
// Source s uses seed derive_seed(seed, index of s in first-appearance order).
DatasetManifest balance_by_source(const DatasetManifest& m, std::uint64_t seed);

struct FoldAssignment {
  int k = 0;
  std::vector<std::string> image_ids;  // manifest order
  std::vector<int> folds;              // fold index in [0, k) per image

  std::vector<std::string> ids_in(const std::vector<int>& fold_set) const;
  std::map<std::string, int> as_map() const;

  friend bool operator==(const FoldAssignment&, const FoldAssignment&) = default;
};

// Per class (in benign, malignant, unknown order) the records are put in canonical id
// order, shuffled with the seed and dealt round-robin; the dealer position carries over
// between classes so fold sizes differ by at most one.
// Throws ValidationError when k < 2 or any present class has fewer than k records.
FoldAssignment stratified_kfold(const DatasetManifest& m, int k, std::uint64_t seed);

// Fold file: header `image_id,fold`.
std::string format_folds(const FoldAssignment& folds);
FoldAssignment parse_folds(std::string_view contents, std::string_view source = "<folds>");
FoldAssignment load_folds(const std::filesystem::path& path);

}  // namespace dermfuse::dataprep
