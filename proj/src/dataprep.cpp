#include "dermfuse/dataprep.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_set>

#include "dermfuse/error.hpp"
#include "dermfuse/random.hpp"
#include "dermfuse/textio.hpp"

namespace dermfuse::dataprep {

namespace {

const std::vector<std::string> kManifestHeader = {"image_id", "path", "label", "source"};
const std::vector<std::string> kFoldHeader = {"image_id", "fold"};

void check_unique_ids(const DatasetManifest& m) {
  std::unordered_set<std::string> seen;
  for (const auto& r : m.records) {
    if (!seen.insert(r.image_id).second) {
      throw ValidationError("duplicate image_id " + r.image_id);
    }
  }
}

}  // namespace

std::string_view to_string(Diagnosis d) {
  switch (d) {
    case Diagnosis::kBenign: return "benign";
    case Diagnosis::kMalignant: return "malignant";
    case Diagnosis::kUnknown: return "unknown";
  }
  return "?";
}

std::optional<Diagnosis> parse_diagnosis(std::string_view text) {
  if (text == "benign") return Diagnosis::kBenign;
  if (text == "malignant") return Diagnosis::kMalignant;
  if (text == "unknown") return Diagnosis::kUnknown;
  return std::nullopt;
}

std::size_t DatasetManifest::count(Diagnosis label) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [&](const auto& r) { return r.label == label; }));
}

std::size_t DatasetManifest::count(std::string_view source, Diagnosis label) const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [&](const auto& r) {
    return r.label == label && r.source == source;
  }));
}

std::vector<std::string> DatasetManifest::sources() const {
  std::vector<std::string> out;
  std::set<std::string_view> seen;
  for (const auto& r : records) {
    if (seen.insert(r.source).second) out.push_back(r.source);
  }
  return out;
}

DatasetManifest parse_manifest(std::string_view contents, std::string_view source) {
  auto table = textio::parse_table(contents, source, kManifestHeader);
  DatasetManifest m;
  m.records.reserve(table.rows.size());
  std::unordered_set<std::string> seen;
  for (auto& row : table.rows) {
    auto label = parse_diagnosis(row.fields[2]);
    if (!label) {
      throw ValidationError(std::string(source) + ":" + std::to_string(row.line) +
                            ": unknown label '" + row.fields[2] + "'");
    }
    if (row.fields[0].empty()) throw ParseError(std::string(source), row.line, "empty image_id");
    if (!seen.insert(row.fields[0]).second) {
      throw ValidationError(std::string(source) + ":" + std::to_string(row.line) +
                            ": duplicate image_id " + row.fields[0]);
    }
    m.records.push_back({std::move(row.fields[0]), std::move(row.fields[1]), *label,
                         std::move(row.fields[3])});
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(textio::read_file(path), path.string());
}

std::string format_manifest(const DatasetManifest& m) {
  std::string out = "image_id,path,label,source\n";
  for (const auto& r : m.records) {
    out += r.image_id + ',' + r.path + ',' + std::string(to_string(r.label)) + ',' + r.source + '\n';
  }
  return out;
}

DatasetManifest drop_unknown(const DatasetManifest& m) {
  DatasetManifest out;
  std::copy_if(m.records.begin(), m.records.end(), std::back_inserter(out.records),
               [](const auto& r) { return r.label != Diagnosis::kUnknown; });
  return out;
}

DatasetManifest downsample_balance(const DatasetManifest& m, std::uint64_t seed) {
  check_unique_ids(m);
  if (m.count(Diagnosis::kUnknown) > 0) {
    throw ValidationError("manifest still contains unknown labels; drop them before balancing");
  }
  const auto n_benign = m.count(Diagnosis::kBenign);
  const auto n_malignant = m.count(Diagnosis::kMalignant);
  if (n_benign == 0 || n_malignant == 0) {
    throw ValidationError("balancing needs both classes (benign=" + std::to_string(n_benign) +
                          ", malignant=" + std::to_string(n_malignant) + ")");
  }
  if (n_benign == n_malignant) return m;

  const auto majority = n_benign > n_malignant ? Diagnosis::kBenign : Diagnosis::kMalignant;
  const auto keep = std::min(n_benign, n_malignant);

  // Sample from the canonical (id-sorted) order so the result ignores input order.
  std::vector<std::string> candidates;
  for (const auto& r : m.records) {
    if (r.label == majority) candidates.push_back(r.image_id);
  }
  std::sort(candidates.begin(), candidates.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(candidates));
  candidates.resize(keep);
  std::unordered_set<std::string> chosen(candidates.begin(), candidates.end());

  DatasetManifest out;
  out.records.reserve(2 * keep);
  for (const auto& r : m.records) {
    if (r.label != majority || chosen.count(r.image_id)) out.records.push_back(r);
  }
  return out;
}

DatasetManifest merge_manifests(const std::vector<DatasetManifest>& ms) {
  DatasetManifest out;
  std::unordered_set<std::string> seen;
  for (const auto& m : ms) {
    for (const auto& r : m.records) {
      if (!seen.insert(r.image_id).second) {
        throw ValidationError("image_id collision while merging: " + r.image_id);
      }
      out.records.push_back(r);
    }
  }
  return out;
}

DatasetManifest balance_by_source(const DatasetManifest& m, std::uint64_t seed) {
  const auto known = drop_unknown(m);
  std::vector<DatasetManifest> parts;
  const auto sources = known.sources();
  for (std::size_t s = 0; s < sources.size(); ++s) {
    DatasetManifest part;
    for (const auto& r : known.records) {
      if (r.source == sources[s]) part.records.push_back(r);
    }
    try {
      parts.push_back(downsample_balance(part, derive_seed(seed, s)));
    } catch (const ValidationError& e) {
      throw ValidationError("source '" + sources[s] + "': " + e.what());
    }
  }
  return merge_manifests(parts);
}

std::vector<std::string> FoldAssignment::ids_in(const std::vector<int>& fold_set) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < image_ids.size(); ++i) {
    if (std::find(fold_set.begin(), fold_set.end(), folds[i]) != fold_set.end()) {
      out.push_back(image_ids[i]);
    }
  }
  return out;
}

std::map<std::string, int> FoldAssignment::as_map() const {
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < image_ids.size(); ++i) out.emplace(image_ids[i], folds[i]);
  return out;
}

FoldAssignment stratified_kfold(const DatasetManifest& m, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("k-fold needs k >= 2, got " + std::to_string(k));
  check_unique_ids(m);

  FoldAssignment out;
  out.k = k;
  out.folds.assign(m.records.size(), -1);
  for (const auto& r : m.records) out.image_ids.push_back(r.image_id);

  std::size_t dealer = 0;
  std::uint64_t stream = 0;
  for (auto cls : {Diagnosis::kBenign, Diagnosis::kMalignant, Diagnosis::kUnknown}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < m.records.size(); ++i) {
      if (m.records[i].label == cls) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < static_cast<std::size_t>(k)) {
      throw ValidationError("class " + std::string(to_string(cls)) + " has " +
                            std::to_string(members.size()) + " records, fewer than k=" +
                            std::to_string(k));
    }
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return m.records[a].image_id < m.records[b].image_id;
    });
    Rng rng(derive_seed(seed, stream++));
    rng.shuffle(std::span<std::size_t>(members));
    for (auto idx : members) {
      out.folds[idx] = static_cast<int>(dealer % static_cast<std::size_t>(k));
      ++dealer;
    }
  }
  return out;
}

std::string format_folds(const FoldAssignment& folds) {
  std::string out = "image_id,fold\n";
  for (std::size_t i = 0; i < folds.image_ids.size(); ++i) {
    out += folds.image_ids[i] + ',' + std::to_string(folds.folds[i]) + '\n';
  }
  return out;
}

FoldAssignment parse_folds(std::string_view contents, std::string_view source) {
  auto table = textio::parse_table(contents, source, kFoldHeader);
  FoldAssignment out;
  std::unordered_set<std::string> seen;
  int max_fold = -1;
  for (auto& row : table.rows) {
    auto fold = textio::parse_int(row.fields[1]);
    if (!fold || *fold < 0) {
      throw ParseError(std::string(source), row.line, "fold must be a non-negative integer");
    }
    if (!seen.insert(row.fields[0]).second) {
      throw ValidationError(std::string(source) + ":" + std::to_string(row.line) +
                            ": duplicate image_id " + row.fields[0]);
    }
    out.image_ids.push_back(std::move(row.fields[0]));
    out.folds.push_back(static_cast<int>(*fold));
    max_fold = std::max(max_fold, static_cast<int>(*fold));
  }
  out.k = max_fold + 1;
  return out;
}

FoldAssignment load_folds(const std::filesystem::path& path) {
  return parse_folds(textio::read_file(path), path.string());
}

}  // namespace dermfuse::dataprep
