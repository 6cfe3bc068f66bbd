#pragma once

// Run reports: metrics, confusion counts and ROC points per model and per fusion method.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dermfuse/fusion.hpp"
#include "dermfuse/metrics.hpp"

namespace dermfuse {

struct Evaluation {
  std::string name;
  metrics::ConfusionCounts confusion;
  metrics::MetricSet metrics;
  metrics::RocCurve roc;

  friend bool operator==(const Evaluation&, const Evaluation&) = default;
};

// Confusion counts, Table-style metrics and ROC curve of one scorer (malignant positive).
Evaluation evaluate(std::string name, std::span<const ClassLabel> predicted,
                    std::span<const double> malignant_scores, std::span<const ClassLabel> actual);

struct RunReport {
  std::size_t n_images = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;  // echoed in this order
  std::optional<fusion::WeightVector> weights;
  std::vector<Evaluation> models;
  std::vector<Evaluation> fusions;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

inline constexpr const char* kReportFileName = "report.json";

// Writes report.json plus one `threshold,fpr,tpr` file per model and per fusion method.
// Returns the written paths, report first. Output bytes depend only on the report.
// Throws ValidationError if a metric is outside [0, 1], IoError on write failure.
std::vector<std::filesystem::path> write_run_report(const RunReport& report,
                                                    const std::filesystem::path& out_dir);

// Reads back a directory written by write_run_report.
RunReport read_run_report(const std::filesystem::path& dir);

std::string format_roc(const metrics::RocCurve& roc);
metrics::RocCurve parse_roc(std::string_view contents, std::string_view source = "<roc>");

// Fixed-width text table: ACC/PRE/REC/F1 in percent, ROC-AUC as a fraction.
std::string format_report_table(const RunReport& report);

}  // namespace dermfuse
