#include "dermfuse/report.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "dermfuse/error.hpp"
#include "dermfuse/textio.hpp"
#include "dermfuse/vendor_json.hpp"

namespace dermfuse {

namespace {

using json = nlohmann::ordered_json;

const std::vector<std::string> kRocHeader = {"threshold", "fpr", "tpr"};

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

std::string roc_file_name(const char* kind, std::size_t index, const std::string& name) {
  char prefix[32];
  std::snprintf(prefix, sizeof(prefix), "roc_%s_%02zu_", kind, index);
  return prefix + sanitize(name) + ".csv";
}

double percent(double fraction) { return std::round(fraction * 10000.0) / 100.0; }

void check_metrics(const Evaluation& e) {
  const auto& m = e.metrics;
  for (double v : {m.acc, m.pre, m.rec, m.f1, m.roc_auc}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("metric of '" + e.name + "' outside [0,1]");
    }
  }
}

json evaluation_json(const Evaluation& e, const std::string& roc_file) {
  json j;
  j["name"] = e.name;
  j["confusion"] = {{"tp", e.confusion.tp}, {"fp", e.confusion.fp}, {"tn", e.confusion.tn},
                    {"fn", e.confusion.fn}};
  const auto& m = e.metrics;
  j["metrics"] = {{"acc", m.acc}, {"pre", m.pre}, {"rec", m.rec}, {"f1", m.f1},
                  {"roc_auc", m.roc_auc}};
  j["metrics_percent"] = {{"acc", percent(m.acc)}, {"pre", percent(m.pre)},
                          {"rec", percent(m.rec)}, {"f1", percent(m.f1)}};
  j["roc_file"] = roc_file;
  return j;
}

Evaluation evaluation_from_json(const json& j, const std::filesystem::path& dir) {
  Evaluation e;
  e.name = j.at("name").get<std::string>();
  const auto& c = j.at("confusion");
  e.confusion = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                 c.at("tn").get<std::size_t>(), c.at("fn").get<std::size_t>()};
  const auto& m = j.at("metrics");
  e.metrics = {m.at("acc").get<double>(), m.at("pre").get<double>(), m.at("rec").get<double>(),
               m.at("f1").get<double>(), m.at("roc_auc").get<double>()};
  const auto roc_path = dir / j.at("roc_file").get<std::string>();
  e.roc = parse_roc(textio::read_file(roc_path), roc_path.string());
  return e;
}

}  // namespace

Evaluation evaluate(std::string name, std::span<const ClassLabel> predicted,
                    std::span<const double> malignant_scores, std::span<const ClassLabel> actual) {
  Evaluation e;
  e.name = std::move(name);
  e.confusion = metrics::confusion_counts(predicted, actual);
  e.roc = metrics::roc_curve(malignant_scores, actual);
  e.metrics = metrics::metric_set(e.confusion, metrics::trapezoid_area(e.roc));
  return e;
}

std::string format_roc(const metrics::RocCurve& roc) {
  std::string out = "threshold,fpr,tpr\n";
  for (const auto& p : roc) {
    out += textio::format_double(p.threshold) + ',' + textio::format_double(p.fpr) + ',' +
           textio::format_double(p.tpr) + '\n';
  }
  return out;
}

metrics::RocCurve parse_roc(std::string_view contents, std::string_view source) {
  auto table = textio::parse_table(contents, source, kRocHeader);
  metrics::RocCurve roc;
  for (const auto& row : table.rows) {
    auto t = textio::parse_double(row.fields[0]);
    auto fpr = textio::parse_double(row.fields[1]);
    auto tpr = textio::parse_double(row.fields[2]);
    if (!t || !fpr || !tpr) throw ParseError(std::string(source), row.line, "malformed ROC point");
    roc.push_back({*t, *fpr, *tpr});
  }
  return roc;
}

std::vector<std::filesystem::path> write_run_report(const RunReport& report,
                                                    const std::filesystem::path& out_dir) {
  for (const auto& e : report.models) check_metrics(e);
  for (const auto& e : report.fusions) check_metrics(e);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  json doc;
  doc["format"] = "dermfuse-run-report";
  doc["version"] = 1;
  doc["n_images"] = report.n_images;
  doc["seed"] = report.seed;
  doc["config"] = json::object();
  for (const auto& [key, value] : report.config) doc["config"][key] = value;
  doc["weights"] = report.weights ? json::parse(fusion::format_weights(*report.weights)) : json();

  std::vector<std::pair<std::string, const metrics::RocCurve*>> roc_files;
  doc["models"] = json::array();
  for (std::size_t i = 0; i < report.models.size(); ++i) {
    auto name = roc_file_name("model", i, report.models[i].name);
    doc["models"].push_back(evaluation_json(report.models[i], name));
    roc_files.emplace_back(std::move(name), &report.models[i].roc);
  }
  doc["fusions"] = json::array();
  for (std::size_t i = 0; i < report.fusions.size(); ++i) {
    auto name = roc_file_name("fusion", i, report.fusions[i].name);
    doc["fusions"].push_back(evaluation_json(report.fusions[i], name));
    roc_files.emplace_back(std::move(name), &report.fusions[i].roc);
  }

  std::vector<std::filesystem::path> written;
  written.push_back(out_dir / kReportFileName);
  textio::write_file_atomic(written.back(), doc.dump(2) + "\n");
  for (const auto& [name, roc] : roc_files) {
    written.push_back(out_dir / name);
    textio::write_file_atomic(written.back(), format_roc(*roc));
  }
  return written;
}

RunReport read_run_report(const std::filesystem::path& dir) {
  const auto path = dir / kReportFileName;
  RunReport report;
  try {
    auto doc = json::parse(textio::read_file(path));
    if (doc.at("format") != "dermfuse-run-report") {
      throw ValidationError(path.string() + " is not a run report");
    }
    report.n_images = doc.at("n_images").get<std::size_t>();
    report.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& [key, value] : doc.at("config").items()) {
      report.config.emplace_back(key, value.get<std::string>());
    }
    if (!doc.at("weights").is_null()) {
      report.weights = fusion::parse_weights(doc.at("weights").dump());
    }
    for (const auto& e : doc.at("models")) report.models.push_back(evaluation_from_json(e, dir));
    for (const auto& e : doc.at("fusions")) report.fusions.push_back(evaluation_from_json(e, dir));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed run report " + path.string() + ": " + e.what());
  }
  return report;
}

std::string format_report_table(const RunReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %8s %8s %8s %13s %13s\n", "Model", "ACC (%)",
                "PRE (%)", "REC (%)", "F1-score (%)", "ROC-AUC score");
  out += line;
  auto add = [&](const Evaluation& e) {
    const auto& m = e.metrics;
    std::snprintf(line, sizeof(line), "%-28s %8.2f %8.2f %8.2f %13.2f %13.2f\n", e.name.c_str(),
                  m.acc * 100.0, m.pre * 100.0, m.rec * 100.0, m.f1 * 100.0, m.roc_auc);
    out += line;
  };
  for (const auto& e : report.models) add(e);
  for (const auto& e : report.fusions) add(e);
  return out;
}

}  // namespace dermfuse
