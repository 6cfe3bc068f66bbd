// Python bindings for the fusion, metrics, explanation and image-processing core.
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dermfuse/cli.hpp"
#include "dermfuse/error.hpp"
#include "dermfuse/fusion.hpp"
#include "dermfuse/imgproc.hpp"
#include "dermfuse/metrics.hpp"
#include "dermfuse/predictions.hpp"
#include "dermfuse/shapley.hpp"

namespace py = pybind11;
using namespace dermfuse;

namespace {

std::vector<ClassProbs> to_probs(const std::vector<std::pair<double, double>>& pv) {
  std::vector<ClassProbs> out;
  out.reserve(pv.size());
  for (const auto& [b, m] : pv) out.push_back(validate_probs(b, m));
  return out;
}

ClassLabel to_label(const std::string& text) {
  const auto label = parse_class_label(text);
  if (!label) throw ValidationError("label must be 'benign' or 'malignant', got '" + text + "'");
  return *label;
}

std::vector<ClassLabel> to_labels(const std::vector<std::string>& texts) {
  std::vector<ClassLabel> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(to_label(t));
  return out;
}

py::dict fused(const fusion::FusedPrediction& f) {
  py::dict d;
  d["m_pred"] = f.m_pred;
  d["b_pred"] = f.b_pred;
  d["label"] = std::string(to_string(f.label));
  return d;
}

py::dict metric_dict(const metrics::MetricSet& m) {
  py::dict d;
  d["acc"] = m.acc;
  d["pre"] = m.pre;
  d["rec"] = m.rec;
  d["f1"] = m.f1;
  d["auc"] = m.roc_auc;
  return d;
}

py::dict attribution_dict(const explain::Attribution& a) {
  py::dict d;
  d["phi"] = a.phi;
  d["v_empty"] = a.v_empty;
  d["v_full"] = a.v_full;
  d["method"] = std::string(to_string(a.method));
  d["efficiency_residual"] = a.efficiency_residual;
  return d;
}

using ImageArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

RasterImage to_raster(const ImageArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw ValidationError("image must have shape (height, width, 3)");
  const auto* p = a.data();
  std::vector<std::uint8_t> px(p, p + a.size());
  return RasterImage::from_bytes(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), std::move(px));
}

ImageArray to_array(const RasterImage& img) {
  const auto bytes_img = img.normalized() ? img.to_bytes() : img;
  ImageArray out({bytes_img.height(), bytes_img.width(), 3});
  const auto src = bytes_img.bytes();
  std::copy(src.begin(), src.end(), out.mutable_data());
  return out;
}

explain::CoalitionValueFunction game(std::size_t n, py::function fn) {
  return explain::CoalitionValueFunction(n, explain::CoalitionValueFunction::Evaluator(
      [fn](const explain::Coalition& s) {
        py::gil_scoped_acquire gil;
        std::vector<int> members;
        for (std::size_t i = 0; i < s.size(); ++i)
          if (s[i]) members.push_back(static_cast<int>(i));
        return fn(members).cast<double>();
      }));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Probability fusion, weighting, metrics and attribution for skin-lesion classifiers";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<TransportError>(m, "TransportError", base.ptr());

  m.def("hard_vote", [](const std::vector<std::pair<double, double>>& pv) { return fused(fusion::hard_vote(to_probs(pv))); },
        py::arg("pv"), "Majority vote; pv is a list of (p_benign, p_malignant).");
  m.def("soft_average", [](const std::vector<std::pair<double, double>>& pv) { return fused(fusion::soft_average(to_probs(pv))); },
        py::arg("pv"));
  m.def("max_rule", [](const std::vector<std::pair<double, double>>& pv) { return fused(fusion::max_rule(to_probs(pv))); },
        py::arg("pv"));
  m.def("weighted_average",
        [](const std::vector<std::pair<double, double>>& pv, const std::vector<double>& w) {
          return fused(fusion::weighted_average(to_probs(pv), w));
        },
        py::arg("pv"), py::arg("weights"));

  m.def("tanh_weights",
        [](const std::vector<std::map<std::string, double>>& rows, const std::string& selection) {
          std::vector<metrics::MetricSet> sets;
          for (const auto& r : rows) {
            auto get = [&](const char* k) {
              const auto it = r.find(k);
              return it == r.end() ? 0.0 : it->second;
            };
            sets.push_back({get("acc"), get("pre"), get("rec"), get("f1"), get("auc")});
          }
          return fusion::tanh_weights(sets, fusion::parse_metric_selection(selection)).weights;
        },
        py::arg("metrics"), py::arg("selection") = "pre,rec,f1,auc",
        "One weight per dict of fractional metrics (keys acc, pre, rec, f1, auc).");

  m.def("f1_score", &metrics::f1_score, py::arg("precision"), py::arg("recall"));
  m.def("roc_auc",
        [](const std::vector<double>& scores, const std::vector<std::string>& labels) {
          return metrics::roc_auc(scores, to_labels(labels));
        },
        py::arg("scores"), py::arg("labels"));
  m.def("evaluate",
        [](const std::vector<std::string>& predicted, const std::vector<std::string>& actual,
           const std::vector<double>& scores) {
          const auto y = to_labels(actual);
          const auto cm = metrics::confusion_counts(to_labels(predicted), y);
          return metric_dict(metrics::metric_set(cm, metrics::roc_auc(scores, y)));
        },
        py::arg("predicted"), py::arg("actual"), py::arg("scores"));

  m.def("exact_shapley",
        [](std::size_t n, py::function v) { return attribution_dict(explain::exact_shapley(game(n, v))); },
        py::arg("n_players"), py::arg("value"), "value(members: list[int]) -> float");
  m.def("sampled_shapley",
        [](std::size_t n, py::function v, std::size_t permutations, std::uint64_t seed) {
          return attribution_dict(explain::sampled_shapley(game(n, v), permutations, seed));
        },
        py::arg("n_players"), py::arg("value"), py::arg("permutations") = 1000, py::arg("seed") = 0);

  m.def("color_enhance", [](const ImageArray& a, double f) { return to_array(imgproc::color_enhance(to_raster(a), f)); },
        py::arg("image"), py::arg("factor"));
  m.def("contrast_enhance", [](const ImageArray& a, double f) { return to_array(imgproc::contrast_enhance(to_raster(a), f)); },
        py::arg("image"), py::arg("factor"));
  m.def("sharpness_enhance", [](const ImageArray& a, double f) { return to_array(imgproc::sharpness_enhance(to_raster(a), f)); },
        py::arg("image"), py::arg("factor"));
  m.def("brightness_shift", [](const ImageArray& a, double d) { return to_array(imgproc::brightness_shift(to_raster(a), d)); },
        py::arg("image"), py::arg("delta"));
  m.def("center_crop", [](const ImageArray& a, double f) { return to_array(imgproc::center_crop(to_raster(a), f)); },
        py::arg("image"), py::arg("fraction"));
  m.def("preprocess",
        [](const ImageArray& a) {
          const auto out = imgproc::preprocess(to_raster(a));
          const auto v = out.values();
          py::array_t<float> arr({out.height(), out.width(), 3});
          std::copy(v.begin(), v.end(), arr.mutable_data());
          return arr;
        },
        py::arg("image"), "Default preprocessing; returns float32 values in [0, 1].");

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = cli::run_command(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs a command-line subcommand; returns (exit_code, stdout, stderr).");
}
