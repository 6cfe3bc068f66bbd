#include "dermfuse/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "dermfuse/dataprep.hpp"
#include "dermfuse/error.hpp"
#include "dermfuse/explain.hpp"
#include "dermfuse/fusion.hpp"
#include "dermfuse/image_io.hpp"
#include "dermfuse/imgproc.hpp"
#include "dermfuse/predictions.hpp"
#include "dermfuse/report.hpp"
#include "dermfuse/textio.hpp"
#include "dermfuse/vendor_json.hpp"

namespace dermfuse::cli {

namespace fs = std::filesystem;

namespace {

// Options shared by the subcommands that read prediction files.
struct PredictionInputs {
  std::vector<std::string> predictions;  // model_id=path
  std::string labels;
  std::string manifest;
  std::string folds;
  std::string fold_list;
};

void add_prediction_inputs(CLI::App* app, PredictionInputs& in, bool require_labels) {
  app->add_option("--predictions", in.predictions,
                  "Prediction file as <model_id>=<path> (repeatable; model id defaults to the "
                  "file stem)")
      ->required();
  auto* labels = app->add_option("--labels", in.labels, "Label file (image_id,label)");
  auto* manifest = app->add_option(
      "--manifest", in.manifest,
      "Dataset manifest; supplies labels and restricts predictions to its image ids");
  labels->excludes(manifest);
  if (require_labels) {
    app->callback([labels, manifest] {
      if (labels->count() == 0 && manifest->count() == 0) {
        throw CLI::RequiredError("--labels or --manifest");
      }
    });
  }
  auto* folds = app->add_option("--folds", in.folds, "Fold file (image_id,fold) written by kfold");
  app->add_option("--fold", in.fold_list, "Comma list of fold indices to keep (needs --folds)")
      ->needs(folds);
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  for (const auto& token : textio::split_fields(text)) {
    auto v = textio::parse_int(token);
    if (!v || *v < 0) throw ConfigError(std::string("invalid ") + what + " '" + token + "'");
    out.push_back(static_cast<int>(*v));
  }
  return out;
}

struct LoadedData {
  AlignedDataset ds;
  std::vector<std::pair<std::string, std::string>> echo;
};

LoadedData load_inputs(const PredictionInputs& in) {
  std::vector<PredictionSet> sets;
  std::vector<std::pair<std::string, std::string>> echo;
  std::string prediction_echo;
  for (const auto& spec : in.predictions) {
    const auto eq = spec.find('=');
    if (eq == 0) throw ConfigError("empty model id in --predictions " + spec);
    if (eq == std::string::npos) {
      sets.push_back(load_predictions(spec));
    } else {
      sets.push_back(load_predictions(spec.substr(eq + 1), spec.substr(0, eq)));
    }
    if (!prediction_echo.empty()) prediction_echo += ';';
    prediction_echo += sets.back().model_id + '=' + (eq == std::string::npos ? spec : spec.substr(eq + 1));
  }
  echo.emplace_back("predictions", prediction_echo);

  std::optional<LabelSet> labels;
  if (!in.labels.empty()) {
    labels = load_labels(in.labels);
    echo.emplace_back("labels", in.labels);
  } else if (!in.manifest.empty()) {
    const auto m = dataprep::load_manifest(in.manifest);
    labels.emplace();
    std::set<std::string> keep;
    for (const auto& r : m.records) {
      if (r.label == dataprep::Diagnosis::kUnknown) {
        throw ValidationError("manifest " + in.manifest + " has unknown label for " + r.image_id +
                              "; balance it first");
      }
      labels->rows.push_back({r.image_id, r.label == dataprep::Diagnosis::kBenign
                                              ? ClassLabel::kBenign
                                              : ClassLabel::kMalignant});
      keep.insert(r.image_id);
    }
    // The manifest names the evaluated images; each prediction file must cover all of them.
    for (auto& set : sets) {
      std::set<std::string> have;
      std::vector<PredictionRow> rows;
      for (auto& row : set.rows) {
        have.insert(row.image_id);
        if (keep.count(row.image_id)) rows.push_back(std::move(row));
      }
      for (const auto& id : keep) {
        if (!have.count(id)) {
          throw MismatchError("predictions[" + set.model_id + "] lack manifest image " + id);
        }
      }
      set.rows = std::move(rows);
    }
    echo.emplace_back("manifest", in.manifest);
  }

  auto ds = labels ? align_dataset(sets, *labels) : align_dataset(sets);
  if (!in.folds.empty()) {
    const auto folds = dataprep::load_folds(in.folds);
    auto fold_map = folds.as_map();
    std::vector<int> wanted;
    if (!in.fold_list.empty()) {
      wanted = parse_int_list(in.fold_list, "fold index");
    } else {
      for (int f = 0; f < folds.k; ++f) wanted.push_back(f);
    }
    std::vector<std::string> keep;
    for (const auto& id : ds.image_ids()) {
      auto it = fold_map.find(id);
      if (it == fold_map.end()) throw MismatchError("image " + id + " missing from fold file");
      if (std::find(wanted.begin(), wanted.end(), it->second) != wanted.end()) keep.push_back(id);
    }
    if (keep.empty()) throw ValidationError("fold selection leaves no images");
    ds = ds.subset(keep);
    echo.emplace_back("folds", in.folds);
    echo.emplace_back("fold", in.fold_list.empty() ? "all" : in.fold_list);
  }
  return {std::move(ds), std::move(echo)};
}

std::vector<metrics::MetricSet> per_model_metrics(const AlignedDataset& ds) {
  if (!ds.has_labels()) throw ConfigError("metrics need labels (--labels or --manifest)");
  std::vector<metrics::MetricSet> out;
  for (std::size_t m = 0; m < ds.n_models(); ++m) {
    const auto scores = ds.scores(m);
    std::vector<ClassLabel> predicted;
    for (std::size_t i = 0; i < ds.n_images(); ++i) {
      predicted.push_back(fusion::decide(ds.at(i, m).benign, ds.at(i, m).malignant));
    }
    out.push_back(evaluate(ds.model_ids()[m], predicted, scores, ds.labels()).metrics);
  }
  return out;
}

struct WeightOptions {
  std::string metrics = "pre,rec,f1,auc";
  std::string transform = "tanh";
  std::string weights_path;
  bool paper_faithful = false;
};

fusion::WeightVector compute_weights_for(const AlignedDataset& ds, const WeightOptions& opt,
                                         std::string split) {
  const auto selection = fusion::parse_metric_selection(opt.metrics);
  const auto transform = fusion::parse_weight_transform(opt.transform);
  if (!transform) throw ConfigError("unknown --weight-transform '" + opt.transform + "'");
  const auto ms = per_model_metrics(ds);
  auto w = fusion::compute_weights(ms, selection, *transform, ds.model_ids());
  w.split = std::move(split);
  return w;
}

void add_weight_selection(CLI::App* app, WeightOptions& opt) {
  app->add_option("--weight-metrics", opt.metrics,
                  "Comma list of metrics summed into each weight: acc,pre,rec,f1,auc")
      ->capture_default_str();
  app->add_option("--weight-transform", opt.transform,
                  "tanh: sum of tanh(metric); raw: sum of the metrics themselves")
      ->check(CLI::IsMember({"tanh", "raw"}))
      ->capture_default_str();
}

// Weights for the weighted method: from --weights, or computed on the evaluated images
// themselves with --paper-faithful-weights.
std::optional<fusion::WeightVector> resolve_weights(const AlignedDataset& ds,
                                                    const WeightOptions& opt,
                                                    std::vector<std::pair<std::string, std::string>>& echo) {
  if (opt.paper_faithful) {
    echo.emplace_back("weights", "paper-faithful (evaluation split)");
    return compute_weights_for(ds, opt, "evaluation (paper-faithful)");
  }
  if (!opt.weights_path.empty()) {
    echo.emplace_back("weights", opt.weights_path);
    return fusion::parse_weights(textio::read_file(opt.weights_path));
  }
  return std::nullopt;
}

std::string format_fused(std::span<const fusion::FusedPrediction> fused) {
  std::string out = "image_id,m_pred,b_pred,label\n";
  for (const auto& f : fused) {
    out += f.image_id + ',' + textio::format_double(f.m_pred) + ',' +
           textio::format_double(f.b_pred) + ',' + std::string(to_string(f.label)) + '\n';
  }
  return out;
}

fs::path resolve_relative(const fs::path& base_file, const std::string& path) {
  fs::path p(path);
  return p.is_absolute() ? p : base_file.parent_path() / p;
}

std::pair<int, int> parse_size(const std::string& text) {
  auto [w, h] = explain::parse_grid_spec(text);
  return {w, h};
}

struct TrainingConfig {
  int batch_size = 64;
  std::string optimizer = "Adam";
  std::string loss = "Categorical Cross Entropy";
  double learning_rate = 0.0001;
  int max_epochs = 1000;
  int early_stop_patience = 100;
  std::string output_activation = "Softmax";
};

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ensemble fusion, evaluation and explanation for dermoscopy classifiers",
               "dermfuse"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::uint64_t seed = 0;
  std::string out_path;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
  };

  // balance
  std::string manifest_path;
  auto* balance = app.add_subcommand(
      "balance", "Drop unknown labels, downsample the majority class per source, merge");
  balance->add_option("--manifest", manifest_path, "Input manifest")->required();
  balance->add_option("--out", out_path, "Output manifest")->required();
  add_seed(balance);

  // kfold
  int k = 4;
  auto* kfold = app.add_subcommand("kfold", "Stratified k-fold assignment of a manifest");
  kfold->add_option("--manifest", manifest_path, "Input manifest")->required();
  kfold->add_option("--k", k, "Number of folds")->capture_default_str();
  kfold->add_option("--out", out_path, "Output fold file (image_id,fold)")->required();
  add_seed(kfold);

  // prep
  imgproc::PreprocessConfig prep_cfg;
  std::string size_text = "224x224";
  auto* prep = app.add_subcommand("prep", "Enhance, crop, resize and normalize manifest images");
  prep->add_option("--manifest", manifest_path, "Input manifest (paths relative to it)")
      ->required();
  prep->add_option("--out", out_path, "Output directory")->required();
  prep->add_option("--color", prep_cfg.color_factor, "Color enhancement factor")
      ->capture_default_str();
  prep->add_option("--sharpness", prep_cfg.sharpness_factor, "Sharpness enhancement factor")
      ->capture_default_str();
  prep->add_option("--brightness", prep_cfg.brightness_delta, "Additive brightness shift")
      ->capture_default_str();
  prep->add_option("--contrast", prep_cfg.contrast_factor, "Contrast enhancement factor")
      ->capture_default_str();
  prep->add_option("--crop", prep_cfg.crop_fraction, "Centre crop fraction of width and height")
      ->capture_default_str();
  prep->add_option("--size", size_text, "Output size WxH")->capture_default_str();

  // augment
  imgproc::AugmentConfig aug_cfg;
  int copies = 1;
  bool no_hflip = false;
  bool no_vflip = false;
  auto* augment = app.add_subcommand("augment", "Random affine augmentation of manifest images");
  augment->add_option("--manifest", manifest_path, "Input manifest (paths relative to it)")
      ->required();
  augment->add_option("--out", out_path, "Output directory")->required();
  augment->add_option("--copies", copies, "Augmented copies per image")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  augment->add_option("--rotation", aug_cfg.rotation_degrees, "Rotation range in degrees (+/-)")
      ->capture_default_str();
  augment->add_option("--zoom", aug_cfg.zoom, "Zoom range around 1")->capture_default_str();
  augment->add_option("--shear", aug_cfg.shear, "Shear factor range (+/-)")->capture_default_str();
  augment->add_option("--width-shift", aug_cfg.width_shift, "Horizontal shift, fraction of width")
      ->capture_default_str();
  augment->add_option("--height-shift", aug_cfg.height_shift,
                      "Vertical shift, fraction of height")
      ->capture_default_str();
  augment->add_flag("--no-hflip", no_hflip, "Disable random horizontal flips");
  augment->add_flag("--no-vflip", no_vflip, "Disable random vertical flips");
  add_seed(augment);

  // weights
  PredictionInputs weights_in;
  WeightOptions weights_opt;
  auto* weights = app.add_subcommand(
      "weights", "Per-model fusion weights from metrics on a labelled calibration split");
  add_prediction_inputs(weights, weights_in, true);
  add_weight_selection(weights, weights_opt);
  weights->add_option("--out", out_path, "Output weights document")->required();

  // fuse
  PredictionInputs fuse_in;
  WeightOptions fuse_opt;
  std::string method_text;
  auto* fuse = app.add_subcommand("fuse", "Fuse per-model predictions into one label per image");
  add_prediction_inputs(fuse, fuse_in, false);
  fuse->add_option("--method", method_text, "Fusion rule")
      ->required()
      ->check(CLI::IsMember({"hard", "soft", "max", "weighted"}));
  fuse->add_option("--weights", fuse_opt.weights_path, "Weights document (weighted method)");
  fuse->add_flag("--paper-faithful-weights", fuse_opt.paper_faithful,
                 "Compute weights on the fused (evaluation) images themselves; needs labels");
  add_weight_selection(fuse, fuse_opt);
  fuse->add_option("--out", out_path, "Output file (image_id,m_pred,b_pred,label)")->required();

  // eval
  PredictionInputs eval_in;
  WeightOptions eval_opt;
  std::string eval_methods;
  auto* eval = app.add_subcommand(
      "eval", "Evaluate base models and fusion methods; write a run report and ROC points");
  add_prediction_inputs(eval, eval_in, true);
  eval->add_option("--method", eval_methods,
                   "Comma list of fusion rules (default: hard,soft,max, plus weighted when "
                   "weights are available)");
  eval->add_option("--weights", eval_opt.weights_path, "Weights document (weighted method)");
  eval->add_flag("--paper-faithful-weights", eval_opt.paper_faithful,
                 "Compute weights on the evaluation images themselves");
  add_weight_selection(eval, eval_opt);
  eval->add_option("--out", out_path, "Output directory for the run report")->required();
  add_seed(eval);

  // report
  std::string run_dir;
  auto* report = app.add_subcommand("report", "Render a run report as a percent table");
  report->add_option("--run-dir", run_dir, "Directory written by eval")->required();
  report->add_option("--out", out_path, "Output text file (stdout when omitted)");

  // explain
  std::string image_path;
  std::string provider_cmd;
  std::string grid_text = "4x4";
  std::size_t permutations = 1000;
  std::string target_text = "malignant";
  double timeout_s = 120.0;
  PredictionInputs explain_in;
  std::string explain_weights;
  std::string image_id;
  auto* explain_cmd = app.add_subcommand(
      "explain", "Shapley attribution over image cells (provider) or ensemble members");
  explain_cmd->add_option("--image", image_path, "Image to explain (cell mode)");
  explain_cmd->add_option("--provider-cmd", provider_cmd,
                          "Provider executable invoked with a request directory (cell mode)");
  explain_cmd->add_option("--grid", grid_text, "Cell grid RxC")->capture_default_str();
  explain_cmd->add_option("--permutations", permutations,
                          "Sampled permutations when the grid has more than 12 cells")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  explain_cmd->add_option("--timeout", timeout_s, "Provider timeout per batch in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  explain_cmd->add_option("--predictions", explain_in.predictions,
                          "Prediction file <model_id>=<path> (member mode, repeatable)");
  explain_cmd->add_option("--weights", explain_weights,
                          "Weights document (member mode; equal weights when omitted)");
  explain_cmd->add_option("--image-id", image_id, "Image to explain (member mode)");
  explain_cmd->add_option("--target", target_text, "Explained class")
      ->check(CLI::IsMember({"benign", "malignant"}))
      ->capture_default_str();
  explain_cmd->add_option("--out", out_path, "Output attribution document")->required();
  add_seed(explain_cmd);

  // emit-train-config
  TrainingConfig train;
  auto* emit = app.add_subcommand("emit-train-config",
                                  "Write the base-learner training hyperparameters for "
                                  "external trainers (no training happens here)");
  emit->add_option("--out", out_path, "Output document")->required();
  emit->add_option("--batch-size", train.batch_size)->capture_default_str();
  emit->add_option("--optimizer", train.optimizer)->capture_default_str();
  emit->add_option("--loss", train.loss)->capture_default_str();
  emit->add_option("--learning-rate", train.learning_rate)->capture_default_str();
  emit->add_option("--max-epochs", train.max_epochs)->capture_default_str();
  emit->add_option("--patience", train.early_stop_patience, "Early-stop patience in epochs")
      ->capture_default_str();
  emit->add_option("--output-activation", train.output_activation)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "usage error: " << e.what() << " (see --help)\n";
    return 2;
  }

  try {
    if (*balance) {
      const auto m = dataprep::load_manifest(manifest_path);
      const auto balanced = dataprep::balance_by_source(m, seed);
      textio::write_file_atomic(out_path, dataprep::format_manifest(balanced));
      out << "balanced " << balanced.records.size() << " records (benign "
          << balanced.count(dataprep::Diagnosis::kBenign) << ", malignant "
          << balanced.count(dataprep::Diagnosis::kMalignant) << ")\n";
    } else if (*kfold) {
      const auto m = dataprep::load_manifest(manifest_path);
      const auto folds = dataprep::stratified_kfold(m, k, seed);
      textio::write_file_atomic(out_path, dataprep::format_folds(folds));
      out << "assigned " << folds.image_ids.size() << " records to " << k << " folds\n";
    } else if (*prep) {
      std::tie(prep_cfg.target_width, prep_cfg.target_height) = parse_size(size_text);
      prep_cfg.validate();
      const auto m = dataprep::load_manifest(manifest_path);
      fs::create_directories(fs::path(out_path) / "images");
      dataprep::DatasetManifest updated;
      for (const auto& r : m.records) {
        const auto img = read_image(resolve_relative(manifest_path, r.path));
        const auto rel = fs::path("images") / (r.image_id + ".png");
        write_png(fs::path(out_path) / rel, imgproc::preprocess(img, prep_cfg));
        auto copy = r;
        copy.path = rel.string();
        updated.records.push_back(std::move(copy));
      }
      textio::write_file_atomic(fs::path(out_path) / "manifest.csv",
                                dataprep::format_manifest(updated));
      out << "preprocessed " << updated.records.size() << " images\n";
    } else if (*augment) {
      aug_cfg.horizontal_flip = !no_hflip;
      aug_cfg.vertical_flip = !no_vflip;
      aug_cfg.validate();
      const auto m = dataprep::load_manifest(manifest_path);
      fs::create_directories(fs::path(out_path) / "images");
      dataprep::DatasetManifest updated;
      std::uint64_t stream = 0;
      for (const auto& r : m.records) {
        const auto img = read_image(resolve_relative(manifest_path, r.path));
        for (int c = 0; c < copies; ++c) {
          auto copy = r;
          copy.image_id = r.image_id + "_aug" + std::to_string(c);
          const auto rel = fs::path("images") / (copy.image_id + ".png");
          write_png(fs::path(out_path) / rel, imgproc::random_augment(img, aug_cfg, seed, stream++));
          copy.path = rel.string();
          updated.records.push_back(std::move(copy));
        }
      }
      textio::write_file_atomic(fs::path(out_path) / "manifest.csv",
                                dataprep::format_manifest(updated));
      out << "augmented " << updated.records.size() << " images\n";
    } else if (*weights) {
      auto data = load_inputs(weights_in);
      std::string split = "calibration";
      if (!weights_in.folds.empty()) {
        split += " (folds " + (weights_in.fold_list.empty() ? std::string("all") : weights_in.fold_list) + ")";
      }
      const auto w = compute_weights_for(data.ds, weights_opt, split);
      textio::write_file_atomic(out_path, fusion::format_weights(w));
      for (std::size_t i = 0; i < w.weights.size(); ++i) {
        out << w.model_ids[i] << ' ' << textio::format_double(w.weights[i]) << '\n';
      }
    } else if (*fuse) {
      const auto method = *fusion::parse_method(method_text);
      if (method == fusion::Method::kWeighted && fuse_opt.weights_path.empty() &&
          !fuse_opt.paper_faithful) {
        throw ConfigError("--method weighted needs --weights or --paper-faithful-weights");
      }
      auto data = load_inputs(fuse_in);
      std::optional<fusion::WeightVector> w;
      if (method == fusion::Method::kWeighted) w = resolve_weights(data.ds, fuse_opt, data.echo);
      const auto fused = fusion::fuse_dataset(data.ds, method, w ? &*w : nullptr);
      textio::write_file_atomic(out_path, format_fused(fused));
      out << "fused " << fused.size() << " images with " << method_text << '\n';
    } else if (*eval) {
      auto data = load_inputs(eval_in);
      const auto& ds = data.ds;
      auto w = resolve_weights(ds, eval_opt, data.echo);
      std::vector<fusion::Method> methods;
      if (eval_methods.empty()) {
        methods = {fusion::Method::kHard, fusion::Method::kSoft, fusion::Method::kMax};
        if (w) methods.push_back(fusion::Method::kWeighted);
      } else {
        for (const auto& token : textio::split_fields(eval_methods)) {
          auto m = fusion::parse_method(token);
          if (!m) throw ConfigError("unknown fusion method '" + token + "'");
          methods.push_back(*m);
        }
      }
      RunReport rr;
      rr.n_images = ds.n_images();
      rr.seed = seed;
      rr.config = {{"command", "eval"}};
      rr.config.insert(rr.config.end(), data.echo.begin(), data.echo.end());
      std::string method_echo;
      for (auto m : methods) {
        if (!method_echo.empty()) method_echo += ',';
        method_echo += fusion::to_string(m);
      }
      rr.config.emplace_back("methods", method_echo);
      rr.weights = w;
      for (std::size_t m = 0; m < ds.n_models(); ++m) {
        std::vector<ClassLabel> predicted;
        for (std::size_t i = 0; i < ds.n_images(); ++i) {
          predicted.push_back(fusion::decide(ds.at(i, m).benign, ds.at(i, m).malignant));
        }
        rr.models.push_back(evaluate(ds.model_ids()[m], predicted, ds.scores(m), ds.labels()));
      }
      for (auto method : methods) {
        const auto fused = fusion::fuse_dataset(ds, method, w ? &*w : nullptr);
        rr.fusions.push_back(evaluate(std::string(fusion::to_string(method)),
                                      fusion::labels_of(fused), fusion::malignant_scores(fused),
                                      ds.labels()));
      }
      const auto written = write_run_report(rr, out_path);
      out << format_report_table(rr);
      out << "wrote " << written.size() << " files to " << out_path << '\n';
    } else if (*report) {
      const auto rr = read_run_report(run_dir);
      const auto table = format_report_table(rr);
      if (out_path.empty()) {
        out << table;
      } else {
        textio::write_file_atomic(out_path, table);
      }
    } else if (*explain_cmd) {
      const auto target = *parse_class_label(target_text);
      const bool cell_mode = !image_path.empty();
      const bool member_mode = !explain_in.predictions.empty();
      if (cell_mode == member_mode) {
        throw ConfigError("explain needs either --image with --provider-cmd, or --predictions "
                          "with --image-id");
      }
      if (cell_mode) {
        if (provider_cmd.empty()) throw ConfigError("--image needs --provider-cmd");
        const auto img = read_image(image_path);
        const auto [rows, cols] = explain::parse_grid_spec(grid_text);
        explain::SuperpixelGrid grid(rows, cols, img.width(), img.height());
        explain::ExternalProvider::Options popt;
        popt.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
        explain::ExternalProvider provider(provider_cmd, popt);
        const auto e = explain::superpixel_attribution(img, grid, provider, target, permutations, seed);
        textio::write_file_atomic(out_path, explain::format_explanation(e, target));
        out << "explained " << grid.n_cells() << " cells with "
            << explain::to_string(e.attribution.method) << " Shapley ("
            << provider.batches_sent() << " provider batches)\n";
      } else {
        if (image_id.empty()) throw ConfigError("--predictions needs --image-id");
        explain_in.labels.clear();
        auto data = load_inputs(explain_in);
        const auto& ids = data.ds.image_ids();
        auto it = std::lower_bound(ids.begin(), ids.end(), image_id);
        if (it == ids.end() || *it != image_id) throw ValidationError("unknown image id " + image_id);
        const auto row = data.ds.row(static_cast<std::size_t>(it - ids.begin()));
        std::vector<double> wv(data.ds.n_models(), 1.0);
        if (!explain_weights.empty()) {
          wv = fusion::parse_weights(textio::read_file(explain_weights)).for_models(data.ds.model_ids());
        }
        const auto a = explain::member_attribution(row, wv, target);
        textio::write_file_atomic(out_path,
                                  explain::format_attribution(a, data.ds.model_ids(), target));
        out << "explained " << a.phi.size() << " ensemble members\n";
      }
    } else if (*emit) {
      const TrainingConfig defaults;
      nlohmann::ordered_json doc;
      doc["batch_size"] = train.batch_size;
      doc["optimizer"] = train.optimizer;
      doc["loss"] = train.loss;
      doc["learning_rate"] = train.learning_rate;
      doc["max_epochs"] = train.max_epochs;
      doc["early_stop_patience"] = train.early_stop_patience;
      doc["output_activation"] = train.output_activation;
      doc["input_shape"] = {224, 224, 3};
      auto modified = nlohmann::ordered_json::array();
      if (train.batch_size != defaults.batch_size) modified.push_back("batch_size");
      if (train.optimizer != defaults.optimizer) modified.push_back("optimizer");
      if (train.loss != defaults.loss) modified.push_back("loss");
      if (train.learning_rate != defaults.learning_rate) modified.push_back("learning_rate");
      if (train.max_epochs != defaults.max_epochs) modified.push_back("max_epochs");
      if (train.early_stop_patience != defaults.early_stop_patience) {
        modified.push_back("early_stop_patience");
      }
      if (train.output_activation != defaults.output_activation) {
        modified.push_back("output_activation");
      }
      doc["modified_from_paper"] = std::move(modified);
      textio::write_file_atomic(out_path, doc.dump(2) + "\n");
      out << "wrote " << out_path << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace dermfuse::cli
