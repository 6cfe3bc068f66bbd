// Acceptance checks. Prints one PASS/FAIL line per criterion.
// Usage: acceptance [criterion...]   (all of 1-9 when none are given)
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dermfuse/cli.hpp"
#include "dermfuse/dataprep.hpp"
#include "dermfuse/explain.hpp"
#include "dermfuse/fusion.hpp"
#include "dermfuse/image_io.hpp"
#include "dermfuse/imgproc.hpp"
#include "dermfuse/metrics.hpp"
#include "dermfuse/predictions.hpp"
#include "dermfuse/provider.hpp"
#include "dermfuse/shapley.hpp"
#include "dermfuse/textio.hpp"

namespace fs = std::filesystem;
using namespace dermfuse;

namespace {

constexpr auto M = ClassLabel::kMalignant;
constexpr auto B = ClassLabel::kBenign;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

struct Scratch {
  fs::path path;
  Scratch() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("dermfuse-acceptance-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// Published table rows: pre, rec, f1 in percent, auc as a fraction.
struct PublishedRow {
  const char* model;
  double acc, pre, rec, f1, auc;
};
constexpr PublishedRow kTable5[] = {
    {"Vgg-19", 73.47, 77.68, 66.70, 71.77, 0.82},
    {"ResNet-50", 77.35, 68.87, 94.54, 79.69, 0.82},
    {"ResNet-101", 80.91, 82.53, 78.11, 80.26, 0.90},
    {"DenseNet-121", 83.90, 81.09, 87.92, 84.37, 0.91},
    {"Inception v3", 81.40, 81.63, 80.49, 81.06, 0.89},
};

Outcome f1_consistency() {
  Outcome o;
  for (const auto& r : kTable5) {
    const double f1 = metrics::f1_score(r.pre / 100.0, r.rec / 100.0);
    const double diff = std::abs(f1 - r.f1 / 100.0);
    o.check(diff <= 1e-4, std::string(r.model) + " F1 " + num(f1) + " vs " + num(r.f1 / 100.0));
    if (std::string(r.model) == "DenseNet-121") o.note("DenseNet-121 F1 " + num(f1));
  }
  return o;
}

Outcome tanh_weights_on_table() {
  Outcome o;
  // 40-digit tanh sums over pre, rec, f1, auc, computed independently of this code.
  const std::map<std::string, double> oracle = {
      {"Vgg-19", 2.5244216584321050},       {"ResNet-50", 2.6722096514954962},
      {"ResNet-101", 2.7130675508003083},   {"DenseNet-121", 2.7850008719783639},
      {"Inception v3", 2.7211330851522677},
  };
  std::vector<metrics::MetricSet> sets;
  std::vector<std::string> ids;
  for (const auto& r : kTable5) {
    sets.push_back({r.acc / 100, r.pre / 100, r.rec / 100, r.f1 / 100, r.auc});
    ids.push_back(r.model);
  }
  const auto w = fusion::tanh_weights(sets, fusion::parse_metric_selection("pre,rec,f1,auc"), ids);
  std::map<std::string, double> got;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    got[ids[i]] = w.weights[i];
    const double diff = std::abs(w.weights[i] - oracle.at(ids[i]));
    o.check(diff <= 1e-6, ids[i] + " weight " + num(w.weights[i]) + " vs oracle " + num(oracle.at(ids[i])));
  }
  o.check(got["DenseNet-121"] > got["Inception v3"] && got["Inception v3"] > got["ResNet-101"],
          "ordering DenseNet-121 > Inception v3 > ResNet-101");
  o.note("DenseNet-121 " + num(got["DenseNet-121"]) + ", Inception v3 " + num(got["Inception v3"]) +
         ", ResNet-101 " + num(got["ResNet-101"]));
  return o;
}

dataprep::DatasetManifest synthetic_source(const std::string& source, std::size_t benign,
                                           std::size_t malignant, std::size_t unknown) {
  dataprep::DatasetManifest m;
  auto add = [&](dataprep::Diagnosis d, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto id = source + "_" + std::to_string(m.records.size());
      m.records.push_back({id, "images/" + id + ".jpg", d, source});
    }
  };
  add(dataprep::Diagnosis::kBenign, benign);
  add(dataprep::Diagnosis::kMalignant, malignant);
  add(dataprep::Diagnosis::kUnknown, unknown);
  return m;
}

Outcome balancing_arithmetic() {
  Outcome o;
  const auto isic2020 = synthetic_source("isic2020", 32542, 584, 27124);
  const auto isic2019 = synthetic_source("isic2019", 20809, 4522, 0);
  const auto known2020 = dataprep::drop_unknown(isic2020);
  o.check(known2020.records.size() == 33126, "drop_unknown leaves 33,126 records");
  const auto b2020 = dataprep::downsample_balance(known2020, 1);
  const auto b2019 = dataprep::downsample_balance(dataprep::drop_unknown(isic2019), 2);
  const auto merged = dataprep::merge_manifests({b2020, b2019});
  const auto nb = merged.count(dataprep::Diagnosis::kBenign);
  const auto nm = merged.count(dataprep::Diagnosis::kMalignant);
  o.check(nb == 5106 && nm == 5106, "5,106 per class, got " + std::to_string(nb) + "/" + std::to_string(nm));
  o.check(merged.records.size() == 10212, "10,212 records in total");
  o.note(std::to_string(nb) + " + " + std::to_string(nm) + " = " + std::to_string(merged.records.size()));
  return o;
}

std::vector<ClassProbs> random_pv(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ClassProbs> pv(n);
  for (auto& p : pv) {
    const double m = u(gen);
    p = validate_probs(1.0 - m, m);
  }
  return pv;
}

Outcome fusion_correctness() {
  Outcome o;
  // (a) brute-force mode over every three-voter combination
  int agree = 0;
  for (int mask = 0; mask < 8; ++mask) {
    std::vector<ClassLabel> votes;
    std::map<ClassLabel, int> tally;
    for (int v = 0; v < 3; ++v) {
      votes.push_back((mask >> v) & 1 ? M : B);
      ++tally[votes.back()];
    }
    const auto mode = tally[M] > tally[B] ? M : B;
    agree += fusion::hard_majority_vote(votes) == mode;
  }
  o.check(agree == 8, "hard vote matches the mode on " + std::to_string(agree) + "/8 combinations");

  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int exact_equal = 0;
  double worst_scale = 0.0;
  int dominance_violations = 0;
  constexpr int kVectors = 10000;
  for (int i = 0; i < kVectors; ++i) {
    const auto n = 1 + gen() % 5;
    const auto pv = random_pv(gen, n);
    const auto soft = fusion::soft_average(pv);
    // (b) equal weights
    const auto eq = fusion::weighted_average(pv, std::vector<double>(n, 1.0));
    exact_equal += eq.m_pred == soft.m_pred && eq.b_pred == soft.b_pred && eq.label == soft.label;
    // (c) scale invariance
    std::vector<double> w(n);
    for (auto& x : w) x = 0.05 + u(gen);
    const auto base = fusion::weighted_average(pv, w);
    for (double c : {0.5, 3.0, 1e6}) {
      auto scaled = w;
      for (auto& x : scaled) x *= c;
      const auto s = fusion::weighted_average(pv, scaled);
      worst_scale = std::max({worst_scale, std::abs(s.m_pred - base.m_pred), std::abs(s.b_pred - base.b_pred)});
    }
    // (d) max dominates the mean per class
    const auto mx = fusion::max_rule(pv);
    dominance_violations += mx.m_pred < soft.m_pred || mx.b_pred < soft.b_pred;
  }
  o.check(exact_equal == kVectors, "equal weights equal soft exactly on " + std::to_string(exact_equal) + "/" +
                                       std::to_string(kVectors));
  o.check(worst_scale <= 1e-12, "scale invariance, worst deviation " + num(worst_scale));
  o.check(dominance_violations == 0, std::to_string(dominance_violations) + " max-rule dominance violations");
  o.note("8/8 modes, " + std::to_string(exact_equal) + " exact equal-weight matches, scale deviation " +
         num(worst_scale));
  return o;
}

double pairwise_auc(const std::vector<double>& s, const std::vector<ClassLabel>& y) {
  double credit = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != M) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != B) continue;
      pairs += 1.0;
      credit += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return credit / pairs;
}

Outcome auc_oracle() {
  Outcome o;
  std::mt19937_64 gen(77);
  double worst = 0.0;
  constexpr int kInstances = 500;
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t n = 2 + gen() % 199;
    const auto levels = 2 + gen() % 20;  // few distinct values, so ties are common
    std::vector<double> s(n);
    std::vector<ClassLabel> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(gen() % levels) / static_cast<double>(levels);
      y[i] = gen() & 1 ? M : B;
    }
    y[0] = M;
    y[1] = B;
    worst = std::max(worst, std::abs(metrics::roc_auc(s, y) - pairwise_auc(s, y)));
  }
  o.check(worst <= 1e-9, "worst |trapezoid - pairwise| " + num(worst));
  o.note(std::to_string(kInstances) + " instances, worst difference " + num(worst));
  return o;
}

std::uint32_t mask_of(const explain::Coalition& s) {
  std::uint32_t m = 0;
  for (std::size_t i = 0; i < s.size(); ++i) m |= static_cast<std::uint32_t>(s[i]) << i;
  return m;
}

explain::CoalitionValueFunction table_game(std::vector<double> t, std::size_t n) {
  return explain::CoalitionValueFunction(n, [t = std::move(t)](const explain::Coalition& s) {
    return t[mask_of(s)];
  });
}

Outcome shapley_axioms() {
  Outcome o;
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_eff = 0.0, worst_lin = 0.0, worst_sym = 0.0, worst_dummy = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + gen() % 8;  // 3..10, so the dummy is not one of the twins
    const std::size_t size = std::size_t{1} << n;
    std::vector<double> t1(size), t2(size);
    // players 0 and 1 are interchangeable; player n-1 is a dummy
    std::vector<double> base(size);
    for (auto& x : base) x = u(gen);
    for (std::size_t m = 0; m < size; ++m) {
      auto canon = m & ~(std::size_t{1} << (n - 1));
      if (((canon & 1) != 0) != ((canon & 2) != 0)) canon = (canon & ~std::size_t{3}) | 1;
      t1[m] = base[canon];
      t2[m] = u(gen);
    }
    std::vector<double> t12(size);
    for (std::size_t m = 0; m < size; ++m) t12[m] = t1[m] + t2[m];
    const auto a1 = explain::exact_shapley(table_game(t1, n));
    const auto a2 = explain::exact_shapley(table_game(t2, n));
    const auto a12 = explain::exact_shapley(table_game(t12, n));
    const double total = std::accumulate(a1.phi.begin(), a1.phi.end(), 0.0);
    worst_eff = std::max(worst_eff, std::abs(total - (t1.back() - t1.front())));
    worst_sym = std::max(worst_sym, std::abs(a1.phi[0] - a1.phi[1]));
    worst_dummy = std::max(worst_dummy, std::abs(a1.phi[n - 1]));
    for (std::size_t i = 0; i < n; ++i) {
      worst_lin = std::max(worst_lin, std::abs(a12.phi[i] - a1.phi[i] - a2.phi[i]));
    }
  }
  o.check(worst_eff <= 1e-9, "efficiency residual " + num(worst_eff));
  o.check(worst_sym <= 1e-9, "symmetry gap " + num(worst_sym));
  o.check(worst_dummy == 0.0, "dummy attribution " + num(worst_dummy));
  o.check(worst_lin <= 1e-9, "linearity gap " + num(worst_lin));

  // sampled against exact on a fixed ten-player game
  std::mt19937_64 fixed(12345);
  std::vector<double> t(std::size_t{1} << 10);
  for (auto& x : t) x = u(fixed);
  const auto game = table_game(t, 10);
  const auto exact = explain::exact_shapley(game);
  const auto sampled = explain::sampled_shapley(game, 20000, 7);
  const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
  const double range = *hi - *lo;
  double worst = 0.0;
  for (std::size_t i = 0; i < 10; ++i) worst = std::max(worst, std::abs(sampled.phi[i] - exact.phi[i]));
  o.check(worst <= 0.02 * range, "sampled error " + num(worst) + " > 0.02 * range " + num(0.02 * range));
  o.note("efficiency " + num(worst_eff) + ", linearity " + num(worst_lin) + ", sampled error " + num(worst) +
         " (bound " + num(0.02 * range) + ")");
  return o;
}

Outcome image_pipeline() {
  Outcome o;
  std::mt19937 gen(5);
  std::vector<std::uint8_t> px(224 * 224 * 3);
  for (auto& v : px) v = static_cast<std::uint8_t>(gen() & 0xff);
  const auto img = RasterImage::from_bytes(224, 224, px);

  bool neutral = imgproc::color_enhance(img, 1.0) == img && imgproc::sharpness_enhance(img, 1.0) == img &&
                 imgproc::brightness_shift(img, 0.0) == img && imgproc::contrast_enhance(img, 1.0) == img &&
                 imgproc::center_crop(img, 1.0) == img && imgproc::resize_image(img, 224, 224) == img;
  o.check(neutral, "neutral-parameter identities");

  const auto color = imgproc::color_enhance(RasterImage::from_bytes(1, 1, {200, 100, 50}), 1.2);
  const int cr = color.byte(0, 0, 0), cg = color.byte(0, 0, 1), cb = color.byte(0, 0, 2);
  o.check(cr == 214 && cg == 94 && cb == 34,
          "color (200,100,50)@1.2 expected (214,94,34), got (" + std::to_string(cr) + "," +
              std::to_string(cg) + "," + std::to_string(cb) + "); luminance of that pixel is " +
              std::to_string(imgproc::luminance(200, 100, 50)) + ", not 128");

  const auto contrast =
      imgproc::contrast_enhance(RasterImage::from_bytes(2, 1, {100, 100, 100, 200, 200, 200}), 1.5);
  const int c0 = contrast.byte(0, 0, 0), c1 = contrast.byte(1, 0, 0);
  o.check(c0 == 25 && c1 == 225, "contrast (100,200)@1.5 expected (25,225), got (" + std::to_string(c0) +
                                     "," + std::to_string(c1) + ") with mean 150");

  const auto bright = imgproc::brightness_shift(RasterImage::filled(1, 1, 10, 10, 10), -20.0);
  o.check(bright.byte(0, 0, 0) == 0, "brightness 10@-20 -> 0");

  Scratch dir;
  write_png(dir.path / "in.png", img);
  const auto a = imgproc::preprocess(read_image(dir.path / "in.png"));
  const auto b = imgproc::preprocess(read_image(dir.path / "in.png"));
  write_png(dir.path / "a.png", a);
  write_png(dir.path / "b.png", b);
  o.check(a == b && textio::read_file(dir.path / "a.png") == textio::read_file(dir.path / "b.png"),
          "default config deterministic on a 224x224 PNG");
  o.check(a.width() == 224 && a.height() == 224 && a.normalized(), "default output is normalized 224x224");

  const auto crop = imgproc::center_crop(img, 0.75);
  o.check(crop.width() == 168 && crop.height() == 168, "crop 224@0.75 -> 168x168");
  o.note("color -> (" + std::to_string(cr) + "," + std::to_string(cg) + "," + std::to_string(cb) +
         "), contrast -> (" + std::to_string(c0) + "," + std::to_string(c1) + ")");
  return o;
}

int cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream sout, serr;
  const int code = cli::run_command(args, sout, serr);
  if (out) *out = sout.str();
  if (code != 0) std::cerr << "  command failed (" << code << "): " << serr.str();
  return code;
}

// Runs the fixture pipeline inside `work`; returns false when a command fails.
bool run_pipeline(const fs::path& work, std::string* table) {
  const fs::path fx = fs::path(DERMFUSE_FIXTURE_DIR) / "pipeline";
  const auto s = [](const fs::path& p) { return p.string(); };
  const std::vector<std::string> preds = {
      "--predictions", "densenet=" + s(fx / "densenet.csv"), "--predictions",
      "inception=" + s(fx / "inception.csv"), "--predictions", "resnet=" + s(fx / "resnet.csv"),
      "--manifest", s(work / "balanced.csv"), "--folds", s(work / "folds.csv")};
  auto with = [&](std::vector<std::string> head, const std::string& fold) {
    head.insert(head.end(), preds.begin(), preds.end());
    head.insert(head.end(), {"--fold", fold});
    return head;
  };
  return cli({"balance", "--manifest", s(fx / "manifest.csv"), "--seed", "11", "--out",
              s(work / "balanced.csv")}) == 0 &&
         cli({"kfold", "--manifest", s(work / "balanced.csv"), "--k", "4", "--seed", "11", "--out",
              s(work / "folds.csv")}) == 0 &&
         cli(with({"weights", "--out", s(work / "weights.json")}, "0,1")) == 0 &&
         cli(with({"fuse", "--method", "weighted", "--weights", s(work / "weights.json"), "--out",
                   s(work / "fused.csv")}, "2,3")) == 0 &&
         cli(with({"eval", "--weights", s(work / "weights.json"), "--seed", "11", "--out",
                   s(work / "run")}, "2,3")) == 0 &&
         cli({"report", "--run-dir", s(work / "run"), "--out", s(work / "table.txt")}, table) == 0;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = textio::read_file(e.path());
  }
  return files;
}

Outcome pipeline_determinism() {
  Outcome o;
  Scratch scratch;
  const auto work = scratch.path / "work";
  fs::create_directories(work);
  if (!run_pipeline(work, nullptr)) {
    o.check(false, "first pipeline run");
    return o;
  }
  const auto first = snapshot(work);
  fs::remove_all(work);
  fs::create_directories(work);
  if (!run_pipeline(work, nullptr)) {
    o.check(false, "second pipeline run");
    return o;
  }
  const auto second = snapshot(work);
  o.check(first.size() == second.size() && first.size() >= 10, "same artifact set");
  std::size_t identical = 0;
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    const bool same = it != second.end() && it->second == bytes;
    identical += same;
    o.check(same, name + " differs between runs");
  }

  const auto m = dataprep::load_manifest(work / "balanced.csv");
  const auto folds = dataprep::load_folds(work / "folds.csv").as_map();
  std::map<std::pair<int, dataprep::Diagnosis>, int> tally;
  for (const auto& r : m.records) ++tally[{folds.at(r.image_id), r.label}];
  double worst = 0.0;
  for (auto cls : {dataprep::Diagnosis::kBenign, dataprep::Diagnosis::kMalignant}) {
    const double expected = static_cast<double>(m.count(cls)) / 4.0;
    for (int f = 0; f < 4; ++f) worst = std::max(worst, std::abs(tally[{f, cls}] - expected));
  }
  o.check(worst < 1.0, "per-fold class count deviation " + num(worst));
  o.note(std::to_string(identical) + "/" + std::to_string(first.size()) + " artifacts identical, " +
         std::to_string(m.records.size()) + " balanced records, fold deviation " + num(worst));
  return o;
}

Outcome explain_protocol() {
  Outcome o;
  const std::string fixtures = DERMFUSE_FIXTURE_DIR;
  std::vector<std::uint8_t> px(16 * 12 * 3);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>((i * 37) % 251);
  const auto img = RasterImage::from_bytes(16, 12, px);
  const explain::SuperpixelGrid grid(2, 2, img.width(), img.height());

  explain::ExternalProvider echo("sh '" + fixtures + "/echo_provider.sh'");
  const auto e = explain::superpixel_attribution(img, grid, echo, M, 100, 1);
  const auto& a = e.attribution;
  o.check(a.method == explain::ShapleyMethod::kExact, "exact path on a 4-cell grid");
  o.check(std::abs(a.efficiency_residual) <= 1e-9, "echo efficiency residual " + num(a.efficiency_residual));
  bool zero = std::all_of(a.phi.begin(), a.phi.end(), [](double p) { return p == 0.0; });
  o.check(zero, "constant-output provider gives all-zero attributions");

  explain::ExternalProvider bright(DERMFUSE_BRIGHTNESS_PROVIDER);
  const auto eb = explain::superpixel_attribution(img, grid, bright, M, 100, 1);
  const double total = std::accumulate(eb.attribution.phi.begin(), eb.attribution.phi.end(), 0.0);
  const double residual = std::abs(total - (eb.attribution.v_full - eb.attribution.v_empty));
  o.check(residual <= 1e-9, "pixel-reading provider efficiency residual " + num(residual));
  o.check(std::any_of(eb.attribution.phi.begin(), eb.attribution.phi.end(), [](double p) { return p != 0.0; }),
          "pixel-reading provider gives non-zero attributions");
  o.note("echo phi all zero: " + std::string(zero ? "yes" : "no") + ", pixel provider residual " + num(residual) +
         ", " + std::to_string(echo.batches_sent() + bright.batches_sent()) + " provider batches");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "published F1 consistency", f1_consistency},
      {2, "tanh weights against the high-precision oracle", tanh_weights_on_table},
      {3, "balancing arithmetic 5,106 + 5,106 = 10,212", balancing_arithmetic},
      {4, "fusion correctness", fusion_correctness},
      {5, "ROC-AUC equals the pairwise statistic", auc_oracle},
      {6, "Shapley axioms and sampling accuracy", shapley_axioms},
      {7, "image pipeline identities and worked examples", image_pipeline},
      {8, "end-to-end determinism of the fixture pipeline", pipeline_determinism},
      {9, "explain provider protocol", explain_protocol},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start).count();
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " [" << ms
              << " ms] " << detail << '\n';
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
