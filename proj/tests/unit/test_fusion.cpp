#include <doctest.h>

#include <cmath>
#include <random>

#include "dermfuse/error.hpp"
#include "dermfuse/fusion.hpp"
#include "dermfuse/predictions.hpp"

using namespace dermfuse;
using namespace dermfuse::fusion;

namespace {

constexpr auto M = ClassLabel::kMalignant;
constexpr auto B = ClassLabel::kBenign;

std::vector<ClassProbs> pv_from_malignant(std::initializer_list<double> ms) {
  std::vector<ClassProbs> out;
  for (double m : ms) out.push_back({1.0 - m, m});
  return out;
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

// Table 5 rows as fractions: acc, pre, rec, f1, auc.
const std::vector<metrics::MetricSet> kTable5 = {
    {0.8091, 0.8253, 0.7811, 0.8026, 0.90},  // ResNet-101
    {0.8390, 0.8109, 0.8792, 0.8437, 0.91},  // DenseNet-121
    {0.8140, 0.8163, 0.8049, 0.8106, 0.89},  // Inception v3
};

}  // namespace

TEST_CASE("argmax decision breaks ties toward malignant") {
  CHECK(decide(0.4, 0.6) == M);
  CHECK(decide(0.6, 0.4) == B);
  CHECK(decide(0.5, 0.5) == M);
}

TEST_CASE("hard majority vote") {
  CHECK(hard_majority_vote(std::vector{M, M, B}) == M);
  CHECK(hard_majority_vote(std::vector{B, B, B}) == B);
  // tie falls back to the soft average: (0.9 + 0.4) / 2 = 0.65 malignant
  const auto conf = pv_from_malignant({0.9, 0.4});
  CHECK(hard_majority_vote(std::vector{M, B}, conf) == M);
  CHECK(hard_majority_vote(std::vector{M, B}, pv_from_malignant({0.6, 0.1})) == B);
  CHECK(hard_majority_vote(std::vector{M, B}) == M);
  CHECK_THROWS_AS(hard_majority_vote(std::vector<ClassLabel>{}), ValidationError);

  // brute-force mode oracle over every three-voter combination
  for (int mask = 0; mask < 8; ++mask) {
    std::vector<ClassLabel> votes;
    int malignant = 0;
    for (int v = 0; v < 3; ++v) {
      const bool is_m = (mask >> v) & 1;
      votes.push_back(is_m ? M : B);
      malignant += is_m;
    }
    const auto mode = malignant >= 2 ? M : B;
    CHECK(hard_majority_vote(votes) == mode);
  }
}

TEST_CASE("hard vote scores are vote fractions") {
  const auto f = hard_vote(pv_from_malignant({0.9, 0.7, 0.2}));
  CHECK(f.m_pred == doctest::Approx(2.0 / 3.0));
  CHECK(f.b_pred == doctest::Approx(1.0 / 3.0));
  CHECK(f.label == M);
}

TEST_CASE("soft average") {
  const auto f = soft_average(pv_from_malignant({0.9, 0.2, 0.7}));
  CHECK(f.m_pred == doctest::Approx(0.6));
  CHECK(f.b_pred == doctest::Approx(0.4));
  CHECK(f.label == M);
  CHECK(soft_average(pv_from_malignant({0.5, 0.5, 0.5})).label == M);
  const auto single = soft_average(pv_from_malignant({0.3}));
  CHECK(single.m_pred == 0.3);
  CHECK(single.b_pred == 0.7);
}

TEST_CASE("max rule") {
  const auto f = max_rule(pv_from_malignant({0.6, 0.2, 0.55}));
  CHECK(f.m_pred == 0.6);
  CHECK(f.b_pred == 0.8);
  CHECK(f.label == B);
  const auto unanimous = max_rule(pv_from_malignant({1.0, 1.0, 1.0}));
  CHECK(unanimous.label == M);
  CHECK(unanimous.m_pred == 1.0);
  const auto one = pv_from_malignant({0.35});
  CHECK(max_rule(one).label == soft_average(one).label);
}

TEST_CASE("weighted average") {
  const auto pv = pv_from_malignant({0.9, 0.2, 0.7});
  const auto f = weighted_average(pv, std::vector{2.0, 1.0, 1.0});
  CHECK(f.m_pred == doctest::Approx(0.675));
  CHECK(f.label == M);
  CHECK(weighted_average(pv, std::vector{1.0, 0.0, 0.0}).m_pred == 0.9);
  CHECK_THROWS_AS(weighted_average(pv, std::vector{0.0, 0.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(weighted_average(pv, std::vector{1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(weighted_average(pv, std::vector{1.0, -1.0, 1.0}), ValidationError);
}

TEST_CASE("fusion properties on random probability vectors") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto n = 1 + gen() % 6;
    const auto pv = random_pv(gen, n);
    const auto soft = soft_average(pv);
    for (double c : {1.0, 2.7850008719783639, 0.1}) {
      const auto eq = weighted_average(pv, std::vector<double>(n, c));
      CHECK(eq == soft);
    }
    std::vector<double> w(n);
    for (auto& x : w) x = 0.01 + u(gen);
    const auto base = weighted_average(pv, w);
    for (double c : {0.5, 3.0, 1e6}) {
      auto scaled = w;
      for (auto& x : scaled) x *= c;
      const auto s = weighted_average(pv, scaled);
      CHECK(std::abs(s.m_pred - base.m_pred) < 1e-12);
      CHECK(std::abs(s.b_pred - base.b_pred) < 1e-12);
    }
    CHECK(std::abs(base.m_pred + base.b_pred - 1.0) < 1e-12);
    CHECK(std::abs(soft.m_pred + soft.b_pred - 1.0) < 1e-12);
    const auto mx = max_rule(pv);
    CHECK(mx.m_pred >= soft.m_pred);
    CHECK(mx.b_pred >= soft.b_pred);
  }
}

TEST_CASE("metric selection parsing") {
  CHECK(format_metric_selection(parse_metric_selection("auc,pre")) == "pre,auc");
  CHECK(parse_metric_selection("pre,rec,f1,auc") == default_metric_selection());
  CHECK_THROWS_AS(parse_metric_selection(""), ConfigError);
  CHECK_THROWS_AS(parse_metric_selection("pre,spec"), ConfigError);
}

TEST_CASE("tanh weights on the published metrics") {
  // oracle: 40-digit tanh sums over pre, rec, f1, auc
  const auto w = tanh_weights(kTable5);
  CHECK(std::abs(w.weights[0] - 2.7130675508003083) < 1e-12);
  CHECK(std::abs(w.weights[1] - 2.7850008719783639) < 1e-12);
  CHECK(std::abs(w.weights[2] - 2.7211330851522677) < 1e-12);
  CHECK(w.weights[1] > w.weights[2]);
  CHECK(w.weights[2] > w.weights[0]);

  const auto all5 = tanh_weights(kTable5, parse_metric_selection("acc,pre,rec,f1,auc"));
  CHECK(std::abs(all5.weights[0] - 3.3821610271803132) < 1e-12);
  CHECK(std::abs(all5.weights[1] - 3.4702799049551059) < 1e-12);
  CHECK(std::abs(all5.weights[2] - 3.3929240343297628) < 1e-12);

  const auto acc_raw = compute_weights(kTable5, parse_metric_selection("acc"), WeightTransform::kRaw);
  CHECK(acc_raw.weights[1] == 0.8390);

  const std::vector<metrics::MetricSet> ends = {{0, 0, 0, 0, 0}, {1, 1, 1, 1, 1}};
  const auto e = tanh_weights(ends);
  CHECK(e.weights[0] == 0.0);
  CHECK(std::abs(e.weights[1] - 3.0463766238230596) < 1e-12);

  const std::vector<metrics::MetricSet> bad = {{0.5, 1.2, 0.5, 0.5, 0.5}};
  CHECK_THROWS_AS(tanh_weights(bad), ValidationError);
}

TEST_CASE("tanh weights are monotone in the metrics") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    metrics::MetricSet lo{u(gen), u(gen), u(gen), u(gen), u(gen)};
    metrics::MetricSet hi{std::min(1.0, lo.acc + u(gen) * 0.1), std::min(1.0, lo.pre + u(gen) * 0.1),
                          std::min(1.0, lo.rec + u(gen) * 0.1), std::min(1.0, lo.f1 + u(gen) * 0.1),
                          std::min(1.0, lo.roc_auc + u(gen) * 0.1)};
    const std::vector<metrics::MetricSet> pair = {lo, hi};
    const auto w = tanh_weights(pair);
    CHECK(w.weights[1] >= w.weights[0]);
  }
}

TEST_CASE("weight documents round-trip") {
  auto w = tanh_weights(kTable5, default_metric_selection(), {"resnet101", "densenet121", "inception"});
  w.split = "calibration (folds 0,1)";
  const auto text = format_weights(w);
  CHECK(parse_weights(text) == w);
  CHECK(format_weights(parse_weights(text)) == text);
  const std::vector<std::string> order = {"inception", "resnet101", "densenet121"};
  const auto v = w.for_models(order);
  CHECK(v[0] == w.weights[2]);
  CHECK(v[2] == w.weights[1]);
  const std::vector<std::string> unknown = {"a", "b", "c"};
  CHECK_THROWS_AS(w.for_models(unknown), ConfigError);
  CHECK_THROWS(parse_weights("{not json"));
}

TEST_CASE("fuse_dataset") {
  const std::vector<PredictionSet> sets = {
      {"a", {{"x", {0.1, 0.9}}, {"y", {0.8, 0.2}}}},
      {"b", {{"x", {0.3, 0.7}}, {"y", {0.6, 0.4}}}},
      {"c", {{"x", {0.4, 0.6}}, {"y", {0.9, 0.1}}}},
  };
  const auto ds = align_dataset(sets);
  const auto soft = fuse_dataset(ds, Method::kSoft);
  REQUIRE(soft.size() == 2);
  CHECK(soft[0].image_id == "x");
  CHECK(labels_of(soft) == std::vector{M, B});

  WeightVector equal;
  equal.weights = {2.5, 2.5, 2.5};
  CHECK(fuse_dataset(ds, Method::kWeighted, &equal) == soft);
  CHECK_THROWS_AS(fuse_dataset(ds, Method::kWeighted), ConfigError);

  const auto hard = fuse_dataset(ds, Method::kHard);
  CHECK(labels_of(hard) == std::vector{M, B});
  CHECK(malignant_scores(hard)[0] == 1.0);
}
