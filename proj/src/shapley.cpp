#include "dermfuse/shapley.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

#include "dermfuse/error.hpp"
#include "dermfuse/random.hpp"

namespace dermfuse::explain {

namespace {

// Coalitions are evaluated in chunks to bound memory and provider batch size.
constexpr std::size_t kChunk = 4096;

Coalition coalition_from_mask(std::uint32_t mask, std::size_t n) {
  Coalition s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = (mask >> i) & 1u;
  return s;
}

}  // namespace

CoalitionValueFunction::CoalitionValueFunction(std::size_t n_players, Evaluator evaluator)
    : n_players_(n_players) {
  if (n_players == 0) throw ValidationError("a game needs at least one player");
  if (!evaluator) throw ValidationError("missing coalition evaluator");
  batch_ = [f = std::move(evaluator)](std::span<const Coalition> coalitions) {
    std::vector<double> out;
    out.reserve(coalitions.size());
    for (const auto& s : coalitions) out.push_back(f(s));
    return out;
  };
}

CoalitionValueFunction::CoalitionValueFunction(std::size_t n_players, BatchEvaluator evaluator)
    : n_players_(n_players), batch_(std::move(evaluator)) {
  if (n_players == 0) throw ValidationError("a game needs at least one player");
  if (!batch_) throw ValidationError("missing coalition evaluator");
}

double CoalitionValueFunction::operator()(const Coalition& s) const {
  return evaluate(std::span<const Coalition>(&s, 1)).front();
}

std::vector<double> CoalitionValueFunction::evaluate(std::span<const Coalition> coalitions) const {
  auto values = batch_(coalitions);
  if (values.size() != coalitions.size()) {
    throw ValidationError("evaluator returned " + std::to_string(values.size()) +
                          " values for " + std::to_string(coalitions.size()) + " coalitions");
  }
  return values;
}

std::string_view to_string(ShapleyMethod method) {
  return method == ShapleyMethod::kExact ? "exact" : "sampled";
}

Attribution exact_shapley(const CoalitionValueFunction& v) {
  const auto n = v.n_players();
  if (n > kMaxExactPlayers) {
    throw ValidationError("exact Shapley enumerates 2^n coalitions and supports at most " +
                          std::to_string(kMaxExactPlayers) + " players (got " +
                          std::to_string(n) + "); use sampled_shapley instead");
  }
  const std::uint32_t n_masks = 1u << n;
  std::vector<double> value(n_masks);
  std::vector<Coalition> chunk;
  for (std::uint32_t start = 0; start < n_masks; start += kChunk) {
    const auto end = std::min<std::uint64_t>(n_masks, std::uint64_t{start} + kChunk);
    chunk.clear();
    for (std::uint32_t mask = start; mask < end; ++mask) chunk.push_back(coalition_from_mask(mask, n));
    const auto values = v.evaluate(chunk);
    std::copy(values.begin(), values.end(), value.begin() + start);
  }

  // |S|! (n - |S| - 1)! / n! = 1 / (n * C(n - 1, |S|))
  std::vector<double> weight(n);
  double binom = 1.0;
  for (std::size_t s = 0; s < n; ++s) {
    weight[s] = 1.0 / (static_cast<double>(n) * binom);
    binom = binom * static_cast<double>(n - 1 - s) / static_cast<double>(s + 1);
  }

  Attribution out;
  out.method = ShapleyMethod::kExact;
  out.phi.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bit = 1u << i;
    double phi = 0.0;
    for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
      if (mask & bit) continue;
      phi += weight[static_cast<std::size_t>(std::popcount(mask))] * (value[mask | bit] - value[mask]);
    }
    out.phi[i] = phi;
  }
  out.v_empty = value.front();
  out.v_full = value.back();
  out.efficiency_residual =
      std::accumulate(out.phi.begin(), out.phi.end(), 0.0) - (out.v_full - out.v_empty);
  return out;
}

Attribution sampled_shapley(const CoalitionValueFunction& v, std::size_t n_permutations,
                            std::uint64_t seed) {
  if (n_permutations == 0) throw ValidationError("sampled Shapley needs at least one permutation");
  const auto n = v.n_players();

  Attribution out;
  out.method = ShapleyMethod::kSampled;
  out.n_permutations = n_permutations;
  out.seed = seed;
  out.phi.assign(n, 0.0);

  // Each permutation contributes the chain of prefix coalitions, empty to full.
  const std::size_t per_batch = std::max<std::size_t>(1, kChunk / (n + 1));
  std::vector<std::size_t> order(n);
  std::vector<std::vector<std::size_t>> orders;
  std::vector<Coalition> chain;
  for (std::size_t first = 0; first < n_permutations; first += per_batch) {
    const auto last = std::min(n_permutations, first + per_batch);
    orders.clear();
    chain.clear();
    for (std::size_t p = first; p < last; ++p) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(derive_seed(seed, p));
      rng.shuffle(std::span<std::size_t>(order));
      orders.push_back(order);
      Coalition s(n, false);
      chain.push_back(s);
      for (auto player : order) {
        s[player] = true;
        chain.push_back(s);
      }
    }
    const auto values = v.evaluate(chain);
    for (std::size_t p = 0; p < orders.size(); ++p) {
      const double* vals = values.data() + p * (n + 1);
      if (first == 0 && p == 0) {
        out.v_empty = vals[0];
        out.v_full = vals[n];
      }
      for (std::size_t step = 0; step < n; ++step) {
        out.phi[orders[p][step]] += vals[step + 1] - vals[step];
      }
    }
  }
  for (auto& phi : out.phi) phi /= static_cast<double>(n_permutations);
  out.efficiency_residual =
      std::accumulate(out.phi.begin(), out.phi.end(), 0.0) - (out.v_full - out.v_empty);
  return out;
}

}  // namespace dermfuse::explain
