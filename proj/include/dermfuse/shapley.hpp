#pragma once

// Shapley attribution for cooperative games given by a coalition value function.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace dermfuse::explain {

// Membership flags, one per player.
using Coalition = std::vector<bool>;

class CoalitionValueFunction {
 public:
  using Evaluator = std::function<double(const Coalition&)>;
  // Evaluates several coalitions at once (one value per coalition, same order).
  using BatchEvaluator = std::function<std::vector<double>(std::span<const Coalition>)>;

  CoalitionValueFunction(std::size_t n_players, Evaluator evaluator);
  CoalitionValueFunction(std::size_t n_players, BatchEvaluator evaluator);

  std::size_t n_players() const { return n_players_; }
  double operator()(const Coalition& s) const;
  std::vector<double> evaluate(std::span<const Coalition> coalitions) const;

 private:
  std::size_t n_players_;
  BatchEvaluator batch_;
};

enum class ShapleyMethod { kExact, kSampled };
std::string_view to_string(ShapleyMethod method);

struct Attribution {
  std::vector<double> phi;
  double v_empty = 0.0;
  double v_full = 0.0;
  ShapleyMethod method = ShapleyMethod::kExact;
  std::size_t n_permutations = 0;  // sampled only
  std::uint64_t seed = 0;          // sampled only
  // sum(phi) - (v_full - v_empty)
  double efficiency_residual = 0.0;
};

inline constexpr std::size_t kMaxExactPlayers = 20;

// Full enumeration of the 2^n coalitions. Throws ValidationError above kMaxExactPlayers.
Attribution exact_shapley(const CoalitionValueFunction& v);

// Mean marginal contribution over uniformly drawn permutations. Permutation p uses the
// stream derive_seed(seed, p), so results do not depend on batching.
Attribution sampled_shapley(const CoalitionValueFunction& v, std::size_t n_permutations,
                            std::uint64_t seed);

}  // namespace dermfuse::explain
