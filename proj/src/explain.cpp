#include "dermfuse/explain.hpp"

#include <algorithm>
#include <cmath>

#include "dermfuse/error.hpp"
#include "dermfuse/textio.hpp"
#include "dermfuse/vendor_json.hpp"

namespace dermfuse::explain {

Attribution member_attribution(std::span<const ClassProbs> row, std::span<const double> weights,
                               ClassLabel target, double prior) {
  if (row.empty()) throw ValidationError("member attribution needs at least one model");
  if (weights.size() != row.size()) {
    throw ValidationError("weight count does not match model count");
  }
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("weights must be finite and >= 0");
  }
  if (row.size() > kMaxExactPlayers) {
    throw ValidationError("member attribution supports at most " +
                          std::to_string(kMaxExactPlayers) + " models");
  }
  std::vector<double> probs(row.size());
  std::vector<double> w(weights.begin(), weights.end());
  for (std::size_t i = 0; i < row.size(); ++i) probs[i] = row[i].of(target);

  CoalitionValueFunction v(row.size(), [probs, w, prior](const Coalition& s) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i]) continue;
      num += w[i] * probs[i];
      den += w[i];
    }
    return den > 0.0 ? num / den : prior;
  });
  return exact_shapley(v);
}

SuperpixelGrid::SuperpixelGrid(int rows, int cols, int image_width, int image_height)
    : rows_(rows), cols_(cols), width_(image_width), height_(image_height) {
  if (rows <= 0 || cols <= 0) throw ValidationError("grid needs positive rows and columns");
  if (rows > image_height || cols > image_width) {
    throw ValidationError("grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " is finer than the " + std::to_string(image_width) + "x" +
                          std::to_string(image_height) + " image");
  }
  if (n_cells() > kMaxCells) {
    throw ValidationError("grid has " + std::to_string(n_cells()) + " cells; at most " +
                          std::to_string(kMaxCells) + " are supported");
  }
}

int SuperpixelGrid::cell_of(int x, int y) const {
  const int cell_w = width_ / cols_;
  const int cell_h = height_ / rows_;
  const int col = std::min(x / cell_w, cols_ - 1);
  const int row = std::min(y / cell_h, rows_ - 1);
  return row * cols_ + col;
}

SuperpixelGrid::Bounds SuperpixelGrid::bounds(int cell) const {
  const int cell_w = width_ / cols_;
  const int cell_h = height_ / rows_;
  const int row = cell / cols_;
  const int col = cell % cols_;
  return {col * cell_w, row * cell_h, col == cols_ - 1 ? width_ : (col + 1) * cell_w,
          row == rows_ - 1 ? height_ : (row + 1) * cell_h};
}

std::pair<int, int> parse_grid_spec(std::string_view text) {
  const auto x = text.find('x');
  if (x == std::string_view::npos) {
    throw ConfigError("grid must look like RxC, got '" + std::string(text) + "'");
  }
  auto rows = textio::parse_int(text.substr(0, x));
  auto cols = textio::parse_int(text.substr(x + 1));
  if (!rows || !cols || *rows <= 0 || *cols <= 0 || *rows > 4096 || *cols > 4096) {
    throw ConfigError("grid must look like RxC with positive integers, got '" +
                      std::string(text) + "'");
  }
  return {static_cast<int>(*rows), static_cast<int>(*cols)};
}

std::array<std::uint8_t, 3> mean_color(const RasterImage& img) {
  const auto px = img.bytes();
  std::array<std::uint64_t, 3> sum{};
  for (std::size_t i = 0; i < px.size(); ++i) sum[i % 3] += px[i];
  const std::uint64_t n = px.size() / 3;
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c) out[c] = static_cast<std::uint8_t>((2 * sum[c] + n) / (2 * n));
  return out;
}

RasterImage mask_cells(const RasterImage& img, const SuperpixelGrid& grid, const Coalition& keep,
                       const std::array<std::uint8_t, 3>& baseline) {
  if (keep.size() != grid.n_cells()) throw ValidationError("coalition does not match grid");
  auto out = img.to_bytes();
  auto px = out.bytes();
  for (int cell = 0; cell < static_cast<int>(grid.n_cells()); ++cell) {
    if (keep[static_cast<std::size_t>(cell)]) continue;
    const auto b = grid.bounds(cell);
    for (int y = b.y0; y < b.y1; ++y) {
      for (int x = b.x0; x < b.x1; ++x) {
        for (int c = 0; c < 3; ++c) px[out.index(x, y, c)] = baseline[c];
      }
    }
  }
  return out;
}

SuperpixelExplanation superpixel_attribution(const RasterImage& img, const SuperpixelGrid& grid,
                                             PredictionProvider& provider, ClassLabel target,
                                             std::size_t n_permutations, std::uint64_t seed) {
  const auto base = img.to_bytes();
  const auto baseline = mean_color(base);
  CoalitionValueFunction v(
      grid.n_cells(), CoalitionValueFunction::BatchEvaluator(
                          [&](std::span<const Coalition> coalitions) {
                            std::vector<RasterImage> batch;
                            batch.reserve(coalitions.size());
                            for (const auto& s : coalitions) {
                              batch.push_back(mask_cells(base, grid, s, baseline));
                            }
                            const auto probs = predict_batch(provider, batch);
                            std::vector<double> values;
                            values.reserve(probs.size());
                            for (const auto& p : probs) values.push_back(p.of(target));
                            return values;
                          }));

  SuperpixelExplanation out;
  out.attribution = grid.n_cells() <= kExactCellLimit ? exact_shapley(v)
                                                      : sampled_shapley(v, n_permutations, seed);
  out.width = img.width();
  out.height = img.height();
  out.pixel_map.resize(static_cast<std::size_t>(out.width) * out.height);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.pixel_map[static_cast<std::size_t>(y) * out.width + x] =
          out.attribution.phi[static_cast<std::size_t>(grid.cell_of(x, y))];
    }
  }
  return out;
}

namespace {

nlohmann::ordered_json attribution_json(const Attribution& a, ClassLabel target) {
  nlohmann::ordered_json doc;
  doc["target_class"] = std::string(to_string(target));
  doc["method"] = std::string(to_string(a.method));
  if (a.method == ShapleyMethod::kSampled) {
    doc["n_permutations"] = a.n_permutations;
    doc["seed"] = a.seed;
  }
  doc["v_empty"] = a.v_empty;
  doc["v_full"] = a.v_full;
  doc["efficiency_residual"] = a.efficiency_residual;
  return doc;
}

}  // namespace

std::string format_attribution(const Attribution& a, std::span<const std::string> players,
                               ClassLabel target) {
  auto doc = attribution_json(a, target);
  doc["players"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < a.phi.size(); ++i) {
    nlohmann::ordered_json p;
    p["player"] = i < players.size() ? players[i] : std::to_string(i);
    p["phi"] = a.phi[i];
    doc["players"].push_back(std::move(p));
  }
  return doc.dump(2) + "\n";
}

std::string format_explanation(const SuperpixelExplanation& e, ClassLabel target) {
  auto doc = attribution_json(e.attribution, target);
  doc["phi"] = e.attribution.phi;
  nlohmann::ordered_json map;
  map["width"] = e.width;
  map["height"] = e.height;
  map["rendering"] = {{"positive", "red"}, {"negative", "blue"}};
  map["values"] = e.pixel_map;
  doc["attribution_map"] = std::move(map);
  return doc.dump(2) + "\n";
}

}  // namespace dermfuse::explain
