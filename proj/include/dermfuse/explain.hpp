#pragma once

// Shapley explanations of fused predictions: over ensemble members, and over image
// cells via an external provider.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dermfuse/fusion.hpp"
#include "dermfuse/labels.hpp"
#include "dermfuse/provider.hpp"
#include "dermfuse/raster.hpp"
#include "dermfuse/shapley.hpp"

namespace dermfuse::explain {

// Players are ensemble members. v(S) is the weighted average of the target-class
// probability over S with weights renormalized over S; v(S) = prior when S carries
// no weight (in particular v(empty) = prior).
Attribution member_attribution(std::span<const ClassProbs> row, std::span<const double> weights,
                               ClassLabel target = ClassLabel::kMalignant, double prior = 0.5);

// rows x cols tiling of an image; the last row and column absorb remainders.
class SuperpixelGrid {
 public:
  static constexpr std::size_t kMaxCells = 4096;

  // Throws ValidationError when the grid is empty, finer than the image, or has more
  // than kMaxCells cells.
  SuperpixelGrid(int rows, int cols, int image_width, int image_height);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t n_cells() const { return static_cast<std::size_t>(rows_) * cols_; }
  int cell_of(int x, int y) const;

  struct Bounds {
    int x0, y0, x1, y1;  // half-open
  };
  Bounds bounds(int cell) const;

 private:
  int rows_;
  int cols_;
  int width_;
  int height_;
};

// Parses "RxC" (e.g. "4x4"). Throws ConfigError.
std::pair<int, int> parse_grid_spec(std::string_view text);

// Copy of `img` where cells outside `keep` are replaced by `baseline`.
RasterImage mask_cells(const RasterImage& img, const SuperpixelGrid& grid, const Coalition& keep,
                       const std::array<std::uint8_t, 3>& baseline);

// Per-channel rounded mean color of an 8-bit image.
std::array<std::uint8_t, 3> mean_color(const RasterImage& img);

// Exact cutoff for superpixel games.
inline constexpr std::size_t kExactCellLimit = 12;

struct SuperpixelExplanation {
  Attribution attribution;  // one phi per cell
  int width = 0;
  int height = 0;
  std::vector<double> pixel_map;  // row-major, each pixel carries its cell's phi
};

// v(S) = provider probability of `target` for the image with cells outside S masked by
// the mean color. Exact enumeration up to kExactCellLimit cells, sampled otherwise.
SuperpixelExplanation superpixel_attribution(const RasterImage& img, const SuperpixelGrid& grid,
                                             PredictionProvider& provider, ClassLabel target,
                                             std::size_t n_permutations, std::uint64_t seed);

// JSON document: method, phi, v_empty, v_full, residual, and the signed pixel map
// with its rendering hint (positive red, negative blue).
std::string format_explanation(const SuperpixelExplanation& e, ClassLabel target);
std::string format_attribution(const Attribution& a, std::span<const std::string> players,
                               ClassLabel target);

}  // namespace dermfuse::explain
