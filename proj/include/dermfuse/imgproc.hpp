#pragma once

// Enhancement, geometry and augmentation operators on RGB rasters.
//
// The enhancement operators interpolate between the image and a reference image:
//   out = clamp(round(ref + factor * (orig - ref)))
// with ref = per-pixel luminance (color), 3x3 smoothing (sharpness), the image-wide
// mean luminance (contrast). Brightness is additive. Factor 1 (delta 0) is an exact
// identity for all of them.

#include <cstdint>

#include "dermfuse/raster.hpp"

namespace dermfuse::imgproc {

struct PreprocessConfig {
  double color_factor = 1.2;
  double sharpness_factor = 25.0;
  double brightness_delta = -20.0;
  double contrast_factor = 1.5;
  double crop_fraction = 0.75;
  int target_width = 224;
  int target_height = 224;

  // Throws ValidationError on negative factors or a crop fraction outside (0, 1].
  void validate() const;
};

struct AugmentConfig {
  bool horizontal_flip = true;
  bool vertical_flip = true;
  double rotation_degrees = 90.0;  // angle ~ U[-r, r]
  double zoom = 0.3;               // scale ~ U[1 - z, 1 + z]
  double shear = 0.1;              // x-shear factor ~ U[-s, s]
  double width_shift = 0.1;        // fraction of width ~ U[-s, s]
  double height_shift = 0.1;       // fraction of height ~ U[-s, s]

  void validate() const;
};

// Integer-exact ITU-R 601 luma: round(0.299 R + 0.587 G + 0.114 B).
std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b);

RasterImage color_enhance(const RasterImage& img, double factor);
// Smoothing kernel [[1,1,1],[1,5,1],[1,1,1]] / 13, rounded to 8 bits; border pixels keep
// their original value.
RasterImage sharpness_enhance(const RasterImage& img, double factor);
RasterImage brightness_shift(const RasterImage& img, double delta);
RasterImage contrast_enhance(const RasterImage& img, double factor);

// floor(fraction * w) x floor(fraction * h) window at offsets floor((w - w') / 2),
// floor((h - h') / 2). Works for either representation.
RasterImage center_crop(const RasterImage& img, double fraction);

// Bilinear with pixel-centre alignment; same size is an exact copy.
RasterImage resize_image(const RasterImage& img, int width, int height);

// byte / 255. Throws ValidationError if the image is already normalized.
RasterImage normalize_image(const RasterImage& img);

// color, sharpness, brightness, contrast, crop, resize, normalize.
RasterImage preprocess(const RasterImage& img, const PreprocessConfig& cfg = {});

// One draw of augmentation parameters.
struct AugmentParams {
  bool flip_horizontal = false;
  bool flip_vertical = false;
  double angle_degrees = 0.0;
  double scale = 1.0;
  double shear = 0.0;
  double shift_x = 0.0;  // pixels
  double shift_y = 0.0;  // pixels

  friend bool operator==(const AugmentParams&, const AugmentParams&) = default;
};

// Draws flips (p = 0.5 each), angle, zoom, shear and shifts, in that order, from the
// stream derive_seed(seed, image_index). Disabled flips and zero magnitudes still
// consume their draw so the remaining parameters do not shift.
AugmentParams sample_augment_params(const AugmentConfig& cfg, int width, int height,
                                    std::uint64_t seed, std::uint64_t image_index = 0);

// Forward map about the image centre: shift, flip, scale, shear, rotate. Output pixels
// are sampled nearest-neighbour through the inverse map; out-of-range coordinates
// clamp to the nearest edge pixel.
RasterImage apply_affine(const RasterImage& img, const AugmentParams& params);

RasterImage random_augment(const RasterImage& img, const AugmentConfig& cfg, std::uint64_t seed,
                           std::uint64_t image_index = 0);

}  // namespace dermfuse::imgproc
