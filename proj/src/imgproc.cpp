#include "dermfuse/imgproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "dermfuse/error.hpp"
#include "dermfuse/random.hpp"

namespace dermfuse::imgproc {

namespace {

std::uint8_t clamp_round(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

std::uint8_t blend(double ref, double orig, double factor) {
  return clamp_round(ref + factor * (orig - ref));
}

void check_factor(double factor, const char* what) {
  if (!std::isfinite(factor) || factor < 0.0) {
    throw ValidationError(std::string(what) + " factor must be finite and >= 0");
  }
}

// Builds a width x height image whose pixel (x, y) copies the source pixel starting at
// buffer offset source_index(x, y). Keeps the input representation.
template <typename IndexFn>
RasterImage remap(const RasterImage& img, int width, int height, IndexFn&& source_index) {
  const auto n = static_cast<std::size_t>(width) * height * RasterImage::kChannels;
  if (img.normalized()) {
    auto src = img.values();
    std::vector<float> out(n);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const auto s = source_index(x, y);
        const auto d = (static_cast<std::size_t>(y) * width + x) * RasterImage::kChannels;
        for (int c = 0; c < RasterImage::kChannels; ++c) out[d + c] = src[s + c];
      }
    }
    return RasterImage::from_normalized(width, height, std::move(out));
  }
  auto src = img.bytes();
  std::vector<std::uint8_t> out(n);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto s = source_index(x, y);
      const auto d = (static_cast<std::size_t>(y) * width + x) * RasterImage::kChannels;
      for (int c = 0; c < RasterImage::kChannels; ++c) out[d + c] = src[s + c];
    }
  }
  return RasterImage::from_bytes(width, height, std::move(out));
}

}  // namespace

void PreprocessConfig::validate() const {
  check_factor(color_factor, "color");
  check_factor(sharpness_factor, "sharpness");
  check_factor(contrast_factor, "contrast");
  if (!std::isfinite(brightness_delta)) throw ValidationError("brightness delta must be finite");
  if (!(crop_fraction > 0.0 && crop_fraction <= 1.0)) {
    throw ValidationError("crop fraction must be in (0, 1]");
  }
  if (target_width <= 0 || target_height <= 0) {
    throw ValidationError("target size must be positive");
  }
}

void AugmentConfig::validate() const {
  for (double v : {rotation_degrees, zoom, shear, width_shift, height_shift}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError("augmentation magnitudes must be finite and >= 0");
    }
  }
  if (zoom >= 1.0) throw ValidationError("zoom must be below 1 so the scale stays positive");
}

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

RasterImage color_enhance(const RasterImage& img, double factor) {
  check_factor(factor, "color");
  auto out = img;
  auto px = out.bytes();
  for (std::size_t i = 0; i < px.size(); i += RasterImage::kChannels) {
    const double gray = luminance(px[i], px[i + 1], px[i + 2]);
    for (int c = 0; c < RasterImage::kChannels; ++c) px[i + c] = blend(gray, px[i + c], factor);
  }
  return out;
}

RasterImage sharpness_enhance(const RasterImage& img, double factor) {
  check_factor(factor, "sharpness");
  const auto src = img.bytes();
  auto out = img;
  auto dst = out.bytes();
  const int w = img.width();
  const int h = img.height();
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      for (int c = 0; c < RasterImage::kChannels; ++c) {
        int sum = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int weight = (dx == 0 && dy == 0) ? 5 : 1;
            sum += weight * src[img.index(x + dx, y + dy, c)];
          }
        }
        const double smooth = (2 * sum + 13) / 26;  // round(sum / 13)
        const auto i = img.index(x, y, c);
        dst[i] = blend(smooth, src[i], factor);
      }
    }
  }
  return out;
}

RasterImage brightness_shift(const RasterImage& img, double delta) {
  if (!std::isfinite(delta)) throw ValidationError("brightness delta must be finite");
  auto out = img;
  for (auto& v : out.bytes()) v = clamp_round(v + delta);
  return out;
}

RasterImage contrast_enhance(const RasterImage& img, double factor) {
  check_factor(factor, "contrast");
  auto out = img;
  auto px = out.bytes();
  std::uint64_t sum = 0;
  const std::uint64_t n = px.size() / RasterImage::kChannels;
  for (std::size_t i = 0; i < px.size(); i += RasterImage::kChannels) {
    sum += luminance(px[i], px[i + 1], px[i + 2]);
  }
  const double mean = static_cast<double>((2 * sum + n) / (2 * n));  // round(sum / n)
  for (auto& v : px) v = blend(mean, v, factor);
  return out;
}

RasterImage center_crop(const RasterImage& img, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("crop fraction must be in (0, 1]");
  }
  // The epsilon keeps products such as 0.29 * 100 from flooring one pixel short.
  const int w = static_cast<int>(std::floor(fraction * img.width() + 1e-9));
  const int h = static_cast<int>(std::floor(fraction * img.height() + 1e-9));
  if (w == 0 || h == 0) {
    throw ValidationError("crop of " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()) + " at " + std::to_string(fraction) +
                          " leaves no pixels");
  }
  const int x0 = (img.width() - w) / 2;
  const int y0 = (img.height() - h) / 2;
  return remap(img, w, h, [&](int x, int y) { return img.index(x0 + x, y0 + y, 0); });
}

RasterImage resize_image(const RasterImage& img, int width, int height) {
  if (width <= 0 || height <= 0) throw ValidationError("resize target must be positive");
  if (width == img.width() && height == img.height()) return img;

  struct Tap {
    int lo;
    int hi;
    double t;
  };
  auto taps = [](int dst, int src) {
    std::vector<Tap> out(static_cast<std::size_t>(dst));
    const double scale = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
      const double pos = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(src - 1));
      const int lo = static_cast<int>(std::floor(pos));
      out[static_cast<std::size_t>(i)] = {lo, std::min(lo + 1, src - 1), pos - lo};
    }
    return out;
  };
  const auto xs = taps(width, img.width());
  const auto ys = taps(height, img.height());

  const auto n = static_cast<std::size_t>(width) * height * RasterImage::kChannels;
  std::vector<double> out(n);
  for (int y = 0; y < height; ++y) {
    const auto& ty = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      const auto& tx = xs[static_cast<std::size_t>(x)];
      for (int c = 0; c < RasterImage::kChannels; ++c) {
        auto v = [&](int sx, int sy) {
          const auto i = img.index(sx, sy, c);
          return img.normalized() ? static_cast<double>(img.values()[i])
                                  : static_cast<double>(img.bytes()[i]);
        };
        const double top = v(tx.lo, ty.lo) * (1 - tx.t) + v(tx.hi, ty.lo) * tx.t;
        const double bottom = v(tx.lo, ty.hi) * (1 - tx.t) + v(tx.hi, ty.hi) * tx.t;
        out[(static_cast<std::size_t>(y) * width + x) * RasterImage::kChannels + c] =
            top * (1 - ty.t) + bottom * ty.t;
      }
    }
  }
  if (img.normalized()) {
    std::vector<float> values(n);
    std::transform(out.begin(), out.end(), values.begin(), [](double v) {
      return static_cast<float>(std::clamp(v, 0.0, 1.0));
    });
    return RasterImage::from_normalized(width, height, std::move(values));
  }
  std::vector<std::uint8_t> px(n);
  std::transform(out.begin(), out.end(), px.begin(), clamp_round);
  return RasterImage::from_bytes(width, height, std::move(px));
}

RasterImage normalize_image(const RasterImage& img) {
  if (img.normalized()) throw ValidationError("image is already normalized");
  auto px = img.bytes();
  std::vector<float> values(px.size());
  std::transform(px.begin(), px.end(), values.begin(),
                 [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
  return RasterImage::from_normalized(img.width(), img.height(), std::move(values));
}

RasterImage preprocess(const RasterImage& img, const PreprocessConfig& cfg) {
  cfg.validate();
  auto out = color_enhance(img, cfg.color_factor);
  out = sharpness_enhance(out, cfg.sharpness_factor);
  out = brightness_shift(out, cfg.brightness_delta);
  out = contrast_enhance(out, cfg.contrast_factor);
  out = center_crop(out, cfg.crop_fraction);
  out = resize_image(out, cfg.target_width, cfg.target_height);
  return normalize_image(out);
}

AugmentParams sample_augment_params(const AugmentConfig& cfg, int width, int height,
                                    std::uint64_t seed, std::uint64_t image_index) {
  cfg.validate();
  Rng rng(derive_seed(seed, image_index));
  AugmentParams p;
  const bool h = rng.coin();
  const bool v = rng.coin();
  p.flip_horizontal = cfg.horizontal_flip && h;
  p.flip_vertical = cfg.vertical_flip && v;
  p.angle_degrees = rng.uniform(-cfg.rotation_degrees, cfg.rotation_degrees);
  p.scale = rng.uniform(1.0 - cfg.zoom, 1.0 + cfg.zoom);
  p.shear = rng.uniform(-cfg.shear, cfg.shear);
  p.shift_x = rng.uniform(-cfg.width_shift, cfg.width_shift) * width;
  p.shift_y = rng.uniform(-cfg.height_shift, cfg.height_shift) * height;
  return p;
}

RasterImage apply_affine(const RasterImage& img, const AugmentParams& p) {
  if (!(p.scale > 0.0)) throw ValidationError("affine scale must be positive");
  using Mat = std::array<double, 4>;  // row-major 2x2
  auto mul = [](const Mat& a, const Mat& b) {
    return Mat{a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
               a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
  };
  const double theta = p.angle_degrees * std::numbers::pi / 180.0;
  const Mat rotate = {std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta)};
  const Mat shear = {1.0, p.shear, 0.0, 1.0};
  const Mat scale = {p.scale, 0.0, 0.0, p.scale};
  const Mat flip = {p.flip_horizontal ? -1.0 : 1.0, 0.0, 0.0, p.flip_vertical ? -1.0 : 1.0};
  const Mat forward = mul(rotate, mul(shear, mul(scale, flip)));
  const double det = forward[0] * forward[3] - forward[1] * forward[2];
  const Mat inverse = {forward[3] / det, -forward[1] / det, -forward[2] / det, forward[0] / det};

  const int w = img.width();
  const int h = img.height();
  const double cx = w / 2.0;
  const double cy = h / 2.0;
  return remap(img, w, h, [&](int x, int y) {
    // Forward: q = A (p - c + shift) + c, so p = A^-1 (q - c) + c - shift.
    const double qx = x + 0.5 - cx;
    const double qy = y + 0.5 - cy;
    const double px = inverse[0] * qx + inverse[1] * qy + cx - p.shift_x;
    const double py = inverse[2] * qx + inverse[3] * qy + cy - p.shift_y;
    const int sx = static_cast<int>(std::floor(std::clamp(px, 0.0, w - 0.5)));
    const int sy = static_cast<int>(std::floor(std::clamp(py, 0.0, h - 0.5)));
    return img.index(sx, sy, 0);
  });
}

RasterImage random_augment(const RasterImage& img, const AugmentConfig& cfg, std::uint64_t seed,
                           std::uint64_t image_index) {
  return apply_affine(img, sample_augment_params(cfg, img.width(), img.height(), seed, image_index));
}

}  // namespace dermfuse::imgproc
