#include "dermfuse/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dermfuse/error.hpp"

namespace dermfuse {

namespace {

void check_dims(int width, int height, std::size_t buffer) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("image dimensions must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
  }
  const auto expected = static_cast<std::size_t>(width) * height * RasterImage::kChannels;
  if (buffer != expected) {
    throw ValidationError("pixel buffer holds " + std::to_string(buffer) + " values, expected " +
                          std::to_string(expected));
  }
}

}  // namespace

RasterImage RasterImage::from_bytes(int width, int height, std::vector<std::uint8_t> pixels) {
  check_dims(width, height, pixels.size());
  RasterImage img;
  img.width_ = width;
  img.height_ = height;
  img.bytes_ = std::move(pixels);
  return img;
}

RasterImage RasterImage::from_normalized(int width, int height, std::vector<float> values) {
  check_dims(width, height, values.size());
  for (float v : values) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ValidationError("normalized pixel outside [0,1]");
  }
  RasterImage img;
  img.width_ = width;
  img.height_ = height;
  img.normalized_ = true;
  img.values_ = std::move(values);
  return img;
}

RasterImage RasterImage::filled(int width, int height, std::uint8_t r, std::uint8_t g,
                                std::uint8_t b) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(std::max(width, 0)) *
                               std::max(height, 0) * kChannels);
  for (std::size_t i = 0; i < px.size(); i += kChannels) {
    px[i] = r;
    px[i + 1] = g;
    px[i + 2] = b;
  }
  return from_bytes(width, height, std::move(px));
}

std::span<const std::uint8_t> RasterImage::bytes() const {
  if (normalized_) throw ValidationError("operation needs an 8-bit image");
  return bytes_;
}

std::span<std::uint8_t> RasterImage::bytes() {
  if (normalized_) throw ValidationError("operation needs an 8-bit image");
  return bytes_;
}

std::span<const float> RasterImage::values() const {
  if (!normalized_) throw ValidationError("operation needs a normalized image");
  return values_;
}

std::span<float> RasterImage::values() {
  if (!normalized_) throw ValidationError("operation needs a normalized image");
  return values_;
}

RasterImage RasterImage::to_bytes() const {
  if (!normalized_) return *this;
  std::vector<std::uint8_t> px(values_.size());
  std::transform(values_.begin(), values_.end(), px.begin(), [](float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  });
  return from_bytes(width_, height_, std::move(px));
}

}  // namespace dermfuse
