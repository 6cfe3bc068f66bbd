#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dermfuse {

// Interleaved RGB raster, either 8-bit or normalized to [0, 1].
class RasterImage {
 public:
  static constexpr int kChannels = 3;

  RasterImage() = default;

  // Throws ValidationError when dimensions are not positive or the buffer size is wrong.
  static RasterImage from_bytes(int width, int height, std::vector<std::uint8_t> pixels);
  static RasterImage from_normalized(int width, int height, std::vector<float> values);
  static RasterImage filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  int width() const { return width_; }
  int height() const { return height_; }
  bool normalized() const { return normalized_; }
  std::size_t size() const { return static_cast<std::size_t>(width_) * height_ * kChannels; }

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  // 8-bit access; throws ValidationError on a normalized image.
  std::span<const std::uint8_t> bytes() const;
  std::span<std::uint8_t> bytes();
  std::uint8_t byte(int x, int y, int c) const { return bytes_[index(x, y, c)]; }

  // Normalized access; throws ValidationError on an 8-bit image.
  std::span<const float> values() const;
  std::span<float> values();

  // Channel value scaled to [0, 1] regardless of representation.
  double unit(int x, int y, int c) const {
    const auto i = index(x, y, c);
    return normalized_ ? static_cast<double>(values_[i]) : bytes_[i] / 255.0;
  }

  // 8-bit copy: normalized values are scaled by 255 and rounded.
  RasterImage to_bytes() const;

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  bool normalized_ = false;
  std::vector<std::uint8_t> bytes_;
  std::vector<float> values_;
};

}  // namespace dermfuse
