#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace facademap {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit RGB raster, row-major, top-left origin.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // 3 bytes per pixel

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {0, 0, 0});

  bool empty() const { return width <= 0 || height <= 0; }
  std::size_t index(int x, int y) const { return 3 * (static_cast<std::size_t>(y) * width + x); }
  Rgb at(int x, int y) const {
    const auto i = index(x, y);
    return {data[i], data[i + 1], data[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const auto i = index(x, y);
    data[i] = c[0];
    data[i + 1] = c[1];
    data[i + 2] = c[2];
  }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// 8-bit single-channel raster.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0);

  bool empty() const { return width <= 0 || height <= 0; }
  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// One flag per pixel; set means occluded (or hole, for hole maps).
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h, bool fill = false);

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool value = true) {
    bits[static_cast<std::size_t>(y) * width + x] = value ? 1 : 0;
  }
  std::size_t count() const;
  bool empty_mask() const { return count() == 0; }
  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// Per-pixel occlusion weight in [0, 1].
struct SoftMask {
  int width = 0;
  int height = 0;
  std::vector<float> weights;

  SoftMask() = default;
  SoftMask(int w, int h, float fill = 0.0f);

  float get(int x, int y) const { return weights[static_cast<std::size_t>(y) * width + x]; }
  void set(int x, int y, float w) { weights[static_cast<std::size_t>(y) * width + x] = w; }
  /// Bilinear lookup at a continuous pixel position (pixel centers at integers),
  /// clamped to the raster.
  double sample(double u, double v) const;
};

GrayImage to_gray(const BinaryMask& mask);       // 0 clear, 255 set
BinaryMask from_gray(const GrayImage& image);    // nonzero -> set
GrayImage to_gray(const SoftMask& mask);         // round(weight * 255)

}  // namespace facademap
