#include "facademap/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace facademap {

namespace {
std::size_t checked_area(int w, int h) {
  if (w < 0 || h < 0) throw std::invalid_argument("raster dimensions must be non-negative");
  return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
}
}  // namespace

RgbImage::RgbImage(int w, int h, Rgb fill) : width(w), height(h), data(3 * checked_area(w, h)) {
  for (std::size_t i = 0; i < data.size(); i += 3) {
    data[i] = fill[0];
    data[i + 1] = fill[1];
    data[i + 2] = fill[2];
  }
}

GrayImage::GrayImage(int w, int h, std::uint8_t fill) : width(w), height(h), data(checked_area(w, h), fill) {}

BinaryMask::BinaryMask(int w, int h, bool fill) : width(w), height(h), bits(checked_area(w, h), fill ? 1 : 0) {}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

SoftMask::SoftMask(int w, int h, float fill) : width(w), height(h), weights(checked_area(w, h), fill) {}

double SoftMask::sample(double u, double v) const {
  u = std::clamp(u, 0.0, static_cast<double>(width - 1));
  v = std::clamp(v, 0.0, static_cast<double>(height - 1));
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = u - x0;
  const double fy = v - y0;
  const double top = (1.0 - fx) * get(x0, y0) + fx * get(x1, y0);
  const double bottom = (1.0 - fx) * get(x0, y1) + fx * get(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

GrayImage to_gray(const BinaryMask& mask) {
  GrayImage out(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) out.data[i] = mask.bits[i] ? 255 : 0;
  return out;
}

BinaryMask from_gray(const GrayImage& image) {
  BinaryMask out(image.width, image.height);
  for (std::size_t i = 0; i < image.data.size(); ++i) out.bits[i] = image.data[i] ? 1 : 0;
  return out;
}

GrayImage to_gray(const SoftMask& mask) {
  GrayImage out(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.weights.size(); ++i) {
    const double w = std::clamp(static_cast<double>(mask.weights[i]), 0.0, 1.0);
    out.data[i] = static_cast<std::uint8_t>(std::floor(w * 255.0 + 0.5));
  }
  return out;
}

}  // namespace facademap
