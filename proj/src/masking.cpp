#include "facademap/masking.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <stdexcept>

namespace facademap {

namespace {

void check_radius(int r) {
  if (r < 1) throw std::invalid_argument("structuring element radius must be >= 1");
}

/// For every pixel of a row, horizontal distance to the nearest pixel whose
/// flag equals `target`. Pixels outside the row count as `outside_value`.
/// INT_MAX / 4 when none exists.
void row_distance(const std::uint8_t* row, int width, bool target, bool outside_value, std::vector<int>& out) {
  constexpr int kFar = INT_MAX / 4;
  out.assign(width, kFar);
  int last = outside_value == target ? -1 : -kFar;
  for (int x = 0; x < width; ++x) {
    if ((row[x] != 0) == target) last = x;
    out[x] = last == -kFar ? kFar : x - last;
  }
  last = outside_value == target ? width : kFar * 2;
  for (int x = width - 1; x >= 0; --x) {
    if ((row[x] != 0) == target) last = x;
    if (last != kFar * 2) out[x] = std::min(out[x], last - x);
  }
}

}  // namespace

std::vector<int> disc_half_widths(int r) {
  check_radius(r);
  std::vector<int> hw(2 * r + 1);
  const long long r2 = static_cast<long long>(r) * r;
  for (int dy = -r; dy <= r; ++dy) {
    const long long rem = r2 - static_cast<long long>(dy) * dy;
    long long w = static_cast<long long>(std::sqrt(static_cast<double>(rem)));
    while (w * w > rem) --w;
    while ((w + 1) * (w + 1) <= rem) ++w;
    hw[dy + r] = static_cast<int>(w);
  }
  return hw;
}

std::size_t disc_area(int r) {
  std::size_t n = 0;
  for (const int w : disc_half_widths(r)) n += 2 * static_cast<std::size_t>(w) + 1;
  return n;
}

BinaryMask rasterize_points(const PinholeCamera& cam, const OccluderSet& occ) {
  BinaryMask mask(cam.width, cam.height);
  for (const auto& p : occ.points) {
    const auto px = project_to_image(cam, p);
    if (!px || !cam.in_frame(*px)) continue;
    // Round half up; u in [width - 0.5, width) rounds onto the last column.
    const int x = std::min(static_cast<int>(std::floor(px->u + 0.5)), cam.width - 1);
    const int y = std::min(static_cast<int>(std::floor(px->v + 0.5)), cam.height - 1);
    mask.set(x, y);
  }
  return mask;
}

BinaryMask disc_dilate(const BinaryMask& mask, int r) {
  check_radius(r);
  const auto hw = disc_half_widths(r);
  const int w = mask.width;
  const int h = mask.height;
  BinaryMask out(w, h);

  // Horizontal distance to the nearest set pixel, per input row.
  std::vector<std::vector<int>> dist(h);
  std::vector<char> row_has(h, 0);
  for (int y = 0; y < h; ++y) {
    const auto* row = mask.bits.data() + static_cast<std::size_t>(y) * w;
    row_has[y] = std::any_of(row, row + w, [](std::uint8_t b) { return b != 0; });
    if (row_has[y]) row_distance(row, w, true, false, dist[y]);
  }
  for (int y = 0; y < h; ++y) {
    auto* orow = out.bits.data() + static_cast<std::size_t>(y) * w;
    for (int dy = -r; dy <= r; ++dy) {
      const int sy = y + dy;
      if (sy < 0 || sy >= h || !row_has[sy]) continue;
      const int reach = hw[dy + r];
      const auto& d = dist[sy];
      for (int x = 0; x < w; ++x) {
        if (d[x] <= reach) orow[x] = 1;
      }
    }
  }
  return out;
}

BinaryMask disc_erode(const BinaryMask& mask, int r) {
  check_radius(r);
  const auto hw = disc_half_widths(r);
  const int w = mask.width;
  const int h = mask.height;
  BinaryMask out(w, h);

  // Horizontal distance to the nearest clear pixel of the row; rows and
  // columns beyond the image count as set.
  std::vector<std::vector<int>> dist(h);
  for (int y = 0; y < h; ++y) {
    row_distance(mask.bits.data() + static_cast<std::size_t>(y) * w, w, false, true, dist[y]);
  }
  for (int y = 0; y < h; ++y) {
    auto* orow = out.bits.data() + static_cast<std::size_t>(y) * w;
    const int dy0 = std::max(-r, -y);
    const int dy1 = std::min(r, h - 1 - y);
    for (int x = 0; x < w; ++x) {
      bool keep = true;
      for (int dy = dy0; dy <= dy1 && keep; ++dy) keep = dist[y + dy][x] > hw[dy + r];
      orow[x] = keep ? 1 : 0;
    }
  }
  return out;
}

BinaryMask disc_open(const BinaryMask& mask, int r) { return disc_dilate(disc_erode(mask, r), r); }

std::vector<int> chessboard_distance_to_clear(const BinaryMask& mask) {
  const int w = mask.width;
  const int h = mask.height;
  constexpr int kInf = INT_MAX;
  std::vector<int> d(mask.bits.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = mask.bits[i] ? kInf : 0;
  auto at = [&](int x, int y) -> int& { return d[static_cast<std::size_t>(y) * w + x]; };
  auto relax = [&](int& cur, int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    const int n = at(x, y);
    if (n != kInf && n + 1 < cur) cur = n + 1;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int& cur = at(x, y);
      if (cur == 0) continue;
      relax(cur, x - 1, y);
      relax(cur, x - 1, y - 1);
      relax(cur, x, y - 1);
      relax(cur, x + 1, y - 1);
    }
  }
  for (int y = h - 1; y >= 0; --y) {
    for (int x = w - 1; x >= 0; --x) {
      int& cur = at(x, y);
      if (cur == 0) continue;
      relax(cur, x + 1, y);
      relax(cur, x + 1, y + 1);
      relax(cur, x, y + 1);
      relax(cur, x - 1, y + 1);
    }
  }
  return d;
}

SoftMask feather_contours(const BinaryMask& mask, int w) {
  if (w < 0) throw std::invalid_argument("feather width must be >= 0");
  const auto dist = chessboard_distance_to_clear(mask);
  SoftMask out(mask.width, mask.height);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const int d = dist[i];
    if (d == 0) {
      out.weights[i] = 0.0f;
    } else if (d > w) {
      out.weights[i] = 1.0f;
    } else {
      out.weights[i] = static_cast<float>(static_cast<double>(d) / w);
    }
  }
  return out;
}

OcclusionMasks build_occlusion_masks(const PinholeCamera& cam, const OccluderSet& occ, const PipelineConfig& cfg) {
  const BinaryMask seeds = rasterize_points(cam, occ);
  OcclusionMasks m;
  m.hard = disc_erode(disc_dilate(seeds, cfg.dilate_r), cfg.erode_r);
  m.soft = feather_contours(m.hard, cfg.feather_w);
  return m;
}

}  // namespace facademap
