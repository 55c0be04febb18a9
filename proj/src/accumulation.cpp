#include "facademap/accumulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace facademap {

namespace {

/// floor(value / step) with the origin already subtracted.
long long cell_floor(double coord, double origin, double step) {
  return static_cast<long long>(std::floor((coord - origin) / step));
}

/// Largest multiple of `step` whose cell still contains `min_coord`.
double snap_origin(double min_coord, double step) {
  double k = std::floor(min_coord / step);
  // k*step can round above min_coord; back off until min_coord lands in cell 0.
  while (cell_floor(min_coord, k * step, step) < 0) k -= 1.0;
  return k * step;
}

}  // namespace

std::span<const std::size_t> AccumulationGrid::points_in(int u, int v) const {
  const auto c = linear(u, v);
  return std::span<const std::size_t>(cell_points_).subspan(cell_start_[c], cell_start_[c + 1] - cell_start_[c]);
}

int AccumulationGrid::column(double x) const { return static_cast<int>(cell_floor(x, ox_, step_)); }
int AccumulationGrid::row(double y) const { return static_cast<int>(cell_floor(y, oy_, step_)); }

GrayImage AccumulationGrid::score_image() const {
  GrayImage img(nu_, nv_);
  for (int v = 0; v < nv_; ++v) {
    for (int u = 0; u < nu_; ++u) {
      img.data[static_cast<std::size_t>(nv_ - 1 - v) * nu_ + u] =
          static_cast<std::uint8_t>(std::min<std::uint32_t>(score(u, v), 255));
    }
  }
  return img;
}

AccumulationGrid build_accumulation_map(std::span<const PointRecord> points, double step) {
  if (points.empty()) throw std::invalid_argument("accumulation map needs at least one point");
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("grid step must be positive");

  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  for (const auto& p : points) {
    if (!p.point.allFinite()) throw std::invalid_argument("point cloud contains non-finite coordinates");
    min_x = std::min(min_x, p.point.x());
    min_y = std::min(min_y, p.point.y());
  }

  AccumulationGrid g;
  g.step_ = step;
  g.ox_ = snap_origin(min_x, step);
  g.oy_ = snap_origin(min_y, step);

  std::vector<long long> us(points.size());
  std::vector<long long> vs(points.size());
  long long max_u = 0;
  long long max_v = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    us[i] = cell_floor(points[i].point.x(), g.ox_, step);
    vs[i] = cell_floor(points[i].point.y(), g.oy_, step);
    max_u = std::max(max_u, us[i]);
    max_v = std::max(max_v, vs[i]);
  }
  constexpr long long kMaxCells = 1LL << 31;
  if (max_u + 1 > std::numeric_limits<int>::max() || max_v + 1 > std::numeric_limits<int>::max() ||
      (max_u + 1) * (max_v + 1) > kMaxCells) {
    throw std::invalid_argument("accumulation grid too large for the requested step");
  }
  g.nu_ = static_cast<int>(max_u + 1);
  g.nv_ = static_cast<int>(max_v + 1);

  // Counting sort by cell; filling in point order keeps per-cell lists ascending.
  g.scores_.assign(g.cell_count(), 0);
  g.cell_of_point_.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = g.linear(static_cast<int>(us[i]), static_cast<int>(vs[i]));
    g.cell_of_point_[i] = c;
    ++g.scores_[c];
  }
  g.cell_start_.assign(g.cell_count() + 1, 0);
  for (std::size_t c = 0; c < g.cell_count(); ++c) g.cell_start_[c + 1] = g.cell_start_[c] + g.scores_[c];
  std::vector<std::size_t> cursor(g.cell_start_.begin(), g.cell_start_.end() - 1);
  g.cell_points_.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) g.cell_points_[cursor[g.cell_of_point_[i]]++] = i;
  return g;
}

HyperPointSplit split_hyper_points(const AccumulationGrid& grid) {
  HyperPointSplit out;
  const auto scores = grid.scores();
  for (std::size_t i = 0; i < grid.point_count(); ++i) {
    (scores[grid.cell_of(i)] > 1 ? out.vertical : out.surface).push_back(i);
  }
  return out;
}

}  // namespace facademap
