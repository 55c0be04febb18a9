#pragma once

#include "facademap/dataset.hpp"
#include "facademap/raster.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace facademap {

/// Planimetric vote map: each point votes in the cell containing its (x, y).
///
/// Cells are half-open, [ox + u*step, ox + (u+1)*step) along x and likewise
/// along y. The origin is the bounding-box minimum snapped down to a multiple
/// of the step. Point indices per cell are kept (ascending) so the raster stays
/// tied to the cloud.
class AccumulationGrid {
public:
  double origin_x() const { return ox_; }
  double origin_y() const { return oy_; }
  double step() const { return step_; }
  int cells_u() const { return nu_; }
  int cells_v() const { return nv_; }
  std::size_t cell_count() const { return static_cast<std::size_t>(nu_) * nv_; }
  std::size_t point_count() const { return cell_of_point_.size(); }

  /// Score S(u, v).
  std::uint32_t score(int u, int v) const { return scores_[linear(u, v)]; }
  std::span<const std::uint32_t> scores() const { return scores_; }
  /// Point indices voting in (u, v), ascending.
  std::span<const std::size_t> points_in(int u, int v) const;
  /// Linear cell index (v * cells_u + u) of a point.
  std::size_t cell_of(std::size_t point_index) const { return cell_of_point_[point_index]; }

  /// Cell column of a planimetric coordinate under this grid's origin/step.
  int column(double x) const;
  int row(double y) const;

  /// Score map as an 8-bit image, scores clamped to 255. Row 0 is the
  /// northernmost (largest v) row so the image reads like a map.
  GrayImage score_image() const;

  friend AccumulationGrid build_accumulation_map(std::span<const PointRecord> points, double step);

private:
  std::size_t linear(int u, int v) const { return static_cast<std::size_t>(v) * nu_ + u; }

  double ox_ = 0.0;
  double oy_ = 0.0;
  double step_ = 1.0;
  int nu_ = 0;
  int nv_ = 0;
  std::vector<std::uint32_t> scores_;
  std::vector<std::size_t> cell_start_;  // CSR offsets, size cell_count()+1
  std::vector<std::size_t> cell_points_;
  std::vector<std::size_t> cell_of_point_;
};

/// Throws std::invalid_argument on an empty cloud or non-positive step.
AccumulationGrid build_accumulation_map(std::span<const PointRecord> points, double step);

/// Hyper-points (cells with score > 1, potential vertical structures) and
/// their complement (score == 1, potential flat surfaces). Both ascending.
struct HyperPointSplit {
  std::vector<std::size_t> vertical;
  std::vector<std::size_t> surface;
};

HyperPointSplit split_hyper_points(const AccumulationGrid& grid);

}  // namespace facademap
