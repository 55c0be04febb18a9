#pragma once

#include "facademap/config.hpp"
#include "facademap/dataset.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace facademap {

enum class OccluderSource : std::uint8_t { measured, cube_synthetic };

/// Points standing between the sensor trajectory and one facade.
struct OccluderSet {
  std::int64_t segment_id = 0;
  std::vector<Point3> points;
  std::vector<OccluderSource> sources;
  /// Dataset index of each point, or npos for cube corners.
  std::vector<std::size_t> point_indices;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::size_t measured_count() const;
};

/// Band test for one point: street-side distance to the plane within
/// [occ_d_min, occ_d_max], footprint within the quad extent widened by
/// occ_extent_margin, altitude in (z_bottom + occ_ground_eps, z_top].
bool in_occlusion_band(const FacadeQuad& quad, const Point3& p, const PipelineConfig& cfg);

/// Points satisfying the band test; if fewer than occ_min_pts qualify the
/// result is empty.
OccluderSet detect_occluding_points(std::span<const PointRecord> points, const FacadeQuad& quad,
                                    const PipelineConfig& cfg);

/// Replaces each measured point by itself plus the 8 corners of the cube of
/// half-edge `half_edge` around it. Existing cube corners are kept as-is.
OccluderSet cube_dilate(const OccluderSet& occ, double half_edge);

/// One line per point: `index x y z source` with index -1 for cube corners.
std::string occluders_to_text(const OccluderSet& occ);
/// Measured point indices listed in an occluder text file.
std::vector<std::size_t> load_occluder_indices(const std::filesystem::path& path);

}  // namespace facademap
