#pragma once

#include "facademap/config.hpp"
#include "facademap/dataset.hpp"
#include "facademap/facade_extract.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace facademap {

/// Orthogonal (total) least-squares vertical plane through the planimetric
/// coordinates of `points`. The normal is oriented so that the majority of
/// `sensor_positions` lie on its positive side (the street side); with no
/// sensor positions, or a tie, the orientation is the one produced by the fit.
///
/// Throws GeometryError if the points are planimetrically coincident or their
/// covariance is isotropic (no dominant direction).
VerticalPlane fit_vertical_plane(std::span<const Point3> points, std::span<const Point3> sensor_positions = {});

/// Orthogonal projection of the segment extremities onto the plane. Throws
/// GeometryError when the projections coincide.
std::pair<Point2, Point2> project_endpoints(const VerticalPlane& plane, const Segment2& seg);

/// Distinct frames contributing to a cluster, ascending by id.
std::vector<std::int64_t> cluster_frames(const FacadeCluster& cluster, std::span<const PointRecord> points);

/// Mean sensor altitude over the cluster's distinct frames, minus the vehicle
/// height, plus the curb height. Unaffected by how many points each frame
/// contributes, so missing wall bottoms (parked cars) do not bias it.
double bottom_altitude(const FacadeCluster& cluster, std::span<const PointRecord> points, const FrameTable& frames,
                       const PipelineConfig& cfg);

struct TopProfile {
  /// Highest member altitude per frame, ascending by frame id.
  std::vector<std::pair<std::int64_t, double>> frame_maxima;
  /// Median of the maxima (lower middle value for even counts).
  double median = 0.0;
  /// Mean squared deviation of the maxima from their mean.
  double msd = 0.0;
};

TopProfile top_profile(const FacadeCluster& cluster, std::span<const PointRecord> points);

struct TopEstimate {
  double z_top = 0.0;
  LodFlag lod_flag = LodFlag::smooth;
  TopProfile profile;
};

/// Median of per-frame maxima when msd <= tau_msd, otherwise the highest
/// cluster point.
TopEstimate top_altitude(const FacadeCluster& cluster, std::span<const PointRecord> points, double tau_msd);

/// Throws GeometryError if z_top <= z_bottom or the endpoints are off the plane.
FacadeQuad assemble_quad(std::int64_t segment_id, const VerticalPlane& plane, const Point2& e1, const Point2& e2,
                         double z_bottom, double z_top, const TopProfile& profile, LodFlag lod_flag);

/// Flips the quad's plane if fewer than half of `positions` lie on its
/// positive side.
FacadeQuad orient_toward(FacadeQuad quad, std::span<const Point3> positions);

/// Full per-cluster delimitation: plane fit, endpoint projection, altitudes.
FacadeQuad fit_facade(const FacadeCluster& cluster, const Segment2& segment, std::span<const PointRecord> points,
                      const FrameTable& frames, const PipelineConfig& cfg);

/// `segment_id e1x e1y e2x e2y z_bottom z_top msd lod_flag`, one per line.
std::string quads_to_text(std::span<const FacadeQuad> quads);
/// Inverse of quads_to_text. The text carries no normal orientation, so the
/// plane is rebuilt from the endpoints with its normal to the left of e1 -> e2;
/// use orient_toward() to restore the street side.
std::vector<FacadeQuad> load_quads(const std::filesystem::path& path);

}  // namespace facademap
