#include "facademap/facade_fit.hpp"

#include "facademap/text_format.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace facademap {

namespace {

/// Flips `plane` when more positions sit on its negative side than on its
/// positive side.
VerticalPlane orient_plane(const VerticalPlane& plane, std::span<const Point3> positions) {
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (const auto& p : positions) {
    const double d = signed_plane_distance(plane, p);
    if (d > 0.0) ++pos;
    if (d < 0.0) ++neg;
  }
  return neg > pos ? plane.flipped() : plane;
}

}  // namespace

VerticalPlane fit_vertical_plane(std::span<const Point3> points, std::span<const Point3> sensor_positions) {
  if (points.size() < 2) throw GeometryError("plane fit needs at least two points");

  Point2 c = Point2::Zero();
  for (const auto& p : points) c += planar(p);
  c /= static_cast<double>(points.size());

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& p : points) {
    const double dx = p.x() - c.x();
    const double dy = p.y() - c.y();
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double n = static_cast<double>(points.size());
  sxx /= n;
  sxy /= n;
  syy /= n;

  const double half_trace = 0.5 * (sxx + syy);
  const double spread = std::hypot(0.5 * (sxx - syy), sxy);
  const double lambda_max = half_trace + spread;
  const double lambda_min = half_trace - spread;
  if (lambda_max <= 1e-12) throw GeometryError("cluster is planimetrically degenerate");
  if (lambda_max - lambda_min <= 1e-12) throw GeometryError("cluster covariance is isotropic; no dominant direction");

  // Major axis angle; the normal is the minor eigenvector.
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const Point2 normal(-std::sin(theta), std::cos(theta));
  const VerticalPlane plane = VerticalPlane::through(c, normal);
  return orient_plane(plane, sensor_positions);
}

std::pair<Point2, Point2> project_endpoints(const VerticalPlane& plane, const Segment2& seg) {
  const Point2 n = plane.normal();
  const Point2 e1 = seg.p1 - signed_plane_distance(plane, seg.p1) * n;
  const Point2 e2 = seg.p2 - signed_plane_distance(plane, seg.p2) * n;
  if ((e2 - e1).norm() <= 1e-6) {
    throw GeometryError("segment " + std::to_string(seg.id) + " projects to a single point on the fitted plane");
  }
  return {e1, e2};
}

std::vector<std::int64_t> cluster_frames(const FacadeCluster& cluster, std::span<const PointRecord> points) {
  std::vector<std::int64_t> ids;
  ids.reserve(cluster.point_indices.size());
  for (const auto i : cluster.point_indices) ids.push_back(points[i].frame_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

double bottom_altitude(const FacadeCluster& cluster, std::span<const PointRecord> points, const FrameTable& frames,
                       const PipelineConfig& cfg) {
  const auto ids = cluster_frames(cluster, points);
  if (ids.empty()) throw std::invalid_argument("bottom altitude of an empty cluster");
  double sum = 0.0;
  for (const auto id : ids) {
    const auto it = frames.find(id);
    if (it == frames.end()) throw IntegrityError("cluster references unknown frame " + std::to_string(id));
    sum += it->second.sensor_pos.z();
  }
  return sum / static_cast<double>(ids.size()) - cfg.h_vehicle + cfg.h_curb;
}

TopProfile top_profile(const FacadeCluster& cluster, std::span<const PointRecord> points) {
  if (cluster.point_indices.empty()) throw std::invalid_argument("top profile of an empty cluster");
  std::map<std::int64_t, double> maxima;
  for (const auto i : cluster.point_indices) {
    const auto& r = points[i];
    auto [it, inserted] = maxima.emplace(r.frame_id, r.point.z());
    if (!inserted) it->second = std::max(it->second, r.point.z());
  }
  TopProfile prof;
  prof.frame_maxima.assign(maxima.begin(), maxima.end());

  std::vector<double> z;
  z.reserve(maxima.size());
  for (const auto& [id, value] : maxima) z.push_back(value);
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
  double acc = 0.0;
  for (const double v : z) acc += (v - mean) * (v - mean);
  prof.msd = acc / static_cast<double>(z.size());

  std::sort(z.begin(), z.end());
  prof.median = z[(z.size() - 1) / 2];
  return prof;
}

TopEstimate top_altitude(const FacadeCluster& cluster, std::span<const PointRecord> points, double tau_msd) {
  TopEstimate est;
  est.profile = top_profile(cluster, points);
  if (est.profile.msd > tau_msd) {
    double z_max = -std::numeric_limits<double>::infinity();
    for (const auto i : cluster.point_indices) z_max = std::max(z_max, points[i].point.z());
    est.z_top = z_max;
    est.lod_flag = LodFlag::detailed;
  } else {
    est.z_top = est.profile.median;
    est.lod_flag = LodFlag::smooth;
  }
  return est;
}

FacadeQuad assemble_quad(std::int64_t segment_id, const VerticalPlane& plane, const Point2& e1, const Point2& e2,
                         double z_bottom, double z_top, const TopProfile& profile, LodFlag lod_flag) {
  if (!(z_top > z_bottom)) {
    throw GeometryError(fmt::format("facade {}: inverted altitude band (z_bottom {} >= z_top {})", segment_id,
                                    z_bottom, z_top));
  }
  FacadeQuad q;
  q.segment_id = segment_id;
  q.plane = plane;
  q.e1 = e1;
  q.e2 = e2;
  q.z_bottom = z_bottom;
  q.z_top = z_top;
  q.msd = profile.msd;
  q.lod_flag = lod_flag;
  q.validate();
  return q;
}

FacadeQuad orient_toward(FacadeQuad quad, std::span<const Point3> positions) {
  quad.plane = orient_plane(quad.plane, positions);
  return quad;
}

FacadeQuad fit_facade(const FacadeCluster& cluster, const Segment2& segment, std::span<const PointRecord> points,
                      const FrameTable& frames, const PipelineConfig& cfg) {
  std::vector<Point3> members;
  members.reserve(cluster.point_indices.size());
  for (const auto i : cluster.point_indices) members.push_back(points[i].point);

  std::vector<Point3> sensors;
  for (const auto id : cluster_frames(cluster, points)) {
    const auto it = frames.find(id);
    if (it == frames.end()) throw IntegrityError("cluster references unknown frame " + std::to_string(id));
    sensors.push_back(it->second.sensor_pos);
  }

  const VerticalPlane plane = fit_vertical_plane(members, sensors);
  const auto [e1, e2] = project_endpoints(plane, segment);
  const double z_bottom = bottom_altitude(cluster, points, frames, cfg);
  const TopEstimate top = top_altitude(cluster, points, cfg.tau_msd);
  return assemble_quad(cluster.segment_id, plane, e1, e2, z_bottom, top.z_top, top.profile, top.lod_flag);
}

std::string quads_to_text(std::span<const FacadeQuad> quads) {
  std::string out;
  for (const auto& q : quads) {
    out += fmt::format("{} {} {} {} {} {} {} {} {}\n", q.segment_id, q.e1.x(), q.e1.y(), q.e2.x(), q.e2.y(),
                       q.z_bottom, q.z_top, q.msd, to_string(q.lod_flag));
  }
  return out;
}

std::vector<FacadeQuad> load_quads(const std::filesystem::path& path) {
  std::vector<FacadeQuad> out;
  const auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tok = text::split_ws(text::strip_comment(lines[i]));
    if (tok.empty()) continue;
    if (tok.size() != 9) throw FormatError(path.string(), i + 1, "expected 9 fields");
    try {
      FacadeQuad q;
      q.segment_id = text::parse_int(tok[0]);
      q.e1 = Point2(text::parse_double(tok[1]), text::parse_double(tok[2]));
      q.e2 = Point2(text::parse_double(tok[3]), text::parse_double(tok[4]));
      q.z_bottom = text::parse_double(tok[5]);
      q.z_top = text::parse_double(tok[6]);
      q.msd = text::parse_double(tok[7]);
      q.lod_flag = lod_flag_from_string(std::string(tok[8]));
      const Point2 dir = q.e2 - q.e1;
      q.plane = VerticalPlane::through(q.e1, Point2(-dir.y(), dir.x()));
      // Snap e2 onto the rebuilt plane to absorb rounding in the normal.
      q.e2 -= signed_plane_distance(q.plane, q.e2) * q.plane.normal();
      q.validate();
      out.push_back(q);
    } catch (const std::exception& e) {
      throw FormatError(path.string(), i + 1, e.what());
    }
  }
  return out;
}

}  // namespace facademap
