#include "facademap/occlusion.hpp"

#include "facademap/text_format.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace facademap {

std::size_t OccluderSet::measured_count() const {
  return static_cast<std::size_t>(
      std::count(sources.begin(), sources.end(), OccluderSource::measured));
}

bool in_occlusion_band(const FacadeQuad& quad, const Point3& p, const PipelineConfig& cfg) {
  const double d = signed_plane_distance(quad.plane, p);
  if (d < cfg.occ_d_min || d > cfg.occ_d_max) return false;
  const double s = (planar(p) - quad.e1).dot(quad.axis());
  if (s < -cfg.occ_extent_margin || s > quad.length() + cfg.occ_extent_margin) return false;
  return p.z() > quad.z_bottom + cfg.occ_ground_eps && p.z() <= quad.z_top;
}

OccluderSet detect_occluding_points(std::span<const PointRecord> points, const FacadeQuad& quad,
                                    const PipelineConfig& cfg) {
  OccluderSet occ;
  occ.segment_id = quad.segment_id;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!in_occlusion_band(quad, points[i].point, cfg)) continue;
    occ.points.push_back(points[i].point);
    occ.sources.push_back(OccluderSource::measured);
    occ.point_indices.push_back(i);
  }
  if (occ.points.size() < static_cast<std::size_t>(cfg.occ_min_pts)) {
    occ.points.clear();
    occ.sources.clear();
    occ.point_indices.clear();
  }
  return occ;
}

OccluderSet cube_dilate(const OccluderSet& occ, double half_edge) {
  if (!(half_edge > 0.0)) throw std::invalid_argument("cube half-edge must be positive");
  OccluderSet out;
  out.segment_id = occ.segment_id;
  out.points.reserve(occ.size() * 9);
  for (std::size_t i = 0; i < occ.size(); ++i) {
    out.points.push_back(occ.points[i]);
    out.sources.push_back(occ.sources[i]);
    out.point_indices.push_back(occ.point_indices[i]);
    if (occ.sources[i] != OccluderSource::measured) continue;
    for (int corner = 0; corner < 8; ++corner) {
      const Point3 offset((corner & 1) ? half_edge : -half_edge, (corner & 2) ? half_edge : -half_edge,
                          (corner & 4) ? half_edge : -half_edge);
      out.points.push_back(occ.points[i] + offset);
      out.sources.push_back(OccluderSource::cube_synthetic);
      out.point_indices.push_back(OccluderSet::npos);
    }
  }
  return out;
}

std::string occluders_to_text(const OccluderSet& occ) {
  std::string out;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    const auto& p = occ.points[i];
    const bool measured = occ.sources[i] == OccluderSource::measured;
    const long long index = measured ? static_cast<long long>(occ.point_indices[i]) : -1;
    out += fmt::format("{} {} {} {} {}\n", index, p.x(), p.y(), p.z(), measured ? "measured" : "cube");
  }
  return out;
}

std::vector<std::size_t> load_occluder_indices(const std::filesystem::path& path) {
  std::vector<std::size_t> out;
  const auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tok = text::split_ws(text::strip_comment(lines[i]));
    if (tok.empty()) continue;
    if (tok.size() != 5) throw FormatError(path.string(), i + 1, "expected 5 fields");
    try {
      const auto index = text::parse_int(tok[0]);
      if (tok[4] == "measured") {
        if (index < 0) throw std::invalid_argument("measured occluder without a point index");
        out.push_back(static_cast<std::size_t>(index));
      } else if (tok[4] != "cube") {
        throw std::invalid_argument("unknown occluder source '" + std::string(tok[4]) + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw FormatError(path.string(), i + 1, e.what());
    }
  }
  return out;
}

}  // namespace facademap
