#include "facademap/facade_extract.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace facademap {

std::vector<FacadeCluster> extract_facade_clusters(std::span<const std::size_t> hyper_points,
                                                   std::span<const PointRecord> points,
                                                   std::span<const Segment2> cadastre,
                                                   const PipelineConfig& cfg) {
  if (cadastre.empty()) throw std::invalid_argument("cadastral map is empty");

  // Visit segments in id order so the first strict minimum wins ties.
  std::vector<std::size_t> order(cadastre.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cadastre[a].id < cadastre[b].id; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (cadastre[order[k]].id == cadastre[order[k - 1]].id) {
      throw std::invalid_argument("duplicate cadastral segment id " + std::to_string(cadastre[order[k]].id));
    }
  }

  std::vector<std::vector<std::size_t>> members(cadastre.size());
  const double margin = cfg.occ_extent_margin;
  for (const std::size_t idx : hyper_points) {
    const Point3& p = points[idx].point;
    std::size_t best = cadastre.size();
    double best_t = std::numeric_limits<double>::infinity();
    for (const std::size_t k : order) {
      const Segment2& seg = cadastre[k];
      const auto c = segment_frame_coords(seg, p);
      const double at = std::abs(c.t);
      if (at > cfg.neighborhood || c.s < -margin || c.s > seg.length() + margin) continue;
      if (at < best_t) {
        best_t = at;
        best = k;
      }
    }
    if (best < cadastre.size()) members[best].push_back(idx);
  }

  std::vector<FacadeCluster> clusters;
  for (const std::size_t k : order) {
    auto& m = members[k];
    if (m.size() < static_cast<std::size_t>(cfg.min_cluster_pts)) continue;
    std::sort(m.begin(), m.end());
    clusters.push_back({cadastre[k].id, std::move(m)});
  }
  return clusters;
}

std::string cluster_to_text(const FacadeCluster& cluster, std::span<const PointRecord> points) {
  std::string out;
  for (const auto i : cluster.point_indices) {
    const auto& r = points[i];
    out += fmt::format("{} {} {} {} {}\n", i, r.point.x(), r.point.y(), r.point.z(), r.frame_id);
  }
  return out;
}

}  // namespace facademap
