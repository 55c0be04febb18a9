#pragma once

#include "facademap/config.hpp"
#include "facademap/dataset.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace facademap {

/// Hyper-points attributed to one cadastral segment.
struct FacadeCluster {
  std::int64_t segment_id = 0;
  std::vector<std::size_t> point_indices;  // ascending, into Dataset::points

  std::size_t count() const { return point_indices.size(); }
};

/// Assigns each hyper-point inside the orthogonal neighborhood of at least one
/// segment (|t| <= neighborhood, -occ_extent_margin <= s <= length +
/// occ_extent_margin) to the segment with the smallest |t|, ties broken by the
/// smaller segment id. Clusters with at least `min_cluster_pts` members are
/// returned sorted by segment id.
///
/// Throws std::invalid_argument when the cadastre is empty.
std::vector<FacadeCluster> extract_facade_clusters(std::span<const std::size_t> hyper_points,
                                                   std::span<const PointRecord> points,
                                                   std::span<const Segment2> cadastre,
                                                   const PipelineConfig& cfg);

/// One line per member: `index x y z frame_id`.
std::string cluster_to_text(const FacadeCluster& cluster, std::span<const PointRecord> points);

}  // namespace facademap
