#pragma once

#include "facademap/config.hpp"
#include "facademap/dataset.hpp"
#include "facademap/occlusion.hpp"
#include "facademap/synthscene.hpp"
#include "facademap/texturing.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace facademap {

struct DeviationStats {
  double max = 0.0;
  double min = 0.0;
  double mean = 0.0;
  std::vector<std::pair<std::int64_t, double>> per_facade;  // by segment_id
};

/// Per facade: mean of |e1 - e1'| and |e2 - e2'| in (x, y). Quads are matched
/// by segment_id; any id present on one side only throws std::invalid_argument
/// naming the ids.
DeviationStats planimetric_deviation(std::span<const FacadeQuad> estimated, std::span<const FacadeQuad> truth);

struct TextureError {
  std::optional<double> mae;  // absent when no pixel is valid
  double hole_frac = 0.0;
};

/// Mean absolute per-channel error over valid pixels, on the 0..255 scale.
/// Throws std::invalid_argument when the truth raster size differs from the
/// frame grid.
TextureError texture_error(const OrthoFrame& frame, const RgbImage& truth);

struct RecallPrecision {
  std::optional<double> recall;     // absent when the truth set is empty
  std::optional<double> precision;  // absent when nothing was detected
};

/// Indices of occluder-labeled points inside the occlusion band of `true_quad`.
std::vector<std::size_t> true_occluder_indices(std::span<const PointRecord> points,
                                               std::span<const synth::PointLabel> labels,
                                               const FacadeQuad& true_quad, const PipelineConfig& cfg);

/// recall = |detected ∩ truth| / |truth|; precision = share of detected points
/// labeled as occluders. Only measured points of `detected` count.
RecallPrecision occlusion_recall(const OccluderSet& detected, std::span<const std::size_t> truth,
                                 std::span<const synth::PointLabel> labels);
/// Same, from bare detected point indices.
RecallPrecision occlusion_recall(std::span<const std::size_t> detected, std::span<const std::size_t> truth,
                                 std::span<const synth::PointLabel> labels);

struct FacadeMetrics {
  std::int64_t segment_id = 0;
  std::optional<TextureError> texture;
  std::optional<TextureError> texture_mosaic;  // before white balance
  std::optional<RecallPrecision> occlusion;
};

/// Text table: planimetric deviation block, then per-facade texture and
/// occlusion rows. Values absent are printed as n/a.
std::string metrics_table(const DeviationStats& deviation, std::span<const FacadeMetrics> facades);

}  // namespace facademap
