#include "facademap/evaluation.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <stdexcept>

namespace facademap {

DeviationStats planimetric_deviation(std::span<const FacadeQuad> estimated, std::span<const FacadeQuad> truth) {
  std::map<std::int64_t, const FacadeQuad*> est_by_id;
  std::map<std::int64_t, const FacadeQuad*> truth_by_id;
  for (const auto& q : estimated) est_by_id[q.segment_id] = &q;
  for (const auto& q : truth) truth_by_id[q.segment_id] = &q;

  std::vector<std::int64_t> unmatched;
  for (const auto& [id, q] : est_by_id) {
    if (!truth_by_id.count(id)) unmatched.push_back(id);
  }
  for (const auto& [id, q] : truth_by_id) {
    if (!est_by_id.count(id)) unmatched.push_back(id);
  }
  if (!unmatched.empty()) {
    std::sort(unmatched.begin(), unmatched.end());
    throw std::invalid_argument(fmt::format("unmatched segment ids: {}", fmt::join(unmatched, ", ")));
  }
  if (est_by_id.empty()) throw std::invalid_argument("no quads to compare");

  DeviationStats stats;
  stats.min = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& [id, e] : est_by_id) {
    const FacadeQuad* t = truth_by_id.at(id);
    const double dev = 0.5 * ((e->e1 - t->e1).norm() + (e->e2 - t->e2).norm());
    stats.per_facade.emplace_back(id, dev);
    stats.max = std::max(stats.max, dev);
    stats.min = std::min(stats.min, dev);
    sum += dev;
  }
  stats.mean = sum / static_cast<double>(stats.per_facade.size());
  return stats;
}

TextureError texture_error(const OrthoFrame& frame, const RgbImage& truth) {
  if (truth.width != frame.grid.width || truth.height != frame.grid.height) {
    throw std::invalid_argument(fmt::format("texture grid mismatch: frame {}x{}, truth {}x{}", frame.grid.width,
                                            frame.grid.height, truth.width, truth.height));
  }
  TextureError out;
  const std::size_t total = frame.valid.size();
  std::size_t valid = 0;
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    if (!frame.valid[i]) continue;
    ++valid;
    for (int c = 0; c < 3; ++c) {
      abs_sum += std::abs(static_cast<int>(frame.color.data[3 * i + c]) - static_cast<int>(truth.data[3 * i + c]));
    }
  }
  out.hole_frac = total == 0 ? 0.0 : static_cast<double>(total - valid) / static_cast<double>(total);
  if (valid > 0) out.mae = abs_sum / (3.0 * static_cast<double>(valid));
  return out;
}

std::vector<std::size_t> true_occluder_indices(std::span<const PointRecord> points,
                                               std::span<const synth::PointLabel> labels,
                                               const FacadeQuad& true_quad, const PipelineConfig& cfg) {
  if (labels.size() != points.size()) throw std::invalid_argument("labels must cover every point");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] == synth::PointLabel::occluder && in_occlusion_band(true_quad, points[i].point, cfg)) {
      out.push_back(i);
    }
  }
  return out;
}

RecallPrecision occlusion_recall(std::span<const std::size_t> detected, std::span<const std::size_t> truth,
                                 std::span<const synth::PointLabel> labels) {
  std::vector<std::size_t> d(detected.begin(), detected.end());
  std::vector<std::size_t> t(truth.begin(), truth.end());
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());

  RecallPrecision out;
  if (!t.empty()) {
    std::vector<std::size_t> hit;
    std::set_intersection(d.begin(), d.end(), t.begin(), t.end(), std::back_inserter(hit));
    out.recall = static_cast<double>(hit.size()) / static_cast<double>(t.size());
  }
  if (!d.empty()) {
    std::size_t correct = 0;
    for (const auto i : d) {
      if (i >= labels.size()) throw std::invalid_argument("detected index outside the labeled points");
      if (labels[i] == synth::PointLabel::occluder) ++correct;
    }
    out.precision = static_cast<double>(correct) / static_cast<double>(d.size());
  }
  return out;
}

RecallPrecision occlusion_recall(const OccluderSet& detected, std::span<const std::size_t> truth,
                                 std::span<const synth::PointLabel> labels) {
  std::vector<std::size_t> measured;
  for (std::size_t i = 0; i < detected.size(); ++i) {
    if (detected.sources[i] == OccluderSource::measured) measured.push_back(detected.point_indices[i]);
  }
  return occlusion_recall(measured, truth, labels);
}

namespace {

std::string opt(const std::optional<double>& v) {
  return v ? fmt::format("{:.4f}", *v) : std::string("n/a");
}

}  // namespace

std::string metrics_table(const DeviationStats& deviation, std::span<const FacadeMetrics> facades) {
  std::string out;
  out += "Deviation in planimetry, (x, y)\n";
  out += fmt::format("  {:<20}{}\n", "facades", deviation.per_facade.size());
  out += fmt::format("  {:<20}{:.4f} m\n", "maximum deviation", deviation.max);
  out += fmt::format("  {:<20}{:.4f} m\n", "minimum deviation", deviation.min);
  out += fmt::format("  {:<20}{:.4f} m\n", "average deviation", deviation.mean);
  out += "\nPer facade\n";
  out += fmt::format("  {:<8}{:>12}{:>12}{:>12}{:>14}{:>10}{:>11}\n", "segment", "deviation", "mae", "mae_raw",
                     "hole_frac", "recall", "precision");
  std::map<std::int64_t, const FacadeMetrics*> by_id;
  for (const auto& f : facades) by_id[f.segment_id] = &f;
  for (const auto& [id, dev] : deviation.per_facade) {
    const auto it = by_id.find(id);
    const FacadeMetrics* m = it == by_id.end() ? nullptr : it->second;
    std::optional<double> mae, mae_raw, holes, recall, precision;
    if (m && m->texture) {
      mae = m->texture->mae;
      holes = m->texture->hole_frac;
    }
    if (m && m->texture_mosaic) mae_raw = m->texture_mosaic->mae;
    if (m && m->occlusion) {
      recall = m->occlusion->recall;
      precision = m->occlusion->precision;
    }
    out += fmt::format("  {:<8}{:>12}{:>12}{:>12}{:>14}{:>10}{:>11}\n", id, opt(dev), opt(mae), opt(mae_raw),
                       opt(holes), opt(recall), opt(precision));
  }
  return out;
}

}  // namespace facademap
