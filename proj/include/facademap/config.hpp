#pragma once

#include <filesystem>
#include <string>

namespace facademap {

/// Pipeline parameters. Lengths in meters, radii and widths in pixels.
struct PipelineConfig {
  /// Accumulation grid step.
  double grid_step = 0.05;
  /// Half-width of the orthogonal band around each cadastral segment.
  double neighborhood = 1.0;
  /// Minimum number of hyper-points for a facade cluster to be retained.
  int min_cluster_pts = 500;
  /// Laser sensor height above the road, subtracted from the sensor altitude.
  double h_vehicle = 2.5;
  /// Standard curb (sidewalk border) height added back to reach the facade foot.
  double h_curb = 0.15;
  /// Top-profile MSD above which the maximum altitude is used instead of the median.
  double tau_msd = 0.25;

  // Occluder band in front of each facade.
  double occ_d_min = 0.3;
  double occ_d_max = 15.0;
  double occ_ground_eps = 0.2;
  double occ_extent_margin = 0.5;
  int occ_min_pts = 30;

  // Image masks.
  int dilate_r = 50;
  int erode_r = 20;
  int feather_w = 10;

  // Texturing.
  double ortho_gsd = 0.05;
  double view_min_frac = 0.05;

  // Optional 3D cube dilation of occluders.
  double cube_half_edge = 0.10;
  bool cube_dilation_enabled = false;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
  /// `key = value` lines, one per parameter, in declaration order.
  std::string to_text() const;
};

/// Reads `key = value` lines ('#' comments). Unknown keys and non-numeric
/// values are errors; missing keys keep their defaults.
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace facademap
