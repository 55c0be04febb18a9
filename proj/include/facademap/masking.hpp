#pragma once

#include "facademap/config.hpp"
#include "facademap/geometry.hpp"
#include "facademap/occlusion.hpp"
#include "facademap/raster.hpp"

#include <vector>

namespace facademap {

/// Integer lattice disc {(dx, dy) : dx^2 + dy^2 <= r^2}, stored as the
/// horizontal half-width for each dy in [-r, r] (index dy + r).
std::vector<int> disc_half_widths(int r);
/// Number of lattice points in the disc of radius r.
std::size_t disc_area(int r);

/// Sets the nearest pixel (round half up) of every occluder that projects in
/// front of the camera inside [0, width) x [0, height).
BinaryMask rasterize_points(const PinholeCamera& cam, const OccluderSet& occ);

/// Minkowski dilation by the lattice disc; the image border clips.
BinaryMask disc_dilate(const BinaryMask& mask, int r);
/// Erosion by the lattice disc; pixels outside the image count as set, which
/// makes it the adjoint of disc_dilate (so openings are idempotent and
/// closings cover their input up to the frame border).
BinaryMask disc_erode(const BinaryMask& mask, int r);
/// Classical opening, dilate(erode(mask, r), r).
BinaryMask disc_open(const BinaryMask& mask, int r);

/// Chessboard distance from each pixel to the nearest clear pixel inside the
/// image; 0 on clear pixels, INT_MAX when the mask has no clear pixel.
std::vector<int> chessboard_distance_to_clear(const BinaryMask& mask);

/// Feathered weights: 0 on clear pixels, distance / w inside a band of width
/// w along the contour, 1 deeper inside.
SoftMask feather_contours(const BinaryMask& mask, int w);

struct OcclusionMasks {
  BinaryMask hard;
  SoftMask soft;
};

/// rasterize -> dilate(dilate_r) -> erode(erode_r) -> feather(feather_w).
OcclusionMasks build_occlusion_masks(const PinholeCamera& cam, const OccluderSet& occ, const PipelineConfig& cfg);

}  // namespace facademap
