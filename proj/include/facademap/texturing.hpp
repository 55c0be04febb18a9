#pragma once

#include "facademap/geometry.hpp"
#include "facademap/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace facademap {

/// Facade-plane raster. Column c covers s in [c*gsd, (c+1)*gsd) measured from
/// e1 toward e2; row 0 is the top row and the bottom row starts at z_bottom.
/// Pixel centers sit at half steps.
struct OrthoGrid {
  std::int64_t segment_id = 0;
  Point2 origin = Point2::Zero();  // e1
  Point2 axis = Point2::UnitX();   // unit e1 -> e2
  Point2 normal = Point2::UnitY(); // street side
  double length = 0.0;
  double z_bottom = 0.0;
  double z_top = 0.0;
  double gsd = 0.05;
  int width = 0;
  int height = 0;

  double s_at(int col) const { return (col + 0.5) * gsd; }
  double z_at(int row) const { return z_bottom + (height - row - 0.5) * gsd; }
  Point3 world_at(int col, int row) const {
    const Point2 p = origin + s_at(col) * axis;
    return {p.x(), p.y(), z_at(row)};
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  friend bool operator==(const OrthoGrid&, const OrthoGrid&) = default;
};

/// Throws std::invalid_argument when gsd <= 0.
OrthoGrid make_ortho_grid(const FacadeQuad& quad, double gsd);

/// One perspective view resampled onto the facade grid.
struct OrthoLayer {
  OrthoGrid grid;
  std::int64_t view = 0;  // camera index
  RgbImage color;
  std::vector<std::uint8_t> valid;
  std::vector<double> score;
};

/// Mosaic of layers; `source` is the winning view per pixel or -1 for holes.
struct OrthoFrame {
  OrthoGrid grid;
  RgbImage color;
  std::vector<std::uint8_t> valid;
  std::vector<std::int64_t> source;

  std::size_t hole_count() const;
};

struct ViewSelection {
  std::size_t camera_index = 0;
  double score = 0.0;
};

/// Area of a simple polygon clipped to [0, width] x [0, height].
double clipped_polygon_area(std::span<const Point2> polygon, double width, double height);

/// Keeps cameras that see all four quad vertices in front of them, whose
/// projected quad covers at least `view_min_frac` of the frame, and that face
/// the street side of the facade. Score is cos(incidence) / distance to the
/// facade centroid. Results are in camera order.
std::vector<ViewSelection> select_views(std::span<const PinholeCamera> cameras, const FacadeQuad& quad,
                                        double view_min_frac);

/// Bilinear sample at a continuous pixel position (pixel centers at integers),
/// neighbours clamped to the image.
std::array<double, 3> sample_bilinear(const RgbImage& image, double u, double v);

/// Resamples `image` onto the facade grid. A pixel is valid when its facade
/// point projects in front of the camera, inside the frame, onto a clear
/// hard-mask pixel. Its score is view_score * (1 - soft weight).
OrthoLayer rectify_view(const PinholeCamera& cam, const RgbImage& image, const BinaryMask& hard_mask,
                        const SoftMask& soft_mask, const OrthoGrid& grid, std::int64_t view, double view_score);

/// Per pixel, the valid sample with the highest score (ties: lowest view).
/// Pixels valid in no layer are holes. Throws if a layer's grid differs.
OrthoFrame mosaic(const OrthoGrid& grid, std::span<const OrthoLayer> layers);

/// Gray-world white balance over valid pixels; holes untouched. Channels with
/// a zero mean are left as they are. No-op on an all-hole frame.
OrthoFrame gray_world_balance(const OrthoFrame& frame);

/// Set exactly at hole pixels.
BinaryMask export_hole_map(const OrthoFrame& frame);

/// key = value sidecar describing the grid and contributing views.
std::string ortho_sidecar(const OrthoGrid& grid, std::span<const std::int64_t> view_ids,
                          std::span<const double> view_scores, std::size_t holes);
OrthoGrid load_ortho_sidecar(const std::filesystem::path& path);

}  // namespace facademap
