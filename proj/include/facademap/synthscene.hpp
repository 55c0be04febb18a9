#pragma once

#include "facademap/dataset.hpp"
#include "facademap/texturing.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace facademap::synth {

enum class TextureKind { uniform, checkerboard, stripes, window_grid };

/// Vertical textured rectangle standing on the segment p1 -> p2. With a
/// nonzero crenel amplitude the top edge alternates between z_top + amplitude
/// and z_top - amplitude every crenel_period meters along the facade.
struct FacadeSpec {
  std::int64_t id = 0;
  Point2 p1 = Point2::Zero();
  Point2 p2 = Point2::UnitX();
  double z_bottom = 0.0;
  double z_top = 1.0;
  TextureKind texture = TextureKind::checkerboard;
  double cell = 1.0;
  Rgb color_a{200, 180, 150};
  Rgb color_b{120, 110, 100};
  double crenel_amplitude = 0.0;
  double crenel_period = 2.0;

  double length() const { return (p2 - p1).norm(); }
  Point2 axis() const { return (p2 - p1) / length(); }
  /// Altitude of the top edge at abscissa s.
  double top_at(double s) const;
  /// Highest point of the top edge.
  double max_top() const { return z_top + std::abs(crenel_amplitude); }
  Rgb albedo_at(double s, double z) const;
};

enum class OccluderKind { box, sphere, cylinder };

/// box: [min, max]; sphere: center + radius; cylinder: vertical, base center
/// + radius + height.
struct OccluderSpec {
  OccluderKind kind = OccluderKind::sphere;
  Point3 min = Point3::Zero();
  Point3 max = Point3::Zero();
  Point3 center = Point3::Zero();
  double radius = 1.0;
  double height = 1.0;
  Rgb albedo{40, 110, 40};

  Point3 anchor() const;
};

struct TrajectorySpec {
  Point2 start = Point2::Zero();
  Point2 direction = Point2::UnitX();
  double frame_spacing = 0.05;
  int frame_count = 400;

  Point2 position(int k) const { return start + (k * frame_spacing) * direction.normalized(); }
};

enum class LaserSides { left, right, both };
enum class CadastreNoiseMode { normal, isotropic };

struct CameraSpec {
  std::int64_t id = 0;
  Point3 position = Point3::Zero();
  double yaw_deg = 0.0;    ///< heading of the optical axis, CCW from +x
  double pitch_deg = 0.0;  ///< positive looks up
  int width = 480;
  int height = 270;
  double hfov_deg = 90.0;
  std::array<double, 3> gain{1.0, 1.0, 1.0};

  PinholeCamera camera() const;
};

struct SceneSpec {
  double ground_z = 0.0;
  double sensor_height = 2.5;
  double noise_sigma = 0.03;
  double fan_min_deg = -20.0;
  double fan_max_deg = 60.0;
  int rays_per_frame = 201;
  LaserSides laser_sides = LaserSides::left;
  double cadastre_noise = 0.0;
  CadastreNoiseMode cadastre_noise_mode = CadastreNoiseMode::normal;
  Rgb sky{150, 190, 230};
  Rgb ground_albedo{90, 90, 90};

  std::vector<FacadeSpec> facades;
  std::vector<OccluderSpec> occluders;
  TrajectorySpec trajectory;
  std::vector<CameraSpec> cameras;

  /// Throws std::invalid_argument on an invalid scene (no facades, bad
  /// trajectory, occluder not between the trajectory and any facade, ...).
  void validate() const;
  std::string to_text() const;
};

/// Sectioned key = value scene file: global keys, then repeatable
/// [trajectory], [facade], [occluder] and [camera] sections.
SceneSpec load_scene(const std::filesystem::path& path);

enum class SurfaceKind { facade, ground, occluder };

struct SurfaceFilter {
  bool facades = true;
  bool ground = true;
  bool occluders = true;
};

struct RayHit {
  double t = 0.0;
  SurfaceKind kind = SurfaceKind::ground;
  /// Facade id, occluder index, or -1 for the ground.
  std::int64_t surface = -1;
  Rgb albedo{0, 0, 0};
};

/// Nearest intersection with t > 1e-6, or nothing on a miss. `direction` must
/// be unit length.
std::optional<RayHit> ray_cast(const SceneSpec& scene, const Point3& origin, const Point3& direction,
                               SurfaceFilter filter = {});

/// Per-surface nearest positive intersection parameter (t > 1e-6).
std::optional<double> intersect_facade(const FacadeSpec& f, const Point3& origin, const Point3& direction);
std::optional<double> intersect_occluder(const OccluderSpec& o, const Point3& origin, const Point3& direction);
std::optional<double> intersect_ground(double ground_z, const Point3& origin, const Point3& direction);

enum class PointLabel : std::uint8_t { facade, ground, occluder, other };
std::string to_string(PointLabel label);
PointLabel label_from_string(const std::string& text);

struct LaserScan {
  std::vector<PointRecord> points;
  FrameTable frames;
  std::vector<PointLabel> labels;
  /// Facade id, occluder index or -1, per point.
  std::vector<std::int64_t> surfaces;
};

/// Unit direction of ray `j` in a fan perpendicular to the trajectory.
Point3 fan_direction(const SceneSpec& scene, int ray, bool left_side);

/// Vertical sweeps along the trajectory; each hit becomes a point of the
/// sweep's frame, perturbed by isotropic Gaussian noise of noise_sigma.
LaserScan simulate_laser(const SceneSpec& scene, std::uint64_t seed);

/// One ray per pixel center; flat albedo times the camera gain, sky on a miss.
RgbImage render_view(const SceneSpec& scene, const CameraSpec& cam);

/// Pixels whose ray hits an occluder (facades and ground ignored).
BinaryMask occluder_silhouette(const SceneSpec& scene, const PinholeCamera& cam);

/// Segments derived from the facades, with each endpoint perturbed by uniform
/// noise of amplitude cadastre_noise (along the facade normal, or in both
/// planimetric axes for the isotropic mode).
std::vector<Segment2> perturbed_cadastre(const SceneSpec& scene, std::uint64_t seed);

/// Ground-truth quads, normals toward the trajectory.
std::vector<FacadeQuad> true_quads(const SceneSpec& scene);

/// Occluder-free appearance of the scene on an ortho grid: each pixel looks
/// at its facade point head-on from 0.5 m in front of it.
RgbImage truth_texture(const SceneSpec& scene, const OrthoGrid& grid);

struct GroundTruth {
  std::vector<FacadeQuad> quads;
  std::vector<OrthoGrid> grids;
  std::vector<RgbImage> textures;
  std::vector<PointLabel> labels;
  std::vector<BinaryMask> silhouettes;  // per camera
};

GroundTruth ground_truth(const SceneSpec& scene, const LaserScan& scan, double gsd);

/// Writes dataset/ (ingest formats + images/) and truth/ under `out_dir`.
/// Returns the dataset file paths.
DatasetPaths write_simulation(const SceneSpec& scene, std::uint64_t seed, const std::filesystem::path& out_dir,
                              double truth_gsd = 0.05);

/// labels.txt reader: one `label surface` line per point.
std::vector<PointLabel> load_labels(const std::filesystem::path& path);

}  // namespace facademap::synth
