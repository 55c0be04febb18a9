#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace facademap {

/// World-frame point in meters: projected planimetric coordinates plus altitude.
using Point3 = Eigen::Vector3d;
using Point2 = Eigen::Vector2d;
using Matrix3 = Eigen::Matrix3d;

/// Raised when an input violates a geometric invariant (degenerate fit,
/// non-orthonormal pose, zero-length segment, ...).
class GeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline Point2 planar(const Point3& p) { return {p.x(), p.y()}; }

/// Cadastral facade line in planimetry.
struct Segment2 {
  std::int64_t id = 0;
  Point2 p1 = Point2::Zero();
  Point2 p2 = Point2::Zero();

  Segment2() = default;
  Segment2(std::int64_t id, const Point2& p1, const Point2& p2);

  double length() const { return (p2 - p1).norm(); }
  Point2 direction() const { return (p2 - p1) / length(); }
};

/// Vertical plane nx*X + ny*Y = d with a unit planimetric normal.
class VerticalPlane {
public:
  VerticalPlane() = default;
  /// Throws GeometryError unless nx^2 + ny^2 == 1 within 1e-9.
  VerticalPlane(double nx, double ny, double d);

  /// Normalizes (nx, ny) and scales d accordingly.
  static VerticalPlane from_normal(const Point2& normal, double d);
  /// Plane through `point` with the given (not necessarily unit) normal.
  static VerticalPlane through(const Point2& point, const Point2& normal);

  double nx() const { return nx_; }
  double ny() const { return ny_; }
  double d() const { return d_; }
  Point2 normal() const { return {nx_, ny_}; }
  VerticalPlane flipped() const { return {-nx_, -ny_, -d_}; }

private:
  double nx_ = 1.0;
  double ny_ = 0.0;
  double d_ = 0.0;
};

enum class LodFlag { smooth, detailed };

std::string to_string(LodFlag flag);
LodFlag lod_flag_from_string(const std::string& text);

/// 3D facade quadrilateral: planimetric extremities on a vertical plane
/// extruded between two altitudes.
struct FacadeQuad {
  std::int64_t segment_id = 0;
  Point2 e1 = Point2::Zero();
  Point2 e2 = Point2::Zero();
  double z_bottom = 0.0;
  double z_top = 0.0;
  VerticalPlane plane;
  double msd = 0.0;
  LodFlag lod_flag = LodFlag::smooth;

  double length() const { return (e2 - e1).norm(); }
  double height() const { return z_top - z_bottom; }
  /// Unit vector from e1 to e2.
  Point2 axis() const { return (e2 - e1) / length(); }
  Point3 centroid() const;
  /// (e1, z_bottom), (e2, z_bottom), (e2, z_top), (e1, z_top).
  std::array<Point3, 4> vertices() const;
  /// Throws GeometryError when an invariant is broken.
  void validate() const;
};

/// Camera-to-world rigid transform.
struct RigidPose {
  Matrix3 rotation = Matrix3::Identity();
  Point3 translation = Point3::Zero();

  RigidPose() = default;
  /// Throws GeometryError unless `rotation` is orthonormal with det +1
  /// within `tolerance`.
  RigidPose(const Matrix3& rotation, const Point3& translation, double tolerance = 1e-9);

  Point3 world_to_camera(const Point3& p) const { return rotation.transpose() * (p - translation); }
  Point3 camera_to_world(const Point3& p) const { return rotation * p + translation; }

  /// Camera looking along `forward` with image v pointing as close to world -z
  /// as possible (no roll).
  static RigidPose look_along(const Point3& center, const Point3& forward);
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

/// Ideal pinhole camera. Image origin is the top-left pixel center, u grows
/// rightward and v downward.
struct PinholeCamera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1920;
  int height = 1080;
  RigidPose pose;

  void validate() const;
  bool in_frame(const PixelCoord& px) const {
    return px.u >= 0.0 && px.v >= 0.0 && px.u < width && px.v < height;
  }
  /// Unit world-frame direction of the ray through continuous pixel (u, v).
  Point3 ray_direction(double u, double v) const;
  Point3 center() const { return pose.translation; }
};

/// Returns nothing when the point is at or behind the camera (depth <= 1e-9).
std::optional<PixelCoord> project_to_image(const PinholeCamera& cam, const Point3& p);

/// Positive on the side the normal points to.
inline double signed_plane_distance(const VerticalPlane& plane, const Point3& p) {
  return plane.nx() * p.x() + plane.ny() * p.y() - plane.d();
}
inline double signed_plane_distance(const VerticalPlane& plane, const Point2& p) {
  return plane.nx() * p.x() + plane.ny() * p.y() - plane.d();
}

struct SegmentCoords {
  double s = 0.0;  ///< along p1 -> p2
  double t = 0.0;  ///< perpendicular, positive to the left of p1 -> p2
};

SegmentCoords segment_frame_coords(const Segment2& seg, const Point3& p);
SegmentCoords segment_frame_coords(const Segment2& seg, const Point2& p);

}  // namespace facademap
