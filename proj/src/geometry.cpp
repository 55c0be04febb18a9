#include "facademap/geometry.hpp"

#include <cmath>

namespace facademap {

Segment2::Segment2(std::int64_t id_, const Point2& a, const Point2& b) : id(id_), p1(a), p2(b) {
  if (!p1.allFinite() || !p2.allFinite()) {
    throw GeometryError("segment " + std::to_string(id) + " has non-finite endpoints");
  }
  if ((p2 - p1).norm() <= 1e-6) {
    throw GeometryError("segment " + std::to_string(id) + " is degenerate (length <= 1e-6 m)");
  }
}

VerticalPlane::VerticalPlane(double nx, double ny, double d) : nx_(nx), ny_(ny), d_(d) {
  if (!std::isfinite(nx) || !std::isfinite(ny) || !std::isfinite(d)) {
    throw GeometryError("vertical plane has non-finite coefficients");
  }
  if (std::abs(nx * nx + ny * ny - 1.0) > 1e-9) {
    throw GeometryError("vertical plane normal is not unit length");
  }
}

VerticalPlane VerticalPlane::from_normal(const Point2& normal, double d) {
  const double n = normal.norm();
  if (!(n > 0.0)) {
    throw GeometryError("vertical plane normal has zero length");
  }
  return {normal.x() / n, normal.y() / n, d / n};
}

VerticalPlane VerticalPlane::through(const Point2& point, const Point2& normal) {
  const double n = normal.norm();
  if (!(n > 0.0)) {
    throw GeometryError("vertical plane normal has zero length");
  }
  const Point2 unit = normal / n;
  return {unit.x(), unit.y(), unit.dot(point)};
}

std::string to_string(LodFlag flag) { return flag == LodFlag::smooth ? "smooth" : "detailed"; }

LodFlag lod_flag_from_string(const std::string& text) {
  if (text == "smooth") return LodFlag::smooth;
  if (text == "detailed") return LodFlag::detailed;
  throw std::invalid_argument("unknown LoD flag '" + text + "'");
}

Point3 FacadeQuad::centroid() const {
  const Point2 mid = 0.5 * (e1 + e2);
  return {mid.x(), mid.y(), 0.5 * (z_bottom + z_top)};
}

std::array<Point3, 4> FacadeQuad::vertices() const {
  return {Point3(e1.x(), e1.y(), z_bottom), Point3(e2.x(), e2.y(), z_bottom),
          Point3(e2.x(), e2.y(), z_top), Point3(e1.x(), e1.y(), z_top)};
}

void FacadeQuad::validate() const {
  if (!(z_top > z_bottom)) {
    throw GeometryError("facade " + std::to_string(segment_id) + ": z_top must exceed z_bottom");
  }
  if (std::abs(signed_plane_distance(plane, e1)) > 1e-6 ||
      std::abs(signed_plane_distance(plane, e2)) > 1e-6) {
    throw GeometryError("facade " + std::to_string(segment_id) + ": endpoints off the plane");
  }
  if ((e2 - e1).norm() <= 1e-6) {
    throw GeometryError("facade " + std::to_string(segment_id) + ": coincident endpoints");
  }
  if (!(msd >= 0.0)) {
    throw GeometryError("facade " + std::to_string(segment_id) + ": negative MSD");
  }
}

RigidPose::RigidPose(const Matrix3& r, const Point3& t, double tolerance) : rotation(r), translation(t) {
  if (!r.allFinite() || !t.allFinite()) {
    throw GeometryError("pose has non-finite entries");
  }
  const double ortho_err = (r.transpose() * r - Matrix3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > tolerance) {
    throw GeometryError("pose rotation is not orthonormal");
  }
  if (std::abs(r.determinant() - 1.0) > tolerance) {
    throw GeometryError("pose rotation is not proper (det != +1)");
  }
}

RigidPose RigidPose::look_along(const Point3& center, const Point3& forward) {
  const Point3 f = forward.normalized();
  Point3 right = f.cross(Point3::UnitZ());
  if (right.norm() < 1e-9) {
    // Looking straight up or down: pick world +x as image right.
    right = Point3::UnitX();
  }
  right.normalize();
  const Point3 down = f.cross(right);
  Matrix3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = f;
  return RigidPose(r, center, 1e-9);
}

void PinholeCamera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw GeometryError("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw GeometryError("camera image size must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw GeometryError("camera principal point not finite");
}

Point3 PinholeCamera::ray_direction(double u, double v) const {
  const Point3 local((u - cx) / fx, (v - cy) / fy, 1.0);
  return (pose.rotation * local).normalized();
}

std::optional<PixelCoord> project_to_image(const PinholeCamera& cam, const Point3& p) {
  const Point3 c = cam.pose.world_to_camera(p);
  if (c.z() <= 1e-9) return std::nullopt;
  return PixelCoord{cam.cx + cam.fx * c.x() / c.z(), cam.cy + cam.fy * c.y() / c.z()};
}

SegmentCoords segment_frame_coords(const Segment2& seg, const Point2& p) {
  const Point2 dir = seg.direction();
  const Point2 rel = p - seg.p1;
  return {rel.dot(dir), dir.x() * rel.y() - dir.y() * rel.x()};
}

SegmentCoords segment_frame_coords(const Segment2& seg, const Point3& p) {
  return segment_frame_coords(seg, planar(p));
}

}  // namespace facademap
