#include "facademap/synthscene.hpp"

#include "facademap/facade_fit.hpp"
#include "facademap/text_format.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace facademap::synth {

namespace fs = std::filesystem;

namespace {

constexpr double kMinT = 1e-6;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

long long floor_index(double v) { return static_cast<long long>(std::floor(v)); }
bool is_even(long long v) { return (v % 2 + 2) % 2 == 0; }

Point2 left_normal(const Point2& dir) { return {-dir.y(), dir.x()}; }

Rgb apply_gain(const Rgb& c, const std::array<double, 3>& gain) {
  Rgb out{};
  for (int k = 0; k < 3; ++k) {
    out[k] = static_cast<std::uint8_t>(std::clamp(std::floor(c[k] * gain[k] + 0.5), 0.0, 255.0));
  }
  return out;
}

std::optional<double> nearest(std::optional<double> a, std::optional<double> b) {
  if (!a) return b;
  if (!b) return a;
  return std::min(*a, *b);
}

}  // namespace

// ---------------------------------------------------------------------------
// Scene primitives

double FacadeSpec::top_at(double s) const {
  if (crenel_amplitude == 0.0) return z_top;
  return is_even(floor_index(s / crenel_period)) ? z_top + crenel_amplitude : z_top - crenel_amplitude;
}

Rgb FacadeSpec::albedo_at(double s, double z) const {
  const double h = z - z_bottom;
  switch (texture) {
    case TextureKind::uniform:
      return color_a;
    case TextureKind::checkerboard:
      return is_even(floor_index(s / cell) + floor_index(h / cell)) ? color_a : color_b;
    case TextureKind::stripes:
      return is_even(floor_index(s / cell)) ? color_a : color_b;
    case TextureKind::window_grid: {
      const double fs = s / cell - std::floor(s / cell);
      const double fz = h / cell - std::floor(h / cell);
      const bool window = fs >= 0.25 && fs < 0.75 && fz >= 0.3 && fz < 0.8;
      return window ? color_b : color_a;
    }
  }
  return color_a;
}

Point3 OccluderSpec::anchor() const {
  switch (kind) {
    case OccluderKind::box:
      return 0.5 * (min + max);
    case OccluderKind::sphere:
    case OccluderKind::cylinder:
      return center;
  }
  return center;
}

PinholeCamera CameraSpec::camera() const {
  PinholeCamera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = 0.5 * width / std::tan(0.5 * deg2rad(hfov_deg));
  cam.fy = cam.fx;
  cam.cx = 0.5 * (width - 1);
  cam.cy = 0.5 * (height - 1);
  const double yaw = deg2rad(yaw_deg);
  const double pitch = deg2rad(pitch_deg);
  const Point3 forward(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), std::sin(pitch));
  cam.pose = RigidPose::look_along(position, forward);
  cam.validate();
  return cam;
}

std::optional<double> intersect_ground(double ground_z, const Point3& o, const Point3& d) {
  if (d.z() == 0.0) return std::nullopt;
  const double t = (ground_z - o.z()) / d.z();
  if (t > kMinT) return t;
  return std::nullopt;
}

std::optional<double> intersect_facade(const FacadeSpec& f, const Point3& o, const Point3& d) {
  const Point2 axis = f.axis();
  const Point2 n = left_normal(axis);
  const double denom = n.x() * d.x() + n.y() * d.y();
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double t = n.dot(f.p1 - planar(o)) / denom;
  if (!(t > kMinT)) return std::nullopt;
  const Point3 hit = o + t * d;
  const double s = (planar(hit) - f.p1).dot(axis);
  if (s < 0.0 || s > f.length()) return std::nullopt;
  if (hit.z() < f.z_bottom || hit.z() > f.top_at(s)) return std::nullopt;
  return t;
}

std::optional<double> intersect_occluder(const OccluderSpec& occ, const Point3& o, const Point3& d) {
  switch (occ.kind) {
    case OccluderKind::sphere: {
      const Point3 oc = o - occ.center;
      const double b = oc.dot(d);
      const double c = oc.squaredNorm() - occ.radius * occ.radius;
      const double disc = b * b - c;
      if (disc < 0.0) return std::nullopt;
      const double root = std::sqrt(disc);
      if (-b - root > kMinT) return -b - root;
      if (-b + root > kMinT) return -b + root;
      return std::nullopt;
    }
    case OccluderKind::box: {
      double t_near = -std::numeric_limits<double>::infinity();
      double t_far = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k) {
        if (d[k] == 0.0) {
          if (o[k] < occ.min[k] || o[k] > occ.max[k]) return std::nullopt;
          continue;
        }
        double t0 = (occ.min[k] - o[k]) / d[k];
        double t1 = (occ.max[k] - o[k]) / d[k];
        if (t0 > t1) std::swap(t0, t1);
        t_near = std::max(t_near, t0);
        t_far = std::min(t_far, t1);
      }
      if (t_near > t_far) return std::nullopt;
      if (t_near > kMinT) return t_near;
      if (t_far > kMinT) return t_far;
      return std::nullopt;
    }
    case OccluderKind::cylinder: {
      const double z0 = occ.center.z();
      const double z1 = z0 + occ.height;
      std::optional<double> best;
      // Lateral surface.
      const double ox = o.x() - occ.center.x();
      const double oy = o.y() - occ.center.y();
      const double a = d.x() * d.x() + d.y() * d.y();
      if (a > 0.0) {
        const double b = ox * d.x() + oy * d.y();
        const double c = ox * ox + oy * oy - occ.radius * occ.radius;
        const double disc = b * b - a * c;
        if (disc >= 0.0) {
          const double root = std::sqrt(disc);
          for (const double t : {(-b - root) / a, (-b + root) / a}) {
            if (t <= kMinT) continue;
            const double z = o.z() + t * d.z();
            if (z >= z0 && z <= z1) best = nearest(best, t);
          }
        }
      }
      // Caps.
      if (d.z() != 0.0) {
        for (const double zc : {z0, z1}) {
          const double t = (zc - o.z()) / d.z();
          if (t <= kMinT) continue;
          const double px = ox + t * d.x();
          const double py = oy + t * d.y();
          if (px * px + py * py <= occ.radius * occ.radius) best = nearest(best, t);
        }
      }
      return best;
    }
  }
  return std::nullopt;
}

std::optional<RayHit> ray_cast(const SceneSpec& scene, const Point3& origin, const Point3& direction,
                               SurfaceFilter filter) {
  std::optional<RayHit> best;
  auto consider = [&](std::optional<double> t, SurfaceKind kind, std::int64_t surface) {
    if (t && (!best || *t < best->t)) best = RayHit{*t, kind, surface, {}};
  };
  if (filter.ground) consider(intersect_ground(scene.ground_z, origin, direction), SurfaceKind::ground, -1);
  if (filter.facades) {
    for (const auto& f : scene.facades) consider(intersect_facade(f, origin, direction), SurfaceKind::facade, f.id);
  }
  if (filter.occluders) {
    for (std::size_t i = 0; i < scene.occluders.size(); ++i) {
      consider(intersect_occluder(scene.occluders[i], origin, direction), SurfaceKind::occluder,
               static_cast<std::int64_t>(i));
    }
  }
  if (!best) return best;
  switch (best->kind) {
    case SurfaceKind::ground:
      best->albedo = scene.ground_albedo;
      break;
    case SurfaceKind::occluder:
      best->albedo = scene.occluders[static_cast<std::size_t>(best->surface)].albedo;
      break;
    case SurfaceKind::facade: {
      const auto it = std::find_if(scene.facades.begin(), scene.facades.end(),
                                   [&](const FacadeSpec& f) { return f.id == best->surface; });
      const Point3 hit = origin + best->t * direction;
      const double s = (planar(hit) - it->p1).dot(it->axis());
      best->albedo = it->albedo_at(s, hit.z());
      break;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Sensors

std::string to_string(PointLabel label) {
  switch (label) {
    case PointLabel::facade:
      return "facade";
    case PointLabel::ground:
      return "ground";
    case PointLabel::occluder:
      return "occluder";
    case PointLabel::other:
      return "other";
  }
  return "other";
}

PointLabel label_from_string(const std::string& text) {
  if (text == "facade") return PointLabel::facade;
  if (text == "ground") return PointLabel::ground;
  if (text == "occluder") return PointLabel::occluder;
  if (text == "other") return PointLabel::other;
  throw std::invalid_argument("unknown point label '" + text + "'");
}

Point3 fan_direction(const SceneSpec& scene, int ray, bool left_side) {
  const Point2 dir = scene.trajectory.direction.normalized();
  const Point2 lateral = left_side ? left_normal(dir) : Point2(-left_normal(dir));
  const double step = scene.rays_per_frame > 1
                          ? (scene.fan_max_deg - scene.fan_min_deg) / (scene.rays_per_frame - 1)
                          : 0.0;
  const double elev = deg2rad(scene.fan_min_deg + ray * step);
  return Point3(std::cos(elev) * lateral.x(), std::cos(elev) * lateral.y(), std::sin(elev));
}

LaserScan simulate_laser(const SceneSpec& scene, std::uint64_t seed) {
  scene.validate();
  LaserScan scan;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, scene.noise_sigma > 0.0 ? scene.noise_sigma : 1.0);

  std::vector<bool> sides;
  if (scene.laser_sides != LaserSides::right) sides.push_back(true);
  if (scene.laser_sides != LaserSides::left) sides.push_back(false);

  std::int64_t frame_id = 0;
  for (int k = 0; k < scene.trajectory.frame_count; ++k) {
    const Point2 p = scene.trajectory.position(k);
    const Point3 sensor(p.x(), p.y(), scene.ground_z + scene.sensor_height);
    for (const bool left : sides) {
      scan.frames.emplace(frame_id, LaserFrame{frame_id, sensor});
      for (int j = 0; j < scene.rays_per_frame; ++j) {
        const Point3 dir = fan_direction(scene, j, left);
        const auto hit = ray_cast(scene, sensor, dir);
        if (!hit) continue;
        Point3 q = sensor + hit->t * dir;
        if (scene.noise_sigma > 0.0) q += Point3(noise(rng), noise(rng), noise(rng));
        scan.points.push_back({q, frame_id});
        PointLabel label = PointLabel::other;
        switch (hit->kind) {
          case SurfaceKind::facade:
            label = PointLabel::facade;
            break;
          case SurfaceKind::ground:
            label = PointLabel::ground;
            break;
          case SurfaceKind::occluder:
            label = PointLabel::occluder;
            break;
        }
        scan.labels.push_back(label);
        scan.surfaces.push_back(hit->surface);
      }
      ++frame_id;
    }
  }
  return scan;
}

RgbImage render_view(const SceneSpec& scene, const CameraSpec& spec) {
  const PinholeCamera cam = spec.camera();
  RgbImage img(cam.width, cam.height);
  const Rgb sky = apply_gain(scene.sky, spec.gain);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const auto hit = ray_cast(scene, cam.center(), cam.ray_direction(x, y));
      img.set(x, y, hit ? apply_gain(hit->albedo, spec.gain) : sky);
    }
  }
  return img;
}

BinaryMask occluder_silhouette(const SceneSpec& scene, const PinholeCamera& cam) {
  BinaryMask mask(cam.width, cam.height);
  const SurfaceFilter only_occluders{false, false, true};
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      if (ray_cast(scene, cam.center(), cam.ray_direction(x, y), only_occluders)) mask.set(x, y);
    }
  }
  return mask;
}

std::vector<Segment2> perturbed_cadastre(const SceneSpec& scene, std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), 0xcadu};
  std::mt19937_64 rng(seq);
  const double a = scene.cadastre_noise;
  std::uniform_real_distribution<double> uniform(-a, a);
  std::vector<Segment2> out;
  for (const auto& f : scene.facades) {
    Point2 p1 = f.p1;
    Point2 p2 = f.p2;
    if (a > 0.0) {
      if (scene.cadastre_noise_mode == CadastreNoiseMode::normal) {
        const Point2 n = left_normal(f.axis());
        p1 += uniform(rng) * n;
        p2 += uniform(rng) * n;
      } else {
        p1 += Point2(uniform(rng), uniform(rng));
        p2 += Point2(uniform(rng), uniform(rng));
      }
    }
    out.emplace_back(f.id, p1, p2);
  }
  return out;
}

std::vector<FacadeQuad> true_quads(const SceneSpec& scene) {
  const Point2 mid = scene.trajectory.position(scene.trajectory.frame_count / 2);
  const Point3 street(mid.x(), mid.y(), scene.ground_z + scene.sensor_height);
  std::vector<FacadeQuad> out;
  for (const auto& f : scene.facades) {
    FacadeQuad q;
    q.segment_id = f.id;
    q.e1 = f.p1;
    q.e2 = f.p2;
    q.z_bottom = f.z_bottom;
    q.z_top = f.max_top();
    q.plane = VerticalPlane::through(f.p1, left_normal(f.axis()));
    q.e2 -= signed_plane_distance(q.plane, q.e2) * q.plane.normal();
    q.lod_flag = f.crenel_amplitude != 0.0 ? LodFlag::detailed : LodFlag::smooth;
    const Point3 positions[] = {street};
    q = orient_toward(q, positions);
    q.validate();
    out.push_back(q);
  }
  return out;
}

RgbImage truth_texture(const SceneSpec& scene, const OrthoGrid& grid) {
  RgbImage img(grid.width, grid.height);
  const Point3 n(grid.normal.x(), grid.normal.y(), 0.0);
  const SurfaceFilter no_occluders{true, true, false};
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      const Point3 p = grid.world_at(col, row);
      const auto hit = ray_cast(scene, p + 0.5 * n, -n, no_occluders);
      img.set(col, row, hit ? hit->albedo : scene.sky);
    }
  }
  return img;
}

GroundTruth ground_truth(const SceneSpec& scene, const LaserScan& scan, double gsd) {
  GroundTruth gt;
  gt.quads = true_quads(scene);
  for (const auto& q : gt.quads) {
    gt.grids.push_back(make_ortho_grid(q, gsd));
    gt.textures.push_back(truth_texture(scene, gt.grids.back()));
  }
  gt.labels = scan.labels;
  for (const auto& c : scene.cameras) gt.silhouettes.push_back(occluder_silhouette(scene, c.camera()));
  return gt;
}

// ---------------------------------------------------------------------------
// Validation and text form

void SceneSpec::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid scene: " + what); };
  if (facades.empty()) fail("at least one facade is required");
  if (!(trajectory.frame_spacing > 0.0)) fail("frame_spacing must be > 0");
  if (trajectory.frame_count < 1) fail("frames must be >= 1");
  if (!(trajectory.direction.norm() > 0.0)) fail("trajectory direction must be non-zero");
  if (rays_per_frame < 1) fail("rays_per_frame must be >= 1");
  if (!(fan_max_deg > fan_min_deg)) fail("fan_max_deg must exceed fan_min_deg");
  if (!(sensor_height > 0.0)) fail("sensor_height must be > 0");
  if (noise_sigma < 0.0) fail("noise_sigma must be >= 0");
  if (cadastre_noise < 0.0) fail("cadastre_noise must be >= 0");

  std::vector<std::int64_t> ids;
  for (const auto& f : facades) {
    if (!(f.length() > 1e-6)) fail(fmt::format("facade {} has zero length", f.id));
    if (!(f.z_top > f.z_bottom)) fail(fmt::format("facade {} has z_top <= z_bottom", f.id));
    if (!(f.cell > 0.0)) fail(fmt::format("facade {} has a non-positive texture cell", f.id));
    if (f.crenel_amplitude != 0.0 && !(f.crenel_period > 0.0)) fail(fmt::format("facade {} crenel period", f.id));
    if (f.crenel_amplitude != 0.0 && f.z_top - std::abs(f.crenel_amplitude) <= f.z_bottom) {
      fail(fmt::format("facade {} crenellation reaches below its bottom", f.id));
    }
    ids.push_back(f.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) fail("duplicate facade id");

  const Point2 dir = trajectory.direction.normalized();
  for (std::size_t i = 0; i < occluders.size(); ++i) {
    const auto& o = occluders[i];
    if ((o.kind != OccluderKind::box) && !(o.radius > 0.0)) fail(fmt::format("occluder {} radius", i));
    if (o.kind == OccluderKind::cylinder && !(o.height > 0.0)) fail(fmt::format("occluder {} height", i));
    if (o.kind == OccluderKind::box && !((o.max - o.min).minCoeff() > 0.0)) fail(fmt::format("occluder {} box", i));
    // Must stand between the trajectory and at least one facade.
    const Point2 a = planar(o.anchor());
    const Point2 foot = trajectory.start + (a - trajectory.start).dot(dir) * dir;
    bool between = false;
    for (const auto& f : facades) {
      const Segment2 seg(f.id, f.p1, f.p2);
      const auto ca = segment_frame_coords(seg, a);
      const auto ct = segment_frame_coords(seg, foot);
      if (ca.s < 0.0 || ca.s > seg.length()) continue;
      if (ca.t * ct.t > 0.0 && std::abs(ca.t) < std::abs(ct.t)) between = true;
    }
    if (!between) fail(fmt::format("occluder {} is not between the trajectory and a facade", i));
  }
  for (const auto& c : cameras) {
    if (c.width <= 0 || c.height <= 0) fail(fmt::format("camera {} size", c.id));
    if (!(c.hfov_deg > 0.0 && c.hfov_deg < 180.0)) fail(fmt::format("camera {} hfov", c.id));
  }
}

namespace {

std::string rgb_text(const Rgb& c) { return fmt::format("{} {} {}", c[0], c[1], c[2]); }

const char* texture_name(TextureKind k) {
  switch (k) {
    case TextureKind::uniform:
      return "uniform";
    case TextureKind::checkerboard:
      return "checkerboard";
    case TextureKind::stripes:
      return "stripes";
    case TextureKind::window_grid:
      return "window-grid";
  }
  return "uniform";
}

const char* occluder_name(OccluderKind k) {
  switch (k) {
    case OccluderKind::box:
      return "box";
    case OccluderKind::sphere:
      return "sphere";
    case OccluderKind::cylinder:
      return "cylinder";
  }
  return "box";
}

const char* sides_name(LaserSides s) {
  switch (s) {
    case LaserSides::left:
      return "left";
    case LaserSides::right:
      return "right";
    case LaserSides::both:
      return "both";
  }
  return "left";
}

/// Typed accessors over one section's entries with file:line errors.
class SectionReader {
public:
  SectionReader(const text::Section& section, std::string file) : section_(section), file_(std::move(file)) {
    for (const auto& e : section.entries) {
      if (!values_.emplace(e.key, &e).second) throw FormatError(file_, e.line, "duplicate key '" + e.key + "'");
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::vector<double> numbers(const std::string& key, std::size_t n) {
    const auto& e = entry(key);
    const auto tok = text::split_ws(e.value);
    if (tok.size() != n) throw FormatError(file_, e.line, fmt::format("'{}' expects {} number(s)", key, n));
    std::vector<double> out;
    try {
      for (const auto t : tok) out.push_back(text::parse_double(t));
    } catch (const std::invalid_argument& ex) {
      throw FormatError(file_, e.line, ex.what());
    }
    return out;
  }

  void read(const std::string& key, double& v) {
    if (has(key)) v = numbers(key, 1)[0];
  }
  void read(const std::string& key, int& v) {
    if (!has(key)) return;
    const double d = numbers(key, 1)[0];
    if (d != std::floor(d)) throw FormatError(file_, entry(key).line, "'" + key + "' must be an integer");
    v = static_cast<int>(d);
  }
  void read(const std::string& key, std::int64_t& v) {
    if (!has(key)) return;
    const auto& e = entry(key);
    try {
      v = text::parse_int(e.value);
    } catch (const std::invalid_argument& ex) {
      throw FormatError(file_, e.line, ex.what());
    }
  }
  void read(const std::string& key, Point2& v) {
    if (!has(key)) return;
    const auto n = numbers(key, 2);
    v = Point2(n[0], n[1]);
  }
  void read(const std::string& key, Point3& v) {
    if (!has(key)) return;
    const auto n = numbers(key, 3);
    v = Point3(n[0], n[1], n[2]);
  }
  void read(const std::string& key, std::array<double, 3>& v) {
    if (!has(key)) return;
    const auto n = numbers(key, 3);
    v = {n[0], n[1], n[2]};
  }
  void read(const std::string& key, Rgb& v) {
    if (!has(key)) return;
    const auto n = numbers(key, 3);
    for (int k = 0; k < 3; ++k) {
      if (n[k] < 0 || n[k] > 255 || n[k] != std::floor(n[k])) {
        throw FormatError(file_, entry(key).line, "'" + key + "' expects integers in [0, 255]");
      }
      v[k] = static_cast<std::uint8_t>(n[k]);
    }
  }
  template <typename Enum>
  void read_enum(const std::string& key, Enum& v, const std::vector<std::pair<std::string, Enum>>& names) {
    if (!has(key)) return;
    const auto& e = entry(key);
    for (const auto& [name, value] : names) {
      if (e.value == name) {
        v = value;
        return;
      }
    }
    throw FormatError(file_, e.line, "unknown value '" + e.value + "' for '" + key + "'");
  }

  /// Every key must have been consumed by one of the listed names.
  void only(std::initializer_list<const char*> allowed) const {
    for (const auto& e : section_.entries) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || e.key == a;
      if (!ok) throw FormatError(file_, e.line, "unknown key '" + e.key + "'");
    }
  }

private:
  const text::KeyValue& entry(const std::string& key) const { return *values_.at(key); }

  const text::Section& section_;
  std::string file_;
  std::map<std::string, const text::KeyValue*> values_;
};

}  // namespace

std::string SceneSpec::to_text() const {
  std::string out;
  out += fmt::format("ground_z = {}\n", ground_z);
  out += fmt::format("sensor_height = {}\n", sensor_height);
  out += fmt::format("noise_sigma = {}\n", noise_sigma);
  out += fmt::format("fan_min_deg = {}\n", fan_min_deg);
  out += fmt::format("fan_max_deg = {}\n", fan_max_deg);
  out += fmt::format("rays_per_frame = {}\n", rays_per_frame);
  out += fmt::format("laser_sides = {}\n", sides_name(laser_sides));
  out += fmt::format("cadastre_noise = {}\n", cadastre_noise);
  out += fmt::format("cadastre_noise_mode = {}\n",
                     cadastre_noise_mode == CadastreNoiseMode::normal ? "normal" : "isotropic");
  out += fmt::format("sky = {}\n", rgb_text(sky));
  out += fmt::format("ground_albedo = {}\n", rgb_text(ground_albedo));
  out += "\n[trajectory]\n";
  out += fmt::format("start = {} {}\n", trajectory.start.x(), trajectory.start.y());
  out += fmt::format("direction = {} {}\n", trajectory.direction.x(), trajectory.direction.y());
  out += fmt::format("frame_spacing = {}\n", trajectory.frame_spacing);
  out += fmt::format("frames = {}\n", trajectory.frame_count);
  for (const auto& f : facades) {
    out += "\n[facade]\n";
    out += fmt::format("id = {}\n", f.id);
    out += fmt::format("p1 = {} {}\n", f.p1.x(), f.p1.y());
    out += fmt::format("p2 = {} {}\n", f.p2.x(), f.p2.y());
    out += fmt::format("z_bottom = {}\n", f.z_bottom);
    out += fmt::format("z_top = {}\n", f.z_top);
    out += fmt::format("texture = {}\n", texture_name(f.texture));
    out += fmt::format("cell = {}\n", f.cell);
    out += fmt::format("color_a = {}\n", rgb_text(f.color_a));
    out += fmt::format("color_b = {}\n", rgb_text(f.color_b));
    out += fmt::format("crenel_amplitude = {}\n", f.crenel_amplitude);
    out += fmt::format("crenel_period = {}\n", f.crenel_period);
  }
  for (const auto& o : occluders) {
    out += "\n[occluder]\n";
    out += fmt::format("kind = {}\n", occluder_name(o.kind));
    if (o.kind == OccluderKind::box) {
      out += fmt::format("min = {} {} {}\n", o.min.x(), o.min.y(), o.min.z());
      out += fmt::format("max = {} {} {}\n", o.max.x(), o.max.y(), o.max.z());
    } else {
      out += fmt::format("center = {} {} {}\n", o.center.x(), o.center.y(), o.center.z());
      out += fmt::format("radius = {}\n", o.radius);
      if (o.kind == OccluderKind::cylinder) out += fmt::format("height = {}\n", o.height);
    }
    out += fmt::format("albedo = {}\n", rgb_text(o.albedo));
  }
  for (const auto& c : cameras) {
    out += "\n[camera]\n";
    out += fmt::format("id = {}\n", c.id);
    out += fmt::format("position = {} {} {}\n", c.position.x(), c.position.y(), c.position.z());
    out += fmt::format("yaw_deg = {}\n", c.yaw_deg);
    out += fmt::format("pitch_deg = {}\n", c.pitch_deg);
    out += fmt::format("width = {}\n", c.width);
    out += fmt::format("height = {}\n", c.height);
    out += fmt::format("hfov_deg = {}\n", c.hfov_deg);
    out += fmt::format("gain = {} {} {}\n", c.gain[0], c.gain[1], c.gain[2]);
  }
  return out;
}

SceneSpec load_scene(const fs::path& path) {
  const auto sections = text::parse_sections(path);
  const std::string file = path.string();
  SceneSpec scene;

  SectionReader global(sections.front(), file);
  global.only({"ground_z", "sensor_height", "noise_sigma", "fan_min_deg", "fan_max_deg", "rays_per_frame",
               "laser_sides", "cadastre_noise", "cadastre_noise_mode", "sky", "ground_albedo", "camera_width",
               "camera_height", "camera_hfov_deg"});
  global.read("ground_z", scene.ground_z);
  global.read("sensor_height", scene.sensor_height);
  global.read("noise_sigma", scene.noise_sigma);
  global.read("fan_min_deg", scene.fan_min_deg);
  global.read("fan_max_deg", scene.fan_max_deg);
  global.read("rays_per_frame", scene.rays_per_frame);
  global.read_enum("laser_sides", scene.laser_sides,
                   {{"left", LaserSides::left}, {"right", LaserSides::right}, {"both", LaserSides::both}});
  global.read("cadastre_noise", scene.cadastre_noise);
  global.read_enum("cadastre_noise_mode", scene.cadastre_noise_mode,
                   {{"normal", CadastreNoiseMode::normal}, {"isotropic", CadastreNoiseMode::isotropic}});
  global.read("sky", scene.sky);
  global.read("ground_albedo", scene.ground_albedo);
  // Defaults applied to every [camera] section that does not override them.
  CameraSpec camera_defaults;
  global.read("camera_width", camera_defaults.width);
  global.read("camera_height", camera_defaults.height);
  global.read("camera_hfov_deg", camera_defaults.hfov_deg);

  bool have_trajectory = false;
  for (std::size_t i = 1; i < sections.size(); ++i) {
    const auto& sec = sections[i];
    SectionReader r(sec, file);
    if (sec.name == "trajectory") {
      if (have_trajectory) throw FormatError(file, sec.line, "duplicate [trajectory] section");
      have_trajectory = true;
      r.only({"start", "direction", "frame_spacing", "frames"});
      r.read("start", scene.trajectory.start);
      r.read("direction", scene.trajectory.direction);
      r.read("frame_spacing", scene.trajectory.frame_spacing);
      r.read("frames", scene.trajectory.frame_count);
    } else if (sec.name == "facade") {
      r.only({"id", "p1", "p2", "z_bottom", "z_top", "texture", "cell", "color_a", "color_b", "crenel_amplitude",
              "crenel_period"});
      FacadeSpec f;
      f.id = static_cast<std::int64_t>(scene.facades.size() + 1);
      r.read("id", f.id);
      r.read("p1", f.p1);
      r.read("p2", f.p2);
      r.read("z_bottom", f.z_bottom);
      r.read("z_top", f.z_top);
      r.read_enum("texture", f.texture,
                  {{"uniform", TextureKind::uniform},
                   {"checkerboard", TextureKind::checkerboard},
                   {"stripes", TextureKind::stripes},
                   {"window-grid", TextureKind::window_grid}});
      r.read("cell", f.cell);
      r.read("color_a", f.color_a);
      r.read("color_b", f.color_b);
      r.read("crenel_amplitude", f.crenel_amplitude);
      r.read("crenel_period", f.crenel_period);
      scene.facades.push_back(f);
    } else if (sec.name == "occluder") {
      r.only({"kind", "min", "max", "center", "radius", "height", "albedo"});
      OccluderSpec o;
      r.read_enum("kind", o.kind,
                  {{"box", OccluderKind::box}, {"sphere", OccluderKind::sphere}, {"cylinder", OccluderKind::cylinder}});
      r.read("min", o.min);
      r.read("max", o.max);
      r.read("center", o.center);
      r.read("radius", o.radius);
      r.read("height", o.height);
      r.read("albedo", o.albedo);
      scene.occluders.push_back(o);
    } else if (sec.name == "camera") {
      r.only({"id", "position", "yaw_deg", "pitch_deg", "width", "height", "hfov_deg", "gain"});
      CameraSpec c = camera_defaults;
      c.id = static_cast<std::int64_t>(scene.cameras.size());
      r.read("id", c.id);
      r.read("position", c.position);
      r.read("yaw_deg", c.yaw_deg);
      r.read("pitch_deg", c.pitch_deg);
      r.read("width", c.width);
      r.read("height", c.height);
      r.read("hfov_deg", c.hfov_deg);
      r.read("gain", c.gain);
      scene.cameras.push_back(c);
    } else {
      throw FormatError(file, sec.line, "unknown section [" + sec.name + "]");
    }
  }
  try {
    scene.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(file + ": " + e.what());
  }
  return scene;
}

// ---------------------------------------------------------------------------
// Files

DatasetPaths write_simulation(const SceneSpec& scene, std::uint64_t seed, const fs::path& out_dir, double truth_gsd) {
  scene.validate();
  const fs::path data_dir = out_dir / "dataset";
  const fs::path truth_dir = out_dir / "truth";
  fs::create_directories(data_dir / "images");
  fs::create_directories(truth_dir / "textures");
  fs::create_directories(truth_dir / "silhouettes");

  const LaserScan scan = simulate_laser(scene, seed);
  const DatasetPaths paths = DatasetPaths::in_directory(data_dir);
  write_points(paths.points, scan.points);
  write_frames(paths.frames, scan.frames);
  write_cadastre(paths.cadastre, perturbed_cadastre(scene, seed));

  std::vector<CameraEntry> cams;
  for (const auto& c : scene.cameras) {
    CameraEntry e;
    e.id = c.id;
    e.camera = c.camera();
    e.image_ref = fmt::format("images/cam_{}.ppm", c.id);
    e.image_path = data_dir / e.image_ref;
    write_image(render_view(scene, c), e.image_path);
    cams.push_back(std::move(e));
  }
  write_cameras(paths.cameras, cams);

  const GroundTruth gt = ground_truth(scene, scan, truth_gsd);
  text::write_file(truth_dir / "quads.txt", quads_to_text(gt.quads));
  text::write_file(truth_dir / "scene.txt", scene.to_text());
  std::string labels;
  labels.reserve(scan.labels.size() * 12);
  for (std::size_t i = 0; i < scan.labels.size(); ++i) {
    labels += fmt::format("{} {}\n", to_string(scan.labels[i]), scan.surfaces[i]);
  }
  text::write_file(truth_dir / "labels.txt", labels);
  for (std::size_t i = 0; i < gt.quads.size(); ++i) {
    const auto id = gt.quads[i].segment_id;
    write_image(gt.textures[i], truth_dir / "textures" / fmt::format("seg_{}.ppm", id));
    text::write_file(truth_dir / "textures" / fmt::format("seg_{}.txt", id),
                     ortho_sidecar(gt.grids[i], {}, {}, 0));
  }
  for (std::size_t i = 0; i < scene.cameras.size(); ++i) {
    write_mask(gt.silhouettes[i], truth_dir / "silhouettes" / fmt::format("cam_{}.pgm", scene.cameras[i].id));
  }
  return paths;
}

std::vector<PointLabel> load_labels(const fs::path& path) {
  std::vector<PointLabel> out;
  const auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tok = text::split_ws(text::strip_comment(lines[i]));
    if (tok.empty()) continue;
    if (tok.size() != 2) throw FormatError(path.string(), i + 1, "expected 'label surface'");
    try {
      out.push_back(label_from_string(std::string(tok[0])));
      (void)text::parse_int(tok[1]);
    } catch (const std::invalid_argument& e) {
      throw FormatError(path.string(), i + 1, e.what());
    }
  }
  return out;
}

}  // namespace facademap::synth
