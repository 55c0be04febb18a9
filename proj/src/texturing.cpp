#include "facademap/texturing.hpp"

#include "facademap/text_format.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace facademap {

std::size_t OrthoFrame::hole_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{0}));
}

OrthoGrid make_ortho_grid(const FacadeQuad& quad, double gsd) {
  if (!(gsd > 0.0) || !std::isfinite(gsd)) throw std::invalid_argument("ortho GSD must be positive");
  OrthoGrid g;
  g.segment_id = quad.segment_id;
  g.origin = quad.e1;
  g.axis = quad.axis();
  g.normal = quad.plane.normal();
  g.length = quad.length();
  g.z_bottom = quad.z_bottom;
  g.z_top = quad.z_top;
  g.gsd = gsd;
  g.width = std::max(1, static_cast<int>(std::ceil(g.length / gsd - 1e-9)));
  g.height = std::max(1, static_cast<int>(std::ceil((quad.z_top - quad.z_bottom) / gsd - 1e-9)));
  return g;
}

double clipped_polygon_area(std::span<const Point2> polygon, double width, double height) {
  std::vector<Point2> poly(polygon.begin(), polygon.end());
  // Sutherland-Hodgman against the four half-planes of the frame.
  auto clip = [&](auto inside, auto intersect) {
    std::vector<Point2> out;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2& a = poly[i];
      const Point2& b = poly[(i + 1) % poly.size()];
      const bool ia = inside(a);
      const bool ib = inside(b);
      if (ia) out.push_back(a);
      if (ia != ib) out.push_back(intersect(a, b));
    }
    poly = std::move(out);
  };
  auto at_x = [](double x) {
    return [x](const Point2& a, const Point2& b) {
      const double t = (x - a.x()) / (b.x() - a.x());
      return Point2(x, a.y() + t * (b.y() - a.y()));
    };
  };
  auto at_y = [](double y) {
    return [y](const Point2& a, const Point2& b) {
      const double t = (y - a.y()) / (b.y() - a.y());
      return Point2(a.x() + t * (b.x() - a.x()), y);
    };
  };
  clip([](const Point2& p) { return p.x() >= 0.0; }, at_x(0.0));
  if (!poly.empty()) clip([&](const Point2& p) { return p.x() <= width; }, at_x(width));
  if (!poly.empty()) clip([](const Point2& p) { return p.y() >= 0.0; }, at_y(0.0));
  if (!poly.empty()) clip([&](const Point2& p) { return p.y() <= height; }, at_y(height));
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % poly.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(twice);
}

std::vector<ViewSelection> select_views(std::span<const PinholeCamera> cameras, const FacadeQuad& quad,
                                        double view_min_frac) {
  std::vector<ViewSelection> out;
  const auto corners = quad.vertices();
  const Point3 centroid = quad.centroid();
  const Point3 normal(quad.plane.nx(), quad.plane.ny(), 0.0);
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const auto& cam = cameras[i];
    std::array<Point2, 4> projected;
    bool in_front = true;
    for (std::size_t k = 0; k < 4 && in_front; ++k) {
      const auto px = project_to_image(cam, corners[k]);
      if (!px) {
        in_front = false;
      } else {
        projected[k] = Point2(px->u, px->v);
      }
    }
    if (!in_front) continue;
    const double area = clipped_polygon_area(projected, cam.width, cam.height);
    if (area / (static_cast<double>(cam.width) * cam.height) < view_min_frac) continue;

    const Point3 to_camera = cam.center() - centroid;
    const double dist = to_camera.norm();
    if (!(dist > 0.0)) continue;
    const double cos_incidence = normal.dot(to_camera) / dist;
    // A camera behind the wall would texture it with its back side.
    if (cos_incidence <= 0.0) continue;
    out.push_back({i, cos_incidence / dist});
  }
  return out;
}

std::array<double, 3> sample_bilinear(const RgbImage& image, double u, double v) {
  u = std::clamp(u, 0.0, static_cast<double>(image.width - 1));
  v = std::clamp(v, 0.0, static_cast<double>(image.height - 1));
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const int x1 = std::min(x0 + 1, image.width - 1);
  const int y1 = std::min(y0 + 1, image.height - 1);
  const double fx = u - x0;
  const double fy = v - y0;
  std::array<double, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const double top = (1.0 - fx) * image.at(x0, y0)[c] + fx * image.at(x1, y0)[c];
    const double bottom = (1.0 - fx) * image.at(x0, y1)[c] + fx * image.at(x1, y1)[c];
    out[c] = (1.0 - fy) * top + fy * bottom;
  }
  return out;
}

OrthoLayer rectify_view(const PinholeCamera& cam, const RgbImage& image, const BinaryMask& hard_mask,
                        const SoftMask& soft_mask, const OrthoGrid& grid, std::int64_t view, double view_score) {
  if (!(grid.gsd > 0.0)) throw std::invalid_argument("ortho GSD must be positive");
  if (image.width != cam.width || image.height != cam.height || hard_mask.width != cam.width ||
      hard_mask.height != cam.height || soft_mask.width != cam.width || soft_mask.height != cam.height) {
    throw std::invalid_argument("image and masks must match the camera frame");
  }
  OrthoLayer layer;
  layer.grid = grid;
  layer.view = view;
  layer.color = RgbImage(grid.width, grid.height);
  layer.valid.assign(grid.pixel_count(), 0);
  layer.score.assign(grid.pixel_count(), 0.0);

  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      const auto px = project_to_image(cam, grid.world_at(col, row));
      if (!px || !cam.in_frame(*px)) continue;
      const int mx = std::min(static_cast<int>(std::floor(px->u + 0.5)), cam.width - 1);
      const int my = std::min(static_cast<int>(std::floor(px->v + 0.5)), cam.height - 1);
      if (hard_mask.get(mx, my)) continue;
      const auto rgb = sample_bilinear(image, px->u, px->v);
      const std::size_t i = static_cast<std::size_t>(row) * grid.width + col;
      layer.color.set(col, row,
                      {static_cast<std::uint8_t>(std::floor(rgb[0] + 0.5)),
                       static_cast<std::uint8_t>(std::floor(rgb[1] + 0.5)),
                       static_cast<std::uint8_t>(std::floor(rgb[2] + 0.5))});
      layer.valid[i] = 1;
      layer.score[i] = view_score * (1.0 - soft_mask.sample(px->u, px->v));
    }
  }
  return layer;
}

OrthoFrame mosaic(const OrthoGrid& grid, std::span<const OrthoLayer> layers) {
  OrthoFrame frame;
  frame.grid = grid;
  frame.color = RgbImage(grid.width, grid.height);
  frame.valid.assign(grid.pixel_count(), 0);
  frame.source.assign(grid.pixel_count(), -1);

  std::vector<const OrthoLayer*> ordered;
  for (const auto& l : layers) {
    if (!(l.grid == grid)) throw std::invalid_argument("mosaic layers must share the frame grid");
    ordered.push_back(&l);
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](auto a, auto b) { return a->view < b->view; });

  std::vector<double> best(grid.pixel_count(), 0.0);
  for (const OrthoLayer* l : ordered) {
    for (std::size_t i = 0; i < grid.pixel_count(); ++i) {
      if (!l->valid[i]) continue;
      if (frame.valid[i] && !(l->score[i] > best[i])) continue;
      frame.valid[i] = 1;
      frame.source[i] = l->view;
      best[i] = l->score[i];
      std::copy_n(l->color.data.begin() + 3 * i, 3, frame.color.data.begin() + 3 * i);
    }
  }
  return frame;
}

OrthoFrame gray_world_balance(const OrthoFrame& frame) {
  OrthoFrame out = frame;
  std::array<double, 3> sum{};
  std::size_t n = 0;
  for (std::size_t i = 0; i < frame.valid.size(); ++i) {
    if (!frame.valid[i]) continue;
    for (int c = 0; c < 3; ++c) sum[c] += frame.color.data[3 * i + c];
    ++n;
  }
  if (n == 0) return out;
  std::array<double, 3> mean{};
  for (int c = 0; c < 3; ++c) mean[c] = sum[c] / static_cast<double>(n);
  const double gray = (mean[0] + mean[1] + mean[2]) / 3.0;
  std::array<double, 3> gain{};
  for (int c = 0; c < 3; ++c) gain[c] = mean[c] > 0.0 ? gray / mean[c] : 1.0;

  for (std::size_t i = 0; i < frame.valid.size(); ++i) {
    if (!frame.valid[i]) continue;
    for (int c = 0; c < 3; ++c) {
      const double v = std::floor(frame.color.data[3 * i + c] * gain[c] + 0.5);
      out.color.data[3 * i + c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return out;
}

BinaryMask export_hole_map(const OrthoFrame& frame) {
  BinaryMask mask(frame.grid.width, frame.grid.height);
  for (std::size_t i = 0; i < frame.valid.size(); ++i) mask.bits[i] = frame.valid[i] ? 0 : 1;
  return mask;
}

std::string ortho_sidecar(const OrthoGrid& g, std::span<const std::int64_t> view_ids,
                          std::span<const double> view_scores, std::size_t holes) {
  std::string out;
  out += fmt::format("segment_id = {}\n", g.segment_id);
  out += fmt::format("origin = {} {}\n", g.origin.x(), g.origin.y());
  out += fmt::format("axis = {} {}\n", g.axis.x(), g.axis.y());
  out += fmt::format("normal = {} {}\n", g.normal.x(), g.normal.y());
  out += fmt::format("length = {}\n", g.length);
  out += fmt::format("z_bottom = {}\n", g.z_bottom);
  out += fmt::format("z_top = {}\n", g.z_top);
  out += fmt::format("gsd = {}\n", g.gsd);
  out += fmt::format("width = {}\n", g.width);
  out += fmt::format("height = {}\n", g.height);
  out += "views =";
  for (const auto v : view_ids) out += fmt::format(" {}", v);
  out += "\nview_scores =";
  for (const auto s : view_scores) out += fmt::format(" {}", s);
  out += fmt::format("\nholes = {}\n", holes);
  return out;
}

OrthoGrid load_ortho_sidecar(const std::filesystem::path& path) {
  const auto sections = text::parse_sections(path);
  std::map<std::string, text::KeyValue> kv;
  for (const auto& e : sections.front().entries) kv[e.key] = e;
  auto get = [&](const std::string& key) -> const text::KeyValue& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(path.string() + ": missing key '" + key + "'");
    return it->second;
  };
  auto number = [&](const std::string& key) {
    try {
      return text::parse_double(get(key).value);
    } catch (const std::invalid_argument& e) {
      throw FormatError(path.string(), get(key).line, e.what());
    }
  };
  auto pair = [&](const std::string& key) {
    const auto& e = get(key);
    const auto tok = text::split_ws(e.value);
    if (tok.size() != 2) throw FormatError(path.string(), e.line, "expected two numbers");
    try {
      return Point2(text::parse_double(tok[0]), text::parse_double(tok[1]));
    } catch (const std::invalid_argument& ex) {
      throw FormatError(path.string(), e.line, ex.what());
    }
  };
  OrthoGrid g;
  g.segment_id = static_cast<std::int64_t>(number("segment_id"));
  g.origin = pair("origin");
  g.axis = pair("axis");
  g.normal = pair("normal");
  g.length = number("length");
  g.z_bottom = number("z_bottom");
  g.z_top = number("z_top");
  g.gsd = number("gsd");
  g.width = static_cast<int>(number("width"));
  g.height = static_cast<int>(number("height"));
  return g;
}

}  // namespace facademap
