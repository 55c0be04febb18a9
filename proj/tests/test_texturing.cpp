#include "facademap/dataset.hpp"
#include "facademap/synthscene.hpp"
#include "facademap/texturing.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace facademap;

namespace {

// Camera at the origin looking along +y, 640 x 480, f = 400.
PinholeCamera forward_camera() {
  PinholeCamera cam;
  cam.fx = cam.fy = 400;
  cam.cx = 319.5;
  cam.cy = 239.5;
  cam.width = 640;
  cam.height = 480;
  cam.pose = RigidPose::look_along(Point3(0, 0, 0), Point3(0, 1, 0));
  return cam;
}

// Wall at y = depth spanning [x0, x1] x [z0, z1], facing the origin.
FacadeQuad wall(double x0, double x1, double z0, double z1, double depth) {
  FacadeQuad q;
  q.segment_id = 1;
  q.e1 = Point2(x0, depth);
  q.e2 = Point2(x1, depth);
  q.z_bottom = z0;
  q.z_top = z1;
  q.plane = VerticalPlane::through(q.e1, Point2(0, -1));
  return q;
}

OrthoGrid tiny_grid(int w, int h) {
  OrthoGrid g;
  g.width = w;
  g.height = h;
  g.length = w * g.gsd;
  g.z_top = h * g.gsd;
  return g;
}

OrthoLayer layer(const OrthoGrid& g, std::int64_t view) {
  OrthoLayer l;
  l.grid = g;
  l.view = view;
  l.color = RgbImage(g.width, g.height);
  l.valid.assign(g.pixel_count(), 0);
  l.score.assign(g.pixel_count(), 0.0);
  return l;
}

OrthoFrame frame_from(const RgbImage& img) {
  OrthoFrame f;
  f.grid = tiny_grid(img.width, img.height);
  f.color = img;
  f.valid.assign(f.grid.pixel_count(), 1);
  f.source.assign(f.grid.pixel_count(), 0);
  return f;
}

std::array<double, 3> channel_means(const OrthoFrame& f) {
  std::array<double, 3> sum{};
  std::size_t n = 0;
  for (std::size_t i = 0; i < f.valid.size(); ++i) {
    if (!f.valid[i]) continue;
    for (int c = 0; c < 3; ++c) sum[c] += f.color.data[3 * i + c];
    ++n;
  }
  for (auto& s : sum) s /= static_cast<double>(n);
  return sum;
}

}  // namespace

TEST(Texturing, ClippedPolygonArea) {
  const std::vector<Point2> inside{{10, 10}, {30, 10}, {30, 20}, {10, 20}};
  EXPECT_DOUBLE_EQ(clipped_polygon_area(inside, 100, 100), 200.0);
  const std::vector<Point2> straddle{{-10, -10}, {50, -10}, {50, 50}, {-10, 50}};
  EXPECT_DOUBLE_EQ(clipped_polygon_area(straddle, 40, 30), 1200.0);
  const std::vector<Point2> triangle{{-20, 0}, {20, 0}, {0, 20}};
  // Right half of the triangle: legs of 20.
  EXPECT_NEAR(clipped_polygon_area(triangle, 100, 100), 200.0, 1e-9);
  const std::vector<Point2> outside{{200, 200}, {300, 200}, {300, 300}};
  EXPECT_DOUBLE_EQ(clipped_polygon_area(outside, 100, 100), 0.0);
  // Orientation does not matter.
  const std::vector<Point2> cw{{10, 10}, {10, 20}, {30, 20}, {30, 10}};
  EXPECT_DOUBLE_EQ(clipped_polygon_area(cw, 100, 100), 200.0);
}

TEST(Texturing, ClippedAreaMatchesPixelCount) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-30, 130);
  for (int trial = 0; trial < 10; ++trial) {
    // Random convex quad: a rotated rectangle.
    const Point2 c(U(rng), U(rng));
    const double a = U(rng) * 0.05;
    const Point2 ex(std::cos(a), std::sin(a));
    const Point2 ey(-ex.y(), ex.x());
    const double hx = 10 + std::abs(U(rng)) * 0.3;
    const double hy = 10 + std::abs(U(rng)) * 0.3;
    const std::vector<Point2> poly{c - hx * ex - hy * ey, c + hx * ex - hy * ey, c + hx * ex + hy * ey,
                                   c - hx * ex + hy * ey};
    // Supersampled oracle.
    std::size_t hits = 0;
    const int n = 400;
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const Point2 p((x + 0.5) * 100.0 / n, (y + 0.5) * 100.0 / n);
        const Point2 r = p - c;
        hits += std::abs(r.dot(ex)) <= hx && std::abs(r.dot(ey)) <= hy;
      }
    }
    const double oracle = hits * (100.0 / n) * (100.0 / n);
    EXPECT_NEAR(clipped_polygon_area(poly, 100, 100), oracle, 0.02 * 4 * hx * hy + 5.0) << trial;
  }
}

TEST(Texturing, SelectViewsAreaThreshold) {
  const std::vector<PinholeCamera> cams{forward_camera()};
  // At depth 10 a 2.4 m square projects to 96 x 96 px: 3% of the frame.
  const auto small = wall(-1.2, 1.2, -1.2, 1.2, 10);
  EXPECT_TRUE(select_views(cams, small, 0.05).empty());
  const auto kept = select_views(cams, small, 0.02);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_NEAR(kept[0].score, 1.0 / 10.0, 1e-12);
}

TEST(Texturing, SelectViewsGeometry) {
  std::vector<PinholeCamera> cams;
  for (const double x : {0.0, 3.0, -6.0}) {
    auto cam = forward_camera();
    cam.pose = RigidPose::look_along(Point3(x, 0, 0), Point3(0, 1, 0));
    cams.push_back(cam);
  }
  auto behind = forward_camera();
  behind.pose = RigidPose::look_along(Point3(0, 20, 0), Point3(0, 1, 0));
  cams.push_back(behind);
  auto back_side = forward_camera();
  back_side.pose = RigidPose::look_along(Point3(0, 15, 0), Point3(0, -1, 0));
  cams.push_back(back_side);

  const auto q = wall(-6, 6, -4, 4, 5);
  const auto sel = select_views(cams, q, 0.05);
  ASSERT_GE(sel.size(), 2u);
  EXPECT_EQ(sel[0].camera_index, 0u);
  for (const auto& s : sel) {
    EXPECT_NE(s.camera_index, 3u) << "quad behind the camera";
    EXPECT_NE(s.camera_index, 4u) << "camera on the wrong side";
    EXPECT_LE(s.score, sel[0].score);
  }
}

TEST(Texturing, OrthoGridLayout) {
  const auto q = wall(0, 10, 1, 4, 8);
  const auto g = make_ortho_grid(q, 0.05);
  EXPECT_EQ(g.width, 200);
  EXPECT_EQ(g.height, 60);
  EXPECT_NEAR(g.z_at(59), 1.025, 1e-12);
  EXPECT_NEAR(g.z_at(0), 3.975, 1e-12);
  EXPECT_NEAR(g.world_at(0, 0).x(), 0.025, 1e-12);
  EXPECT_THROW(make_ortho_grid(q, 0.0), std::invalid_argument);
}

TEST(Texturing, RectifyMatchesRenderedFacade) {
  synth::SceneSpec scene;
  scene.trajectory.start = Point2(-2, 0);
  scene.trajectory.frame_count = 10;
  synth::FacadeSpec f;
  f.id = 1;
  f.p1 = Point2(0, 8);
  f.p2 = Point2(10, 8);
  f.z_bottom = 0;
  f.z_top = 6;
  f.texture = synth::TextureKind::checkerboard;
  f.cell = 1.0;
  scene.facades.push_back(f);
  synth::CameraSpec cs;
  cs.position = Point3(5, 0.5, 3);
  cs.yaw_deg = 90;
  cs.width = 640;
  cs.height = 480;
  scene.cameras.push_back(cs);
  scene.validate();

  const auto cam = cs.camera();
  const auto image = synth::render_view(scene, cs);
  const auto quad = synth::true_quads(scene).at(0);
  const auto grid = make_ortho_grid(quad, 0.05);
  const BinaryMask clear(cam.width, cam.height);
  const SoftMask soft(cam.width, cam.height);
  const auto l = rectify_view(cam, image, clear, soft, grid, 0, 0.5);
  const auto truth = synth::truth_texture(scene, grid);

  double err = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < grid.pixel_count(); ++i) {
    if (!l.valid[i]) continue;
    EXPECT_DOUBLE_EQ(l.score[i], 0.5);
    for (int c = 0; c < 3; ++c) err += std::abs(l.color.data[3 * i + c] - truth.data[3 * i + c]);
    n += 3;
  }
  EXPECT_EQ(n, 3 * grid.pixel_count()) << "facade fully in view";
  EXPECT_LE(err / n, 10.0);

  // Mask the left half of the frame: every ortho pixel landing there is dropped.
  BinaryMask half(cam.width, cam.height);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width / 2; ++x) half.set(x, y);
  }
  const auto masked = rectify_view(cam, image, half, soft, grid, 0, 0.5);
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      const auto px = project_to_image(cam, grid.world_at(col, row));
      const int mx = static_cast<int>(std::floor(px->u + 0.5));
      const bool expect_valid = mx >= cam.width / 2;
      EXPECT_EQ(masked.valid[static_cast<std::size_t>(row) * grid.width + col] != 0, expect_valid);
    }
  }
}

TEST(Texturing, RectifyOutOfFrameIsInvalid) {
  const auto cam = forward_camera();
  const RgbImage img(cam.width, cam.height, {10, 20, 30});
  // Wide wall: its ends fall outside the 640 px frame.
  const auto grid = make_ortho_grid(wall(-20, 20, -1, 1, 5), 0.1);
  const auto l = rectify_view(cam, img, BinaryMask(cam.width, cam.height), SoftMask(cam.width, cam.height), grid, 0, 1);
  EXPECT_FALSE(l.valid[0]);
  EXPECT_TRUE(l.valid[grid.width / 2]);
  EXPECT_EQ(l.color.at(grid.width / 2, 0), (Rgb{10, 20, 30}));
  EXPECT_THROW(rectify_view(cam, RgbImage(10, 10), BinaryMask(cam.width, cam.height), SoftMask(cam.width, cam.height),
                            grid, 0, 1),
               std::invalid_argument);
}

TEST(Texturing, SoftMaskDemotesScore) {
  const auto cam = forward_camera();
  const RgbImage img(cam.width, cam.height, {100, 100, 100});
  const SoftMask soft(cam.width, cam.height, 0.25f);
  const auto grid = make_ortho_grid(wall(-1, 1, -1, 1, 5), 0.1);
  const auto l = rectify_view(cam, img, BinaryMask(cam.width, cam.height), soft, grid, 0, 2.0);
  for (std::size_t i = 0; i < grid.pixel_count(); ++i) {
    ASSERT_TRUE(l.valid[i]);
    EXPECT_DOUBLE_EQ(l.score[i], 1.5);
  }
}

TEST(Texturing, MosaicComplementaryHalves) {
  const auto g = tiny_grid(8, 4);
  auto a = layer(g, 0);
  auto b = layer(g, 1);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 8; ++x) {
      const std::size_t i = y * 8 + x;
      auto& l = x < 4 ? a : b;
      l.valid[i] = 1;
      l.score[i] = 1.0;
      l.color.set(x, y, x < 4 ? Rgb{255, 0, 0} : Rgb{0, 0, 255});
    }
  }
  const std::vector<OrthoLayer> layers{a, b};
  const auto f = mosaic(g, layers);
  EXPECT_EQ(f.hole_count(), 0u);
  EXPECT_EQ(f.source[0], 0);
  EXPECT_EQ(f.source[7], 1);
  EXPECT_TRUE(export_hole_map(f).empty_mask());
}

TEST(Texturing, MosaicArgmaxMatchesOracle) {
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<int> coin(0, 2);
  std::uniform_int_distribution<int> score(0, 3);  // coarse scores force ties
  std::uniform_int_distribution<int> byte(0, 255);
  const auto g = tiny_grid(20, 15);
  std::vector<OrthoLayer> layers;
  for (const std::int64_t view : {2, 0, 5}) {
    auto l = layer(g, view);
    for (std::size_t i = 0; i < g.pixel_count(); ++i) {
      l.valid[i] = coin(rng) != 0;
      l.score[i] = score(rng);
      for (int c = 0; c < 3; ++c) l.color.data[3 * i + c] = static_cast<std::uint8_t>(byte(rng));
    }
    layers.push_back(l);
  }
  const auto f = mosaic(g, layers);
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    const OrthoLayer* best = nullptr;
    for (const auto& l : layers) {
      if (!l.valid[i]) continue;
      if (!best || l.score[i] > best->score[i] || (l.score[i] == best->score[i] && l.view < best->view)) best = &l;
    }
    if (!best) {
      EXPECT_FALSE(f.valid[i]);
      EXPECT_EQ(f.source[i], -1);
      continue;
    }
    EXPECT_TRUE(f.valid[i]);
    EXPECT_EQ(f.source[i], best->view);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(f.color.data[3 * i + c], best->color.data[3 * i + c]);
  }

  // Adding a layer never removes coverage.
  const std::vector<OrthoLayer> fewer(layers.begin(), layers.begin() + 2);
  const auto f2 = mosaic(g, fewer);
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    if (f2.valid[i]) EXPECT_TRUE(f.valid[i]);
  }
}

TEST(Texturing, MosaicEdgeCases) {
  const auto g = tiny_grid(5, 5);
  const auto empty = mosaic(g, std::vector<OrthoLayer>{});
  EXPECT_EQ(empty.hole_count(), 25u);
  EXPECT_EQ(export_hole_map(empty).count(), 25u);

  auto l = layer(tiny_grid(6, 5), 0);
  EXPECT_THROW(mosaic(g, std::vector<OrthoLayer>{l}), std::invalid_argument);
}

TEST(Texturing, HoleMapMarksRegionMaskedEverywhere) {
  const auto g = tiny_grid(10, 10);
  std::vector<OrthoLayer> layers{layer(g, 0), layer(g, 1)};
  for (auto& l : layers) {
    for (int y = 0; y < 10; ++y) {
      for (int x = 0; x < 10; ++x) {
        const bool masked = x >= 3 && x < 6 && y >= 2 && y < 5;
        l.valid[y * 10 + x] = !masked && (l.view == 0 ? x < 6 : x >= 3);
        l.score[y * 10 + x] = 1;
      }
    }
  }
  const auto f = mosaic(g, layers);
  const auto holes = export_hole_map(f);
  EXPECT_EQ(holes.count(), 9u);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      const bool masked = x >= 3 && x < 6 && y >= 2 && y < 5;
      EXPECT_EQ(holes.get(x, y), masked);
      EXPECT_NE(holes.get(x, y), f.valid[y * 10 + x] != 0);
    }
  }
}

TEST(Texturing, GrayWorldBalance) {
  RgbImage img(4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const int d = (x + y) % 2 == 0 ? -10 : 10;
      img.set(x, y, {static_cast<std::uint8_t>(100 + d), static_cast<std::uint8_t>(120 + d),
                     static_cast<std::uint8_t>(140 + d)});
    }
  }
  const auto f = frame_from(img);
  const auto m0 = channel_means(f);
  EXPECT_DOUBLE_EQ(m0[0], 100);
  EXPECT_DOUBLE_EQ(m0[2], 140);
  const auto b = gray_world_balance(f);
  for (const double m : channel_means(b)) EXPECT_NEAR(m, 120.0, 1.0);

  const auto twice = gray_world_balance(b);
  for (std::size_t i = 0; i < b.color.data.size(); ++i) EXPECT_LE(std::abs(twice.color.data[i] - b.color.data[i]), 1);

  const auto gray = frame_from(RgbImage(3, 3, {77, 77, 77}));
  EXPECT_EQ(gray_world_balance(gray).color, gray.color);
}

TEST(Texturing, GrayWorldLeavesHolesAndArgmax) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> byte(1, 200);
  RgbImage img(16, 16);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(byte(rng));
  auto f = frame_from(img);
  for (std::size_t i = 0; i < f.valid.size(); i += 5) f.valid[i] = 0;
  const auto b = gray_world_balance(f);
  EXPECT_EQ(b.valid, f.valid);
  for (std::size_t i = 0; i < f.valid.size(); ++i) {
    if (f.valid[i]) continue;
    for (int c = 0; c < 3; ++c) EXPECT_EQ(b.color.data[3 * i + c], f.color.data[3 * i + c]);
  }
  for (int c = 0; c < 3; ++c) {
    std::size_t arg = 0;
    for (std::size_t i = 0; i < f.valid.size(); ++i) {
      if (f.valid[i] && (!f.valid[arg] || f.color.data[3 * i + c] > f.color.data[3 * arg + c])) arg = i;
    }
    for (std::size_t i = 0; i < f.valid.size(); ++i) {
      if (f.valid[i]) EXPECT_LE(b.color.data[3 * i + c], b.color.data[3 * arg + c]);
    }
  }

  OrthoFrame holes = f;
  std::fill(holes.valid.begin(), holes.valid.end(), 0);
  EXPECT_EQ(gray_world_balance(holes).color, holes.color);
}

TEST(Texturing, SidecarRoundTrip) {
  auto q = wall(2, 12.5, 0.3, 7.7, 4);
  q.segment_id = 42;
  const auto g = make_ortho_grid(q, 0.05);
  const std::vector<std::int64_t> views{0, 3};
  const std::vector<double> scores{0.125, 0.0625};
  const auto dir = facademap::testing::scratch_dir();
  facademap::testing::write_text(dir / "sidecar.txt", ortho_sidecar(g, views, scores, 17));
  EXPECT_EQ(load_ortho_sidecar(dir / "sidecar.txt"), g);
}

TEST(Texturing, SampleBilinear) {
  const auto img = read_image(FACADEMAP_TEST_DATA "/gradient_2x2.ppm");
  const auto mid = sample_bilinear(img, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(mid[0], 127.5);
  EXPECT_DOUBLE_EQ(mid[1], 127.5);
  EXPECT_DOUBLE_EQ(mid[2], 64);
  const auto clamped = sample_bilinear(img, 5, -3);
  EXPECT_DOUBLE_EQ(clamped[0], 255);
  EXPECT_DOUBLE_EQ(clamped[1], 0);
}
