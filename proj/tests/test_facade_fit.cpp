#include "facademap/facade_fit.hpp"

#include "test_support.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace facademap;

namespace {

double sum_sq(const VerticalPlane& plane, const std::vector<Point3>& pts) {
  double s = 0;
  for (const auto& p : pts) s += std::pow(signed_plane_distance(plane, p), 2);
  return s;
}

FacadeCluster cluster_of(std::size_t n) {
  FacadeCluster c;
  c.segment_id = 1;
  c.point_indices.resize(n);
  std::iota(c.point_indices.begin(), c.point_indices.end(), std::size_t{0});
  return c;
}

/// One point per frame at the given altitudes.
std::vector<PointRecord> maxima_points(std::initializer_list<double> z) {
  std::vector<PointRecord> pts;
  std::int64_t f = 0;
  for (const double v : z) {
    pts.push_back({Point3(0, 0, v - 1.0), f});
    pts.push_back({Point3(0, 0, v), f});
    ++f;
  }
  return pts;
}

}  // namespace

TEST(PlaneFit, ExactPointsOnLine) {
  const std::vector<Point3> pts{{3, 0, 0}, {3, 1, 5}, {3, 4, 2}, {3, -2, 1}};
  const VerticalPlane p = fit_vertical_plane(pts);
  EXPECT_NEAR(std::abs(p.nx()), 1.0, 1e-12);
  EXPECT_NEAR(p.ny(), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(p.d()), 3.0, 1e-12);
  EXPECT_NEAR(sum_sq(p, pts), 0.0, 1e-20);
}

TEST(PlaneFit, NormalPointsToMajorityOfSensors) {
  const std::vector<Point3> pts{{3, 0, 0}, {3, 1, 5}, {3, 4, 2}};
  const std::vector<Point3> sensors{{0, 0, 2}, {0, 1, 2}, {9, 0, 2}};
  const VerticalPlane p = fit_vertical_plane(pts, sensors);
  EXPECT_NEAR(p.nx(), -1.0, 1e-12);
  EXPECT_NEAR(p.d(), -3.0, 1e-12);
  EXPECT_LT(signed_plane_distance(p, Point3(9, 0, 0)), 0.0);
}

TEST(PlaneFit, DegenerateClustersRejected) {
  const std::vector<Point3> same{{1, 1, 0}, {1, 1, 5}, {1, 1, 9}};
  EXPECT_THROW(fit_vertical_plane(same), GeometryError);
  const std::vector<Point3> square{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  EXPECT_THROW(fit_vertical_plane(square), GeometryError);
  const std::vector<Point3> one{{0, 0, 0}};
  EXPECT_THROW(fit_vertical_plane(one), GeometryError);
}

TEST(PlaneFit, MonteCarloResidualMatchesNoise) {
  const double sigma = 0.03;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> N(0.0, sigma);
  std::uniform_real_distribution<double> along(0, 20);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Point3> pts;
    for (int i = 0; i < 1000; ++i) pts.emplace_back(3 + N(rng), along(rng) + N(rng), along(rng));
    const VerticalPlane p = fit_vertical_plane(pts);
    const double rms = std::sqrt(sum_sq(p, pts) / pts.size());
    EXPECT_GE(rms, 0.5 * sigma);
    EXPECT_LE(rms, 1.5 * sigma);
  }
}

TEST(PlaneFit, RotationEquivariance) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 0.05);
  std::vector<Point3> pts;
  for (int i = 0; i < 300; ++i) pts.emplace_back(2 + N(rng), 0.05 * i, N(rng));
  const double a = std::numbers::pi / 6;
  const Eigen::Matrix3d R = Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  std::vector<Point3> rotated;
  for (const auto& p : pts) rotated.push_back(R * p);
  const std::vector<Point3> sensor{{-5, 7, 2}};
  std::vector<Point3> sensor_rot;
  for (const auto& s : sensor) sensor_rot.push_back(R * s);

  const VerticalPlane p0 = fit_vertical_plane(pts, sensor);
  const VerticalPlane p1 = fit_vertical_plane(rotated, sensor_rot);
  const Point2 expected = Eigen::Rotation2Dd(a) * p0.normal();
  EXPECT_NEAR(p1.nx(), expected.x(), 1e-9);
  EXPECT_NEAR(p1.ny(), expected.y(), 1e-9);
  EXPECT_NEAR(p1.d(), p0.d(), 1e-9);
}

TEST(PlaneFit, TotalLeastSquaresOptimality) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> N(0.0, 0.1);
  std::uniform_real_distribution<double> along(-10, 10);
  std::vector<Point3> pts;
  for (int i = 0; i < 500; ++i) {
    const double s = along(rng);
    pts.emplace_back(0.8 * s + 0.6 * N(rng) + 4, 0.6 * s - 0.8 * N(rng) - 1, 0);
  }
  const VerticalPlane p = fit_vertical_plane(pts);
  const double best = sum_sq(p, pts);
  Point2 centroid = Point2::Zero();
  for (const auto& q : pts) centroid += planar(q);
  centroid /= static_cast<double>(pts.size());
  for (const double da : {-0.01, 0.01}) {
    const Point2 n = Eigen::Rotation2Dd(da) * p.normal();
    EXPECT_GE(sum_sq(VerticalPlane::through(centroid, n), pts), best);
  }
  for (const double dd : {-0.001, 0.001}) EXPECT_GE(sum_sq(VerticalPlane(p.nx(), p.ny(), p.d() + dd), pts), best);
}

TEST(Endpoints, Examples) {
  const VerticalPlane x3(1, 0, 3);
  const auto [a, b] = project_endpoints(x3, Segment2(1, Point2(2.8, 0), Point2(3.2, 10)));
  EXPECT_NEAR((a - Point2(3, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((b - Point2(3, 10)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(signed_plane_distance(x3, a), 0.0, 1e-12);

  const auto [c, d] = project_endpoints(x3, Segment2(1, Point2(3, 1), Point2(4, 9)));
  EXPECT_EQ(c, Point2(3, 1));
  EXPECT_NEAR(d.x(), 3.0, 1e-12);

  const VerticalPlane tilted(0.6, 0.8, 5);
  const auto [e, f] = project_endpoints(tilted, Segment2(1, Point2(10, 0), Point2(0, 10)));
  // 0.6 * 10 - 5 = 1  ->  (10, 0) - (0.6, 0.8)
  EXPECT_NEAR(e.x(), 9.4, 1e-12);
  EXPECT_NEAR(e.y(), -0.8, 1e-12);
  EXPECT_NEAR(signed_plane_distance(tilted, f), 0.0, 1e-12);
}

TEST(Endpoints, PerpendicularSegmentIsDegenerate) {
  EXPECT_THROW(project_endpoints(VerticalPlane(1, 0, 3), Segment2(1, Point2(0, 2), Point2(6, 2))), GeometryError);
}

TEST(Bottom, Examples) {
  const PipelineConfig cfg;
  FrameTable frames{{0, {0, Point3(0, 0, 52.0)}}, {1, {1, Point3(0, 0, 52.2)}}};
  std::vector<PointRecord> pts{{Point3(1, 0, 55), 0}, {Point3(1, 0, 56), 1}};
  EXPECT_NEAR(bottom_altitude(cluster_of(2), pts, frames, cfg), 49.75, 1e-12);

  FrameTable single{{3, {3, Point3(0, 0, 10.0)}}};
  std::vector<PointRecord> one{{Point3(1, 0, 12), 3}};
  EXPECT_NEAR(bottom_altitude(cluster_of(1), one, single, cfg), 7.65, 1e-12);
}

TEST(Bottom, FramesAreDeduplicated) {
  const PipelineConfig cfg;
  FrameTable frames{{0, {0, Point3(0, 0, 10)}}, {1, {1, Point3(0, 0, 20)}}};
  // Frame 0 contributes nine points, frame 1 one: the mean stays 15.
  std::vector<PointRecord> pts(9, PointRecord{Point3(1, 0, 3), 0});
  pts.push_back({Point3(1, 0, 3), 1});
  EXPECT_NEAR(bottom_altitude(cluster_of(pts.size()), pts, frames, cfg), 15 - 2.5 + 0.15, 1e-12);
}

TEST(Bottom, InvariantUnderDeletionsKeepingFrames) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> z(0.2, 9);
  std::uniform_real_distribution<double> alt(52, 53);
  FrameTable frames;
  std::vector<PointRecord> pts;
  for (int f = 0; f < 50; ++f) {
    frames[f] = {f, Point3(0.05 * f, 0, alt(rng))};
    for (int k = 0; k < 20; ++k) pts.push_back({Point3(0.05 * f, 8, z(rng)), f});
  }
  const PipelineConfig cfg;
  const double full = bottom_altitude(cluster_of(pts.size()), pts, frames, cfg);
  FacadeCluster thinned;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i % 20 == 0 || pts[i].point.z() > 3) thinned.point_indices.push_back(i);
  }
  EXPECT_EQ(bottom_altitude(thinned, pts, frames, cfg), full);
}

TEST(Top, Examples) {
  auto pts = maxima_points({10, 10, 10});
  auto est = top_altitude(cluster_of(pts.size()), pts, 0.25);
  EXPECT_DOUBLE_EQ(est.z_top, 10);
  EXPECT_EQ(est.lod_flag, LodFlag::smooth);
  EXPECT_DOUBLE_EQ(est.profile.msd, 0.0);

  pts = maxima_points({8, 10, 12});
  est = top_altitude(cluster_of(pts.size()), pts, 0.25);
  EXPECT_NEAR(est.profile.msd, 8.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(est.z_top, 12);
  EXPECT_EQ(est.lod_flag, LodFlag::detailed);

  pts = maxima_points({10.0, 10.1, 9.9});
  est = top_altitude(cluster_of(pts.size()), pts, 0.25);
  // mean 10, squared deviations 0, 0.01, 0.01
  EXPECT_NEAR(est.profile.msd, 0.02 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(est.z_top, 10.0);
  EXPECT_EQ(est.lod_flag, LodFlag::smooth);
}

TEST(Top, EvenCountMedianIsLowerMiddle) {
  const auto pts = maxima_points({4, 1, 3, 2});
  const auto prof = top_profile(cluster_of(pts.size()), pts);
  EXPECT_DOUBLE_EQ(prof.median, 2.0);
  EXPECT_EQ(prof.frame_maxima.size(), 4u);
}

TEST(Top, EqualMaximaIgnoreTau) {
  const auto pts = maxima_points({7.5, 7.5, 7.5, 7.5});
  for (const double tau : {0.0, 0.25, 100.0}) {
    EXPECT_DOUBLE_EQ(top_altitude(cluster_of(pts.size()), pts, tau).z_top, 7.5);
  }
}

TEST(Quad, AssembleOrdersVertices) {
  const auto q = assemble_quad(4, VerticalPlane(1, 0, 3), Point2(3, 0), Point2(3, 10), 49.75, 60, TopProfile{},
                               LodFlag::smooth);
  const auto v = q.vertices();
  EXPECT_EQ(v[0], Point3(3, 0, 49.75));
  EXPECT_EQ(v[1], Point3(3, 10, 49.75));
  EXPECT_EQ(v[2], Point3(3, 10, 60));
  EXPECT_EQ(v[3], Point3(3, 0, 60));
  EXPECT_THROW(assemble_quad(4, VerticalPlane(1, 0, 3), Point2(3, 0), Point2(3, 10), 60, 60, TopProfile{},
                             LodFlag::smooth),
               GeometryError);
}

TEST(Quad, FitFacadeOnSyntheticWall) {
  // Wall on y = 8 from x = 0 to 12, bottom 0.15, top 9; sensor 2.5 m over y = 0.
  std::mt19937_64 rng(21);
  std::normal_distribution<double> N(0, 0.01);
  FrameTable frames;
  std::vector<PointRecord> pts;
  for (int f = 0; f < 240; ++f) {
    const double x = 0.05 * f + 0.025;
    frames[f] = {f, Point3(x, 0, 2.5)};
    for (int k = 0; k <= 177; ++k) pts.push_back({Point3(x + N(rng), 8 + N(rng), 0.15 + 0.05 * k), f});
  }
  const Segment2 seg(1, Point2(0, 8.2), Point2(12, 7.9));
  const FacadeQuad q = fit_facade(cluster_of(pts.size()), seg, pts, frames, PipelineConfig{});
  EXPECT_NEAR(q.e1.x(), 0, 0.05);
  EXPECT_NEAR(q.e1.y(), 8, 0.05);
  EXPECT_NEAR(q.e2.x(), 12, 0.05);
  EXPECT_NEAR(q.e2.y(), 8, 0.05);
  EXPECT_NEAR(q.z_bottom, 0.15, 1e-12);
  EXPECT_NEAR(q.z_top, 0.15 + 0.05 * 177, 0.05);
  EXPECT_LT(q.plane.ny(), 0.0);  // street side is y < 8
  EXPECT_NEAR(signed_plane_distance(q.plane, q.e1), 0.0, 1e-6);
  EXPECT_NEAR(signed_plane_distance(q.plane, q.e2), 0.0, 1e-6);
}

TEST(Quad, TextRoundTrip) {
  const auto dir = facademap::testing::scratch_dir();
  const VerticalPlane plane = VerticalPlane::through(Point2(1, 2), Point2(0.3, -1));
  const auto [e1, e2] = project_endpoints(plane, Segment2(4, Point2(1.1, 2.05), Point2(11, 5.2)));
  const auto q = assemble_quad(4, plane, e1, e2, 0.1, 5.0 / 3.0, TopProfile{{}, 5, 0.125}, LodFlag::detailed);
  const std::vector<FacadeQuad> quads{q};
  facademap::testing::write_text(dir / "q.txt", quads_to_text(quads));
  const auto back = load_quads(dir / "q.txt");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].segment_id, 4);
  EXPECT_EQ(back[0].e1, q.e1);
  EXPECT_NEAR((back[0].e2 - q.e2).norm(), 0.0, 1e-12);
  EXPECT_EQ(back[0].z_top, q.z_top);
  EXPECT_EQ(back[0].msd, 0.125);
  EXPECT_EQ(back[0].lod_flag, LodFlag::detailed);
  EXPECT_EQ(quads_to_text(quads).substr(0, 2), "4 ");
}
