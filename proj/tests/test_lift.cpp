#include <gtest/gtest.h>

#include "support.hpp"
#include "wf3d/lift.hpp"

using namespace wf3d;

namespace {

CameraModel camera(double focal, Vec2 pp, ImageSize size = {512, 512}) {
  CameraModel cam;
  cam.focal = focal;
  cam.principal_point = pp;
  cam.image_size = size;
  return cam;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kIo;
}

// Eye above the ground looking down at the origin: all three VPs finite.
Pose random_pose(Rng& rng) {
  const double az = rng.uniform(0.2, 1.4);
  const double r = rng.uniform(8, 40);
  const Vec3 eye(r * std::cos(az), -r * std::sin(az), rng.uniform(3, 25));
  return look_at(eye, Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), 0), rng.uniform(-0.15, 0.15));
}

VanishingPoints vps_at(const Vec2& a, const Vec2& b, const Vec2& c) {
  VanishingPoints v;
  v.v = {normalize_vp(a), normalize_vp(b), normalize_vp(c)};
  return v;
}

std::vector<TConstraint> constraints_of(const GroundTruth& gt) {
  std::vector<TConstraint> out;
  for (const auto& occ : gt.occlusions) out.push_back({occ.t_vertex, occ.foreground, occ.lambda});
  return out;
}

double max_t_violation(const LiftProblem& p, const std::vector<double>& z) {
  double worst = 0.0;
  for (const auto& t : p.t_constraints) {
    worst = std::max(worst, t.lambda * z[t.line.a] + (1 - t.lambda) * z[t.line.b] - z[t.w]);
  }
  return worst;
}

}  // namespace

TEST(Calibrate, ForwardThenInvert) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto cam = camera(500, Vec2(256, 256));
    const auto got = calibrate_from_vps(vp_from_pose(random_pose(rng), cam.K()), cam.image_size);
    EXPECT_NEAR(got.focal, 500.0, 500.0 * 1e-6);
    EXPECT_NEAR(got.principal_point.x(), 256.0, 256.0 * 1e-6);
    EXPECT_NEAR(got.principal_point.y(), 256.0, 256.0 * 1e-6);
  }
}

TEST(Calibrate, IsoscelesTriangle) {
  // base A, B at (256 -+ 400, 56), apex C at (256, 856): the orthocenter sits
  // d^2 / h = 200 above the base, and f^2 = d^2 - d^4 / h^2 = 120000
  const auto vps = vps_at(Vec2(-144, 56), Vec2(656, 56), Vec2(256, 856));
  const auto cam = calibrate_from_vps(vps, {512, 512});
  EXPECT_NEAR(cam.principal_point.x(), 256.0, 1e-9);
  EXPECT_NEAR(cam.principal_point.y(), 256.0, 1e-9);
  EXPECT_NEAR(cam.focal, std::sqrt(120000.0), 1e-9);
}

TEST(Calibrate, BitIdenticalReruns) {
  Rng rng(2);
  const auto cam = camera(640, Vec2(230, 270));
  const auto vps = vp_from_pose(random_pose(rng), cam.K());
  const auto a = calibrate_from_vps(vps, cam.image_size);
  const auto b = calibrate_from_vps(vps, cam.image_size);
  EXPECT_EQ(a.focal, b.focal);
  EXPECT_EQ(a.principal_point, b.principal_point);
}

TEST(Calibrate, Degeneracies) {
  EXPECT_EQ(kind_of([] { calibrate_from_vps(vps_at(Vec2(0, 0), Vec2(100, 100), Vec2(300, 300)), {512, 512}); }),
            ErrorKind::kDegenerateVPs);
  VanishingPoints two_inf = vps_at(Vec2(0, 0), Vec2(100, 0), Vec2(300, 300));
  two_inf.v[0] = Vec3(1, 0, 0);
  two_inf.v[1] = Vec3(0, 1, 0);
  EXPECT_EQ(kind_of([&] { calibrate_from_vps(two_inf, {512, 512}); }), ErrorKind::kDegenerateVPs);
  // obtuse triangle: the orthocenter lies outside and some pair gives f^2 < 0
  EXPECT_EQ(kind_of([] { calibrate_from_vps(vps_at(Vec2(0, 0), Vec2(1000, 0), Vec2(500, 50)), {512, 512}); }),
            ErrorKind::kNegativeFocalSquared);
}

TEST(Calibrate, LevelCameraFallsBackToImageCenter) {
  // no pitch: the vertical VP is at infinity
  const auto cam = camera(450, Vec2(256, 256));
  const auto pose = look_at(Vec3(-10, -6, 2), Vec3(0, 0, 2));
  const auto vps = vp_from_pose(pose, cam.K());
  EXPECT_FALSE(vp_pixel(vps.v[2]).has_value());
  const auto got = calibrate_from_vps(vps, cam.image_size);
  EXPECT_EQ(got.principal_point, Vec2(256, 256));
  EXPECT_NEAR(got.focal, 450.0, 450.0 * 1e-9);
}

TEST(AssignLines, GroundTruthAxes) {
  for (const auto& gt : test::generic_scenes(10, 700)) {
    const auto a = assign_lines(gt.wireframe, gt.vps);
    EXPECT_EQ(a, gt.edge_axis);
    EXPECT_LT(alignment_residual(test::lift_problem(gt), test::depths(gt.wireframe)), 1e-9);
  }
}

TEST(AssignLines, CollinearWithVpHasZeroArea) {
  const Vec3 vp = normalize_vp(Vec2(400, 300));
  const auto s = assignment_score(Vec2(0, 0), Vec2(40, 30), vp, 10.0);
  EXPECT_EQ(s.area, 0.0);
  EXPECT_GT(s.bound, 0.0);
}

TEST(AssignLines, TieGoesToLowerIndex) {
  Wireframe wf;
  wf.image_size = {64, 64};
  wf.vertices = {{Vec2(0, 0), JunctionType::C, 1.0}, {Vec2(10, 0), JunctionType::C, 1.0}};
  wf.edges = {{0, 1}};
  auto vps = vps_at(Vec2(1000, 1), Vec2(-1000, 1), Vec2(0, 1e4));
  EXPECT_EQ(assign_lines(wf, vps), std::vector<int>{0});
  std::swap(vps.v[0], vps.v[1]);
  EXPECT_EQ(assign_lines(wf, vps), std::vector<int>{0});
}

TEST(AssignLines, RejectsLinesFarFromEveryVp) {
  Wireframe wf;
  wf.image_size = {64, 64};
  // 45 degrees off the rays to all three VPs
  wf.vertices = {{Vec2(0, 0), JunctionType::C, 1.0}, {Vec2(10, 10), JunctionType::C, 1.0}};
  wf.edges = {{0, 1}};
  const auto vps = vps_at(Vec2(1e4, 0), Vec2(-1e4, 0), Vec2(0, 1e4));
  EXPECT_EQ(assign_lines(wf, vps), std::vector<int>{kUnassigned});
  EXPECT_EQ(assign_lines(wf, vps, 50.0), std::vector<int>{0});
}

TEST(RefineDepths, ExactInputsRecoverTruth) {
  for (double lambda_r : {0.1, 1.0, 10.0}) {
    for (const auto& gt : test::generic_scenes(4, 40)) {
      const auto p = test::lift_problem(gt, lambda_r);
      const auto sol = refine_depths(p);
      ASSERT_TRUE(sol.converged);
      const auto truth = test::depths(gt.wireframe);
      EXPECT_LT(test::silog_of(sol.depths, truth), 1e-8);
      EXPECT_LT(alignment_residual(p, sol.depths), 1e-9);
      for (double z : sol.depths) EXPECT_GE(z, 1.0 - 1e-9);
      EXPECT_LE(max_t_violation(p, sol.depths), 1e-9);
    }
  }
}

TEST(Lift, ReproducesWorldGeometryUpToScale) {
  for (const auto& gt : test::generic_scenes(6, 80)) {
    const auto r = lift(gt.wireframe, gt.vps, constraints_of(gt));
    EXPECT_TRUE(validate(r.wireframe).empty());
    EXPECT_NEAR(r.camera.focal, gt.camera.focal, 1e-6 * gt.camera.focal);
    std::vector<Vec3> truth;
    for (const auto& v : gt.wireframe.vertices) truth.push_back(back_project(gt.camera, v));
    // least-squares scale s minimizing |s p - q|
    double pq = 0.0;
    double pp = 0.0;
    for (size_t i = 0; i < truth.size(); ++i) {
      pq += r.points[i].dot(truth[i]);
      pp += r.points[i].squaredNorm();
    }
    const double s = pq / pp;
    double sq = 0.0;
    double diameter = 0.0;
    for (size_t i = 0; i < truth.size(); ++i) {
      sq += (s * r.points[i] - truth[i]).squaredNorm();
      for (size_t j = i + 1; j < truth.size(); ++j) diameter = std::max(diameter, (truth[i] - truth[j]).norm());
    }
    EXPECT_LT(std::sqrt(sq / truth.size()), 1e-6 * diameter);
  }
}

TEST(RefineDepths, NoEdgesGivesScaledInitialDepths) {
  LiftProblem p;
  p.camera = camera(400, Vec2(32, 32), {64, 64});
  p.vps = vps_at(Vec2(-300, 40), Vec2(400, 30), Vec2(30, 900));
  p.wireframe.image_size = {64, 64};
  const std::vector<double> zt = {1.0, 2.5, 4.0, 1.75};
  for (size_t i = 0; i < zt.size(); ++i) {
    p.wireframe.vertices.push_back({Vec2(5.0 + 10 * i, 20), JunctionType::C, zt[i]});
  }
  const auto sol = refine_depths(p);
  EXPECT_NEAR(sol.alpha, 1.0, 1e-9);
  for (size_t i = 0; i < zt.size(); ++i) EXPECT_NEAR(sol.depths[i], zt[i], 1e-9);
  EXPECT_LT(sol.objective, 1e-12);

  // a smaller z~ is scaled up until the closest vertex sits at z = 1
  for (auto& v : p.wireframe.vertices) *v.depth *= 0.25;
  const auto scaled = refine_depths(p);
  EXPECT_NEAR(scaled.alpha, 4.0, 1e-8);
  for (size_t i = 0; i < zt.size(); ++i) EXPECT_NEAR(scaled.depths[i], zt[i], 1e-8);
}

TEST(RefineDepths, EnforcesViolatedTConstraints) {
  int checked = 0;
  for (const auto& gt : test::generic_scenes(30, 0)) {
    if (gt.occlusions.empty()) continue;
    auto p = test::lift_problem(gt);
    for (const auto& occ : gt.occlusions) *p.wireframe.vertices[occ.t_vertex].depth = 0.5 * occ.occluder_depth;
    ASSERT_GT(max_t_violation(p, test::depths(p.wireframe)), 0.0);
    const auto sol = refine_depths(p);
    EXPECT_LE(max_t_violation(p, sol.depths), 1e-9);
    if (++checked == 5) break;
  }
  EXPECT_EQ(checked, 5);
}

TEST(RefineDepths, ObjectiveIsConvex) {
  Rng rng(77);
  for (const auto& gt : test::generic_scenes(5, 60)) {
    const auto p = test::noisy_problem(gt, rng, 0.2);
    const size_t n = p.wireframe.vertices.size();
    for (int k = 0; k < 100; ++k) {
      std::vector<double> x(n);
      std::vector<double> y(n);
      std::vector<double> mid(n);
      for (size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform(1, 30);
        y[i] = rng.uniform(1, 30);
        mid[i] = 0.5 * (x[i] + y[i]);
      }
      const double ax = rng.uniform(0.1, 5);
      const double ay = rng.uniform(0.1, 5);
      const double fm = lift_objective(p, mid, 0.5 * (ax + ay));
      EXPECT_LE(fm, 0.5 * (lift_objective(p, x, ax) + lift_objective(p, y, ay)) + 1e-9);
    }
  }
}

TEST(RefineDepths, InitialDepthScaleMovesOnlyAlpha) {
  Rng rng(5);
  for (const auto& gt : test::generic_scenes(4, 120)) {
    auto p = test::noisy_problem(gt, rng, 0.1);
    const auto base = refine_depths(p);
    const double c = 3.5;
    for (auto& v : p.wireframe.vertices) *v.depth *= c;
    const auto scaled = refine_depths(p);
    EXPECT_NEAR(scaled.alpha, base.alpha / c, 1e-6 * base.alpha / c);
    for (size_t i = 0; i < base.depths.size(); ++i) {
      EXPECT_NEAR(scaled.depths[i], base.depths[i], 1e-6 * base.depths[i]);
    }
  }
}

TEST(RefineDepths, StationaryAlongFeasibleDirections) {
  Rng rng(9);
  for (const auto& gt : test::generic_scenes(4, 300)) {
    const auto p = test::noisy_problem(gt, rng, 0.1);
    const auto sol = refine_depths(p);
    ASSERT_TRUE(sol.converged);
    const double f0 = lift_objective(p, sol.depths, sol.alpha);
    const double h = 1e-3;
    int tried = 0;
    for (int k = 0; k < 200; ++k) {
      std::vector<double> z = sol.depths;
      std::vector<double> d(z.size() + 1);
      double norm = 0.0;
      for (auto& x : d) {
        x = rng.normal();
        norm += x * x;
      }
      norm = std::sqrt(norm);
      for (size_t i = 0; i < z.size(); ++i) z[i] += h * d[i] / norm;
      const double alpha = sol.alpha + h * d.back() / norm;
      if (*std::min_element(z.begin(), z.end()) < 1.0 || max_t_violation(p, z) > 0.0) continue;
      ++tried;
      EXPECT_GE((lift_objective(p, z, alpha) - f0) / h, -1e-5);
    }
    EXPECT_GT(tried, 20);
  }
}

TEST(RefineDepths, RejectsInvalidProblems) {
  const auto gt = test::generic_scenes(1, 10).front();
  auto p = test::lift_problem(gt);
  p.assignment.pop_back();
  EXPECT_EQ(kind_of([&] { refine_depths(p); }), ErrorKind::kInvalidArgument);
  p = test::lift_problem(gt);
  *p.wireframe.vertices[0].depth = 0.0;
  EXPECT_EQ(kind_of([&] { refine_depths(p); }), ErrorKind::kNonPositiveDepth);
  p = test::lift_problem(gt);
  p.t_constraints.push_back({0, p.wireframe.edges[0], 1.0});
  EXPECT_EQ(kind_of([&] { refine_depths(p); }), ErrorKind::kInvalidArgument);
  p = test::lift_problem(gt);
  p.lambda_r = -1.0;
  EXPECT_EQ(kind_of([&] { refine_depths(p); }), ErrorKind::kInvalidArgument);
}

TEST(InferTConstraints, MatchesGeneratorOcclusions) {
  int total = 0;
  for (const auto& gt : test::generic_scenes(20, 0)) {
    const auto got = infer_t_constraints(gt.wireframe);
    const auto want = constraints_of(gt);
    ASSERT_EQ(got.size(), want.size());
    for (const auto& w : want) {
      const auto it = std::find_if(got.begin(), got.end(), [&](const TConstraint& t) { return t.w == w.w; });
      ASSERT_NE(it, got.end());
      EXPECT_EQ(it->line, w.line);
      EXPECT_NEAR(it->lambda, w.lambda, 1e-9);
    }
    total += static_cast<int>(want.size());
  }
  EXPECT_GT(total, 0);
}
