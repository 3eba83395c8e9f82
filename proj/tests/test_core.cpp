#include <gtest/gtest.h>

#include "wf3d/core.hpp"
#include "wf3d/io.hpp"
#include "wf3d/rng.hpp"

using namespace wf3d;

namespace {

Wireframe square() {
  Wireframe wf;
  wf.image_size = {64, 64};
  for (auto [x, y] : {std::pair{10.0, 10.0}, {50.0, 10.0}, {50.0, 50.0}, {10.0, 50.0}}) {
    wf.vertices.push_back({Vec2(x, y), JunctionType::C, 2.0});
  }
  wf.edges = {{0, 1}, {1, 2}, {2, 3}, {0, 3}};
  return wf;
}

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule == rule; });
}

}  // namespace

TEST(Validate, SingleVertexNoEdges) {
  Wireframe wf;
  wf.image_size = {8, 8};
  wf.vertices.push_back({Vec2(1, 1), JunctionType::C, {}});
  EXPECT_TRUE(validate(wf).empty());
}

TEST(Validate, TDegreeTwo) {
  auto wf = square();
  wf.vertices[1].type = JunctionType::T;
  const auto v = validate(wf);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "T-degree");
  EXPECT_EQ(v[0].indices, std::vector<int>{1});
}

TEST(Validate, SelfLoop) {
  auto wf = square();
  wf.edges.push_back({3, 3});
  const auto v = validate(wf);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "self-loop");
}

TEST(Validate, DuplicateAndBadIndex) {
  auto wf = square();
  wf.edges.push_back({1, 0});
  wf.edges.push_back({0, 9});
  const auto v = validate(wf);
  EXPECT_TRUE(has_rule(v, "duplicate-edge"));
  EXPECT_TRUE(has_rule(v, "edge-index"));
}

TEST(NormalizeVp, Examples) {
  EXPECT_EQ(normalize_vp(Vec2(0, 0)), Vec3(0, 0, 1));
  EXPECT_EQ(normalize_vp(Vec2(1, 0)), Vec3(0.5, 0, 0.5));
  const Vec3 v = normalize_vp(Vec2(3, 4));
  EXPECT_DOUBLE_EQ(v.x(), 3.0 / 26.0);
  EXPECT_DOUBLE_EQ(v.y(), 4.0 / 26.0);
  EXPECT_DOUBLE_EQ(v.z(), 1.0 / 26.0);
}

TEST(NormalizeVp, IdentityOnRandomInputs) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p(rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4));
    const Vec3 v = normalize_vp(p);
    const double s = p.squaredNorm() + 1.0;
    EXPECT_NEAR(v.x() * s, p.x(), 1e-12 * std::max(1.0, std::abs(p.x())));
    EXPECT_NEAR(v.y() * s, p.y(), 1e-12 * std::max(1.0, std::abs(p.y())));
    EXPECT_NEAR(v.z() * s, 1.0, 1e-12);
    EXPECT_GT(v.z(), 0.0);
    EXPECT_LE(v.norm(), 1.0);
    // homogeneous form of the same direction, any positive scale
    const Vec3 h = Vec3(p.x(), p.y(), 1.0) * rng.uniform(0.1, 10.0);
    EXPECT_LT((normalize_vp_homogeneous(h) - v).norm(), 1e-12);
    const auto back = vp_pixel(v);
    ASSERT_TRUE(back.has_value());
    EXPECT_LT((*back - p).norm(), 1e-8 * std::max(1.0, p.norm()));
  }
}

TEST(VpPixel, InfinityIsNullopt) {
  EXPECT_FALSE(vp_pixel(Vec3(0.5, 0.5, 0.0)).has_value());
  EXPECT_FALSE(vp_pixel(Vec3(1.0, 0.0, 1e-9)).has_value());
  EXPECT_FALSE(vp_pixel(Vec3(0.1, 0.0, -0.1)).has_value());
}

TEST(CalibratedRay, Examples) {
  CameraModel cam;
  cam.focal = 500;
  cam.principal_point = Vec2(256, 200);
  EXPECT_EQ(calibrated_ray(cam, cam.principal_point), Vec3(0, 0, 1));

  CameraModel c2;
  c2.focal = 100;
  EXPECT_EQ(calibrated_ray(c2, Vec2(100, 0)), Vec3(1, 0, 1));

  CameraModel c3;
  c3.focal = 256;
  c3.principal_point = Vec2(256, 256);
  EXPECT_EQ(calibrated_ray(c3, Vec2(0, 512)), Vec3(-1, 1, 1));
}

TEST(CalibratedRay, KInverseConsistent) {
  CameraModel cam;
  cam.focal = 420;
  cam.principal_point = Vec2(250, 260);
  EXPECT_LT((cam.K() * cam.K_inv() - Mat3::Identity()).norm(), 1e-15);
  const Vec2 p(17.5, 400.25);
  EXPECT_LT((cam.K_inv() * Vec3(p.x(), p.y(), 1.0) - calibrated_ray(cam, p)).norm(), 1e-15);
}

TEST(CalibratedRay, ParallelToProjectedPoint) {
  Rng rng(5);
  CameraModel cam;
  cam.focal = 480;
  cam.principal_point = Vec2(256, 256);
  for (int i = 0; i < 500; ++i) {
    const Vec3 x(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(0.5, 50));
    const Vec3 r = calibrated_ray(cam, project(cam, x));
    EXPECT_LT(r.cross(x).norm(), 1e-9 * x.norm());
    EXPECT_EQ(r.z(), 1.0);
  }
}

TEST(WireframeJson, RoundTripAndCanonicalOrder) {
  WireframeDocument doc;
  doc.wireframe = square();
  doc.wireframe.edges = {{3, 2}, {1, 0}, {2, 1}, {0, 3}};
  doc.wireframe.vertices[2].depth.reset();
  doc.scores = {0.9, 0.8, 0.7, 0.6};
  doc.t_constraints = {{2, Edge{3, 0}, 0.25}};
  CameraModel cam;
  cam.focal = 300;
  cam.principal_point = Vec2(32, 32);
  cam.image_size = {64, 64};
  doc.camera = cam;
  VanishingPoints vps;
  vps.v = {normalize_vp(Vec2(-400, 30)), normalize_vp(Vec2(500, 20)), normalize_vp(Vec2(30, 900))};
  doc.vps = vps;

  const json j = wireframe_to_json(doc);
  EXPECT_EQ(j["edges"], json::parse("[[0,1],[0,3],[1,2],[2,3]]"));
  EXPECT_TRUE(j["vertices"][2]["depth"].is_null());
  EXPECT_EQ(j["t_constraints"][0], json::parse("[2,0,3,0.75]"));

  const auto back = wireframe_from_json(json::parse(j.dump()));
  EXPECT_EQ(wireframe_to_json(back).dump(), j.dump());
  EXPECT_EQ(back.scores, doc.scores);
  EXPECT_FALSE(back.wireframe.vertices[2].depth.has_value());
  EXPECT_EQ(back.camera->focal, 300.0);
}

TEST(WireframeJson, RejectsBadInput) {
  const auto parse = [](const char* s) { return wireframe_from_json(json::parse(s)); };
  EXPECT_THROW(parse(R"({"image_size":[8,8],"vertices":[{"xy":[1,1],"type":"X"}],"edges":[]})"), Error);
  EXPECT_THROW(parse(R"({"vertices":[],"edges":[]})"), Error);
  EXPECT_THROW(
      parse(R"({"image_size":[8,8],"vertices":[{"xy":[1,1],"type":"C"}],"edges":[],"t_constraints":[[0,0,5,0.5]]})"),
      Error);
}

TEST(Rng, Deterministic) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(mix_seed(0, 0), mix_seed(0, 1));
  EXPECT_NE(mix_seed(0, 1), mix_seed(1, 1));
}
