#include <gtest/gtest.h>

#include <set>

#include "support.hpp"
#include "wf3d/rng.hpp"
#include "wf3d/vectorize.hpp"

using namespace wf3d;

namespace {

HeatmapBundle blank(int size = 64) {
  Wireframe wf;
  wf.image_size = {size, size};
  return encode(wf, {});
}

std::set<Edge> edge_set(const std::vector<ScoredEdge>& lines) {
  std::set<Edge> out;
  for (const auto& l : lines) out.insert(l.edge);
  return out;
}

// GT bundle with Gaussian noise on the edge map and blurred junction peaks.
HeatmapBundle noisy(const GroundTruth& gt, std::uint64_t seed) {
  auto b = encode(gt.wireframe, gt.vps);
  Rng rng(seed);
  for (auto& v : b.emap.data()) v = static_cast<float>(std::clamp(v + 0.15 * rng.normal(), 0.0, 1.0));
  for (auto& g : b.jmap) {
    const Grid src = g;
    for (int r = 0; r < g.rows(); ++r) {
      for (int c = 0; c < g.cols(); ++c) {
        float m = src(r, c);
        if (r > 0) m = std::max(m, 0.6f * src(r - 1, c));
        if (c > 0) m = std::max(m, 0.6f * src(r, c - 1));
        g(r, c) = m;
      }
    }
  }
  return b;
}

std::set<std::pair<int, int>> cell_set(const std::vector<Cell>& cells) {
  std::set<std::pair<int, int>> out;
  for (const auto& c : cells) out.insert({c.col, c.row});
  return out;
}

// Edges keyed by endpoint positions, since vertex indices shift with the T set.
std::set<std::array<double, 4>> line_set(const Wireframe& wf) {
  std::set<std::array<double, 4>> out;
  for (const auto& e : wf.edges) {
    std::array<double, 4> a = {wf.vertices[e.a].position.x(), wf.vertices[e.a].position.y(),
                               wf.vertices[e.b].position.x(), wf.vertices[e.b].position.y()};
    if (std::tie(a[2], a[3]) < std::tie(a[0], a[1])) a = {a[2], a[3], a[0], a[1]};
    out.insert(a);
  }
  return out;
}

}  // namespace

TEST(PruneLines, CrossingKeepsHigherConfidence) {
  const std::vector<Vec2> pos = {{0, 0}, {10, 10}, {0, 10}, {10, 0}};
  const auto kept = prune_lines({{Edge{0, 1}, 0.8}, {Edge{2, 3}, 0.9}}, pos, 5.0);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].edge, (Edge{2, 3}));
}

TEST(PruneLines, RightAngleAtSharedEndpointKeepsBoth) {
  const std::vector<Vec2> pos = {{0, 0}, {10, 0}, {0, 10}};
  EXPECT_EQ(prune_lines({{Edge{0, 1}, 0.9}, {Edge{0, 2}, 0.8}}, pos, 5.0).size(), 2u);
}

TEST(PruneLines, GreedyChain) {
  // a: y = 0 (0.9), b: x = 5 crossing both (0.8), c: y = 3 crossing only b (0.7)
  const std::vector<Vec2> pos = {{0, 0}, {10, 0}, {5, -5}, {5, 5}, {0, 3}, {10, 3}};
  const auto kept = prune_lines({{Edge{4, 5}, 0.7}, {Edge{2, 3}, 0.8}, {Edge{0, 1}, 0.9}}, pos, 5.0);
  EXPECT_EQ(edge_set(kept), (std::set<Edge>{{0, 1}, {4, 5}}));
}

TEST(PruneLines, NarrowAngleAtSharedEndpoint) {
  const std::vector<Vec2> pos = {{0, 0}, {10, 0}, {10, 0.5}, {10, 1.2}};
  // atan(0.05) = 2.86 deg is below the 5 degree minimum, atan(0.12) = 6.84 deg is not
  EXPECT_EQ(edge_set(prune_lines({{Edge{0, 1}, 0.9}, {Edge{0, 2}, 0.8}}, pos, 5.0)),
            (std::set<Edge>{{0, 1}}));
  EXPECT_EQ(prune_lines({{Edge{0, 1}, 0.9}, {Edge{0, 3}, 0.8}}, pos, 5.0).size(), 2u);
}

TEST(PruneLines, TiesBrokenLexicographically) {
  const std::vector<Vec2> pos = {{0, 0}, {10, 10}, {0, 10}, {10, 0}};
  EXPECT_EQ(prune_lines({{Edge{2, 3}, 0.5}, {Edge{0, 1}, 0.5}}, pos, 5.0).at(0).edge, (Edge{0, 1}));
}

TEST(RasterLine, HorizontalCellCount) {
  const auto cells = raster_line(Vec2(0.5, 2.5), Vec2(7.5, 2.5));
  ASSERT_EQ(cells.size(), 8u);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(cells[i], (Cell{i, 2}));
}

TEST(RasterLine, ConnectedSymmetricAndEndpointCells) {
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const Vec2 a(rng.uniform(0, 128), rng.uniform(0, 128));
    const Vec2 b(rng.uniform(0, 128), rng.uniform(0, 128));
    const auto cells = raster_line(a, b);
    ASSERT_FALSE(cells.empty());
    EXPECT_EQ(cell_set(cells), cell_set(raster_line(b, a)));
    for (size_t k = 1; k < cells.size(); ++k) {
      ASSERT_LE(std::abs(cells[k].col - cells[k - 1].col), 1);
      ASSERT_LE(std::abs(cells[k].row - cells[k - 1].row), 1);
    }
    // one cell per step of the major axis
    const double dx = std::abs(std::floor(a.x()) - std::floor(b.x()));
    const double dy = std::abs(std::floor(a.y()) - std::floor(b.y()));
    const bool x_major = std::abs(b.x() - a.x()) >= std::abs(b.y() - a.y());
    EXPECT_EQ(cells.size(), static_cast<size_t>((x_major ? dx : dy) + 1));
  }
}

TEST(LineConfidence, Examples) {
  auto b = blank();
  const Vec2 u(2, 10);
  const Vec2 w(30, 10);
  EXPECT_EQ(line_confidence(u, w, b.emap, 4), 0.0);
  for (int c = 0; c < 8; ++c) b.emap(2, c) = 1.0f;
  EXPECT_EQ(line_confidence(u, w, b.emap, 4), 1.0);
  for (int c = 4; c < 8; ++c) b.emap(2, c) = 0.0f;
  EXPECT_EQ(line_confidence(u, w, b.emap, 4), 0.5);
  EXPECT_EQ(line_confidence(w, u, b.emap, 4), 0.5);
  try {
    line_confidence(u, u, b.emap, 4);
    FAIL() << "expected DegenerateLine";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateLine);
  }
}

TEST(LineConfidence, SymmetricAndBounded) {
  Rng rng(4);
  auto b = blank();
  for (auto& v : b.emap.data()) v = static_cast<float>(rng.uniform());
  for (int i = 0; i < 1000; ++i) {
    const Vec2 u(rng.uniform(0, 64), rng.uniform(0, 64));
    const Vec2 w(rng.uniform(0, 64), rng.uniform(0, 64));
    const double c = line_confidence(u, w, b.emap, 4);
    EXPECT_EQ(c, line_confidence(w, u, b.emap, 4));
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
  }
}

TEST(ExtractJunctions, ThresholdSemantics) {
  auto b = blank();
  EXPECT_TRUE(extract_junctions(b, {}).c.empty());
  EXPECT_TRUE(extract_junctions(b, {}).t.empty());
  b.jmap[0](3, 5) = 0.25f;
  b.offset_x[0](3, 5) = 0.5f;
  b.offset_y[0](3, 5) = 0.25f;
  b.jdepth[0](3, 5) = 4.0f;
  VectorizeParams p;
  p.theta_c = 0.2;
  const auto kept = extract_junctions(b, p);
  ASSERT_EQ(kept.c.size(), 1u);
  EXPECT_EQ(kept.c[0].position, Vec2(22, 13));
  EXPECT_EQ(kept.c[0].depth, 4.0);
  EXPECT_EQ(kept.c[0].score, 0.25);
  p.theta_c = 0.3;
  EXPECT_TRUE(extract_junctions(b, p).c.empty());
}

TEST(ExtractJunctions, NonMaxSuppression) {
  auto b = blank();
  b.jmap[1](4, 4) = 0.9f;
  b.jmap[1](4, 5) = 0.6f;
  b.jmap[1](9, 9) = 0.5f;
  VectorizeParams p;
  EXPECT_EQ(extract_junctions(b, p).t.size(), 2u);
  p.nms = false;
  EXPECT_EQ(extract_junctions(b, p).t.size(), 3u);
}

TEST(Vectorize, RejectsBadParams) {
  VectorizeParams p;
  p.theta_e = 1.0;
  EXPECT_THROW(vectorize(blank(), p), Error);
  p = {};
  p.min_angle_deg = 90.0;
  EXPECT_THROW(vectorize(blank(), p), Error);
}

TEST(Vectorize, ZeroEdgeMapGivesVerticesOnly) {
  const auto gt = test::generic_scenes(1, 40).front();
  auto b = encode(gt.wireframe, gt.vps);
  for (auto& v : b.emap.data()) v = 0.0f;
  const auto wf = vectorize(b, VectorizeParams::ground_truth());
  EXPECT_TRUE(wf.edges.empty());
  int corners = 0;
  for (const auto& v : gt.wireframe.vertices) corners += v.type == JunctionType::C;
  EXPECT_EQ(static_cast<int>(wf.vertices.size()), corners);  // T-junctions need their line
}

TEST(Vectorize, GroundTruthRoundTrip) {
  for (const auto& gt : test::generic_scenes(15, 500)) {
    const auto r = vectorize_full(encode(gt.wireframe, gt.vps), VectorizeParams::ground_truth());
    ASSERT_TRUE(test::isomorphic(gt.wireframe, r.wireframe, 0.5));
    const auto m = test::match_vertices(gt.wireframe, r.wireframe, 0.5);
    for (size_t i = 0; i < gt.wireframe.vertices.size(); ++i) {
      const auto& v = r.wireframe.vertices[m.gt_to_pred[i]];
      EXPECT_EQ(*v.depth, static_cast<double>(static_cast<float>(*gt.wireframe.vertices[i].depth)));
    }
    // each occlusion becomes an attachment on the matching foreground line
    ASSERT_EQ(r.attachments.size(), gt.occlusions.size());
    for (const auto& occ : gt.occlusions) {
      const int t = m.gt_to_pred[occ.t_vertex];
      const auto it = std::find_if(r.attachments.begin(), r.attachments.end(),
                                   [&](const TAttachment& a) { return a.t_vertex == t; });
      ASSERT_NE(it, r.attachments.end());
      EXPECT_EQ(it->line, Edge::make(m.gt_to_pred[occ.foreground.a], m.gt_to_pred[occ.foreground.b]));
    }
  }
}

TEST(Vectorize, NoisyOutputsAreValidAndCrossingFree) {
  int s = 0;
  for (const auto& gt : test::generic_scenes(8, 900)) {
    const auto wf = vectorize(noisy(gt, ++s), {});
    EXPECT_GE(wf.edges.size(), 4u);
    EXPECT_TRUE(validate(wf).empty());
    for (size_t i = 0; i < wf.edges.size(); ++i) {
      for (size_t j = i + 1; j < wf.edges.size(); ++j) {
        const auto& e = wf.edges[i];
        const auto& f = wf.edges[j];
        if (e.touches(f.a) || e.touches(f.b)) continue;
        EXPECT_FALSE(geom::segments_intersect(wf.vertices[e.a].position, wf.vertices[e.b].position,
                                              wf.vertices[f.a].position, wf.vertices[f.b].position));
      }
    }
  }
}

TEST(Vectorize, RaisingLineThresholdNeverAddsEdges) {
  int s = 0;
  for (const auto& gt : test::generic_scenes(8, 900)) {
    const auto b = noisy(gt, ++s);
    std::optional<std::set<std::array<double, 4>>> prev;
    for (double theta : {0.3, 0.4, 0.5, 0.6, 0.65, 0.7, 0.8}) {
      VectorizeParams p;
      p.theta_e = theta;
      const auto lines = line_set(vectorize(b, p));
      if (prev) {
        EXPECT_TRUE(std::includes(prev->begin(), prev->end(), lines.begin(), lines.end()))
            << "theta " << theta;
      }
      prev = lines;
    }
  }
}
