#pragma once

// Heatmap vectorization: junction extraction, line confidence, and the
// two-stage line construction (C-C lines, then T-junction attachment).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "wf3d/core.hpp"
#include "wf3d/errors.hpp"
#include "wf3d/geometry.hpp"
#include "wf3d/heatmap.hpp"

namespace wf3d {

struct VectorizeParams {
  double theta_c = 0.2;
  double theta_t = 0.3;
  double theta_e = 0.65;
  double min_angle_deg = 5.0;  // lines sharing an endpoint closer than this are duplicates
  bool nms = true;
  double t_snap = 1.5;  // heatmap cells

  /// Preset for bundles produced by encode(): peaks are isolated so NMS is
  /// off. An exact line reads at least 0.5 under the soft edge map (0.5 when
  /// it runs along a cell boundary), so the line threshold sits there.
  static VectorizeParams ground_truth() {
    VectorizeParams p;
    p.nms = false;
    p.theta_e = 0.5;
    return p;
  }

  void check() const {
    auto in01 = [](double x) { return x > 0.0 && x < 1.0; };
    if (!in01(theta_c) || !in01(theta_t) || !in01(theta_e)) {
      fail(ErrorKind::kInvalidArgument, "thresholds must lie in (0, 1)");
    }
    if (!(min_angle_deg > 0.0 && min_angle_deg < 90.0)) {
      fail(ErrorKind::kInvalidArgument, "min_angle_deg must lie in (0, 90)");
    }
    if (!(t_snap > 0.0)) fail(ErrorKind::kInvalidArgument, "t_snap must be positive");
  }
};

struct JunctionCandidate {
  Vec2 position;  // full-resolution pixels
  double score = 0.0;
  double depth = 0.0;
  JunctionType type = JunctionType::C;
  int row = 0;
  int col = 0;
};

struct JunctionSets {
  std::vector<JunctionCandidate> c;
  std::vector<JunctionCandidate> t;
};

/// Thresholds each junction map (after optional 4-neighbour NMS) and
/// decodes positions as stride * (cell + offset).
inline JunctionSets extract_junctions(const HeatmapBundle& bundle, const VectorizeParams& params) {
  JunctionSets out;
  const int rows = bundle.rows();
  const int cols = bundle.cols();
  for (auto type : kJunctionTypes) {
    const int t = type_index(type);
    const Grid& j = bundle.jmap[t];
    const double threshold = type == JunctionType::C ? params.theta_c : params.theta_t;
    auto& dst = type == JunctionType::C ? out.c : out.t;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const float s = j(r, c);
        if (s < threshold) continue;
        if (params.nms) {
          const bool suppressed = (r > 0 && j(r - 1, c) > s) || (r + 1 < rows && j(r + 1, c) > s) ||
                                  (c > 0 && j(r, c - 1) > s) || (c + 1 < cols && j(r, c + 1) > s);
          if (suppressed) continue;
        }
        JunctionCandidate jc;
        jc.type = type;
        jc.row = r;
        jc.col = c;
        jc.score = s;
        jc.depth = bundle.jdepth[t](r, c);
        jc.position = Vec2((c + static_cast<double>(bundle.offset_x[t](r, c))) * bundle.stride,
                           (r + static_cast<double>(bundle.offset_y[t](r, c))) * bundle.stride);
        dst.push_back(jc);
      }
    }
  }
  return out;
}

struct Cell {
  int col = 0;
  int row = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// 8-connected walk over the heatmap cells of the segment a -> b (given in
/// cell units): one cell per column (or row) along the major axis, picking
/// the cell that contains the segment at that column's center. Symmetric in
/// its endpoints.
inline std::vector<Cell> raster_line(Vec2 a, Vec2 b) {
  if (b.x() < a.x() || (b.x() == a.x() && b.y() < a.y())) std::swap(a, b);
  const Vec2 d = b - a;
  const int major = std::abs(d.x()) >= std::abs(d.y()) ? 0 : 1;
  const int minor = 1 - major;
  if (a[major] > b[major]) std::swap(a, b);
  const int i0 = static_cast<int>(std::floor(a[major]));
  const int i1 = static_cast<int>(std::floor(b[major]));
  std::vector<Cell> cells;
  cells.reserve(static_cast<size_t>(i1 - i0 + 1));
  const double span = b[major] - a[major];
  for (int i = i0; i <= i1; ++i) {
    double m = std::clamp(i + 0.5, a[major], b[major]);
    const double t = span > 0.0 ? (m - a[major]) / span : 0.0;
    const int k = static_cast<int>(std::floor(a[minor] + t * (b[minor] - a[minor])));
    cells.push_back(major == 0 ? Cell{i, k} : Cell{k, i});
  }
  return cells;
}

/// Mean edge-map value over the rasterized cells of u -> w (full-res pixels).
inline double line_confidence(const Vec2& u, const Vec2& w, const Grid& emap, int stride) {
  if (u == w) fail(ErrorKind::kDegenerateLine, "line endpoints coincide");
  const auto cells = raster_line(u / stride, w / stride);
  double sum = 0.0;
  for (const auto& c : cells) {
    if (c.row >= 0 && c.col >= 0 && c.row < emap.rows() && c.col < emap.cols()) {
      sum += emap(c.row, c.col);
    }
  }
  return sum / static_cast<double>(cells.size());
}

struct ScoredEdge {
  Edge edge;
  double confidence = 0.0;
};

/// False when `cand` crosses `acc`, or shares an endpoint with it at a polar
/// angle below `min_angle_deg`.
inline bool lines_compatible(const Edge& cand, const Edge& acc, const std::vector<Vec2>& positions,
                             double min_angle_deg) {
  if (acc == cand) return false;
  int shared = -1;
  if (acc.touches(cand.a)) shared = cand.a;
  if (acc.touches(cand.b)) shared = cand.b;
  if (shared >= 0) {
    const double ang = geom::ray_angle_deg(positions[shared], positions[cand.other(shared)],
                                           positions[acc.other(shared)]);
    return ang >= min_angle_deg;
  }
  return !geom::segments_intersect(positions[cand.a], positions[cand.b], positions[acc.a],
                                   positions[acc.b]);
}

/// Greedy pruning in descending confidence (ties: lexicographic endpoints).
inline std::vector<ScoredEdge> prune_lines(std::vector<ScoredEdge> lines,
                                           const std::vector<Vec2>& positions,
                                           double min_angle_deg) {
  std::sort(lines.begin(), lines.end(), [](const ScoredEdge& x, const ScoredEdge& y) {
    if (x.confidence != y.confidence) return x.confidence > y.confidence;
    return x.edge < y.edge;
  });
  std::vector<ScoredEdge> kept;
  for (const auto& cand : lines) {
    const bool ok = std::all_of(kept.begin(), kept.end(), [&](const ScoredEdge& acc) {
      return lines_compatible(cand.edge, acc.edge, positions, min_angle_deg);
    });
    if (ok) kept.push_back(cand);
  }
  return kept;
}

/// Where a T-junction was attached: position = lambda * u + (1 - lambda) * v.
struct TAttachment {
  int t_vertex = 0;
  Edge line;
  double lambda = 0.5;
};

struct VectorizeResult {
  Wireframe wireframe;
  std::vector<double> scores;        // per vertex
  std::vector<double> confidences;   // per edge (aligned with wireframe.edges)
  std::vector<TAttachment> attachments;
};

namespace detail {

struct WorkVertex {
  Vec2 position;
  JunctionType type;
  double score;
  double depth;
  int attach_line = -1;  // index into the working edge list (T only)
  Vec2 attach_dir = Vec2::Zero();
};

}  // namespace detail

/// Full vectorization. Stage 1 connects C-junction pairs whose confidence
/// reaches theta_e and prunes. Stage 2 repeatedly admits T-junctions lying
/// near an existing line (projecting them onto it) and gives each admitted
/// T-junction its single best partner; a final pruning pass follows.
inline VectorizeResult vectorize_full(const HeatmapBundle& bundle, const VectorizeParams& params) {
  params.check();
  const auto cand = extract_junctions(bundle, params);
  const int stride = bundle.stride;
  const Grid& emap = bundle.emap;

  std::vector<detail::WorkVertex> verts;
  for (const auto& c : cand.c) verts.push_back({c.position, JunctionType::C, c.score, c.depth});
  const int num_c = static_cast<int>(verts.size());

  auto positions = [&verts]() {
    std::vector<Vec2> p;
    p.reserve(verts.size());
    for (const auto& v : verts) p.push_back(v.position);
    return p;
  };

  // Stage 1.
  std::vector<ScoredEdge> stage1;
  for (int i = 0; i < num_c; ++i) {
    for (int j = i + 1; j < num_c; ++j) {
      if (verts[i].position == verts[j].position) continue;
      const double c = line_confidence(verts[i].position, verts[j].position, emap, stride);
      if (c >= params.theta_e) stage1.push_back({Edge{i, j}, c});
    }
  }
  std::vector<ScoredEdge> lines = prune_lines(std::move(stage1), positions(), params.min_angle_deg);

  // Stage 2.
  enum class TState { kPending, kAdmitted, kConnected };
  std::vector<int> t_index;   // working vertex index per T candidate
  std::vector<TState> state;  // per T candidate
  std::vector<TAttachment> attachments;
  for (const auto& t : cand.t) {
    t_index.push_back(static_cast<int>(verts.size()));
    state.push_back(TState::kPending);
    verts.push_back({t.position, JunctionType::T, t.score, t.depth});
  }
  const double snap_px = params.t_snap * stride;

  bool changed = true;
  while (changed) {
    changed = false;
    // Admit T-junctions near an existing line (nearest line wins).
    for (size_t k = 0; k < t_index.size(); ++k) {
      if (state[k] != TState::kPending) continue;
      auto& v = verts[t_index[k]];
      int best = -1;
      double best_dist = std::numeric_limits<double>::infinity();
      geom::LineProjection best_proj;
      for (int li = 0; li < static_cast<int>(lines.size()); ++li) {
        const Edge& e = lines[li].edge;
        if (e.touches(t_index[k])) continue;
        const auto proj = geom::project_to_line(v.position, verts[e.a].position, verts[e.b].position);
        if (proj.t <= 0.0 || proj.t >= 1.0 || proj.distance > snap_px) continue;
        if (proj.distance < best_dist) {
          best_dist = proj.distance;
          best = li;
          best_proj = proj;
        }
      }
      if (best < 0) continue;
      const Edge& e = lines[best].edge;
      v.position = best_proj.foot;
      v.attach_line = best;
      v.attach_dir = verts[e.b].position - verts[e.a].position;
      attachments.push_back({t_index[k], e, 1.0 - best_proj.t});
      state[k] = TState::kAdmitted;
      changed = true;
    }
    // Connect each admitted T-junction to its best partner.
    const auto pos = positions();
    for (size_t k = 0; k < t_index.size(); ++k) {
      if (state[k] != TState::kAdmitted) continue;
      const int u = t_index[k];
      int best = -1;
      double best_conf = -1.0;
      for (int w = 0; w < static_cast<int>(verts.size()); ++w) {
        if (w == u) continue;
        if (verts[w].type == JunctionType::T) {
          const auto pos = std::find(t_index.begin(), t_index.end(), w) - t_index.begin();
          if (state[pos] != TState::kAdmitted) continue;
        }
        const Vec2 dir = verts[w].position - verts[u].position;
        if (dir.squaredNorm() == 0.0) continue;
        // A T-junction's line never runs along the line occluding it.
        if (geom::line_angle_deg(dir, verts[u].attach_dir) < params.min_angle_deg) continue;
        if (verts[w].type == JunctionType::T &&
            geom::line_angle_deg(dir, verts[w].attach_dir) < params.min_angle_deg) {
          continue;
        }
        const double c = line_confidence(verts[u].position, verts[w].position, emap, stride);
        if (c <= best_conf) continue;
        // Skip partners whose line the final pruning pass would remove anyway.
        const Edge cand = Edge::make(u, w);
        const bool ok = std::all_of(lines.begin(), lines.end(), [&](const ScoredEdge& l) {
          return l.confidence < c || lines_compatible(cand, l.edge, pos, params.min_angle_deg);
        });
        if (ok) {
          best_conf = c;
          best = w;
        }
      }
      if (best < 0 || best_conf < params.theta_e) continue;
      lines.push_back({Edge::make(u, best), best_conf});
      state[k] = TState::kConnected;
      if (verts[best].type == JunctionType::T) {
        const auto pos = std::find(t_index.begin(), t_index.end(), best) - t_index.begin();
        state[pos] = TState::kConnected;
      }
      changed = true;
    }
  }
  lines = prune_lines(std::move(lines), positions(), params.min_angle_deg);

  // Output: every C candidate plus T-junctions that kept their single line.
  std::vector<int> degree(verts.size(), 0);
  for (const auto& l : lines) {
    ++degree[l.edge.a];
    ++degree[l.edge.b];
  }
  std::vector<int> remap(verts.size(), -1);
  VectorizeResult out;
  out.wireframe.image_size = bundle.image_size;
  for (int i = 0; i < static_cast<int>(verts.size()); ++i) {
    if (verts[i].type == JunctionType::T && degree[i] != 1) continue;
    remap[i] = static_cast<int>(out.wireframe.vertices.size());
    Vertex v;
    v.position = verts[i].position;
    v.type = verts[i].type;
    if (verts[i].depth > 0.0) v.depth = verts[i].depth;
    out.wireframe.vertices.push_back(v);
    out.scores.push_back(verts[i].score);
  }
  std::vector<ScoredEdge> kept;
  for (const auto& l : lines) {
    const int a = remap[l.edge.a];
    const int b = remap[l.edge.b];
    if (a < 0 || b < 0) continue;
    kept.push_back({Edge::make(a, b), l.confidence});
  }
  std::sort(kept.begin(), kept.end(),
            [](const ScoredEdge& x, const ScoredEdge& y) { return x.edge < y.edge; });
  for (const auto& k : kept) {
    out.wireframe.edges.push_back(k.edge);
    out.confidences.push_back(k.confidence);
  }
  for (const auto& att : attachments) {
    const int t = remap[att.t_vertex];
    const int a = remap[att.line.a];
    const int b = remap[att.line.b];
    if (t < 0 || a < 0 || b < 0) continue;
    const Edge line = Edge::make(a, b);
    if (!std::binary_search(out.wireframe.edges.begin(), out.wireframe.edges.end(), line)) continue;
    const double lambda = line.a == a ? att.lambda : 1.0 - att.lambda;
    out.attachments.push_back({t, line, lambda});
  }
  return out;
}

inline Wireframe vectorize(const HeatmapBundle& bundle, const VectorizeParams& params) {
  return vectorize_full(bundle, params).wireframe;
}

}  // namespace wf3d
