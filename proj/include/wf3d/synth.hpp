#pragma once

// Deterministic Manhattan block scenes and their exact ground-truth
// wireframes, computed by analytic hidden-line removal.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "wf3d/core.hpp"
#include "wf3d/errors.hpp"
#include "wf3d/geometry.hpp"
#include "wf3d/rng.hpp"

namespace wf3d {

struct Cuboid {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();

  Vec3 corner(int k) const {
    return Vec3((k & 1) ? max.x() : min.x(), (k & 2) ? max.y() : min.y(),
                (k & 4) ? max.z() : min.z());
  }

  bool contains(const Vec3& p, double margin = 0.0) const {
    return (p.array() > min.array() - margin).all() && (p.array() < max.array() + margin).all();
  }
};

/// World-to-camera rigid transform: X_cam = rotation * X_world + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_camera(const Vec3& xw) const { return rotation * xw + translation; }
  Vec3 center() const { return -rotation.transpose() * translation; }
};

struct GridSize {
  int rows = 1;
  int cols = 1;
};

struct SceneParams {
  int image_width = 512;
  int image_height = 512;
  double cell_size = 12.0;       // grid pitch, world meters
  double footprint_min = 0.45;   // fraction of the cell
  double footprint_max = 0.75;
  double height_min = 4.0;
  double height_max = 16.0;
  double focal_min = 350.0;
  double focal_max = 700.0;
  double principal_jitter = 0.0;  // px around the image center
  double distance_min = 1.6;      // multiples of the grid radius
  double distance_max = 3.0;
  double elevation_min_deg = 12.0;
  double elevation_max_deg = 40.0;
  double roll_max_deg = 5.0;
  double lookat_jitter = 0.15;  // fraction of the grid radius
  int min_buildings = 1;
  double min_depth_gap = 0.25;  // meters between a T-junction and its occluder
  double min_junction_separation_px = 0.0;
  double min_edge_length_px = 0.0;
  double min_vertex_edge_clearance_px = 0.0;  // junction to any edge it does not end on
  double min_corner_angle_deg = 0.0;  // edges meeting at a junction: angle in [a, 180 - a]
  bool require_relaxed_t_order = true;
  bool reject_merged_junctions = true;  // merged junctions carry one source's depth only
  int max_attempts = 400;
  double near_plane = 0.5;

  /// Scenes whose junctions and lines are well separated at heatmap
  /// resolution (three 4 px cells), so encode/vectorize round-trips exactly.
  static SceneParams generic() {
    SceneParams p;
    p.min_buildings = 2;
    p.min_junction_separation_px = 12.0;
    p.min_edge_length_px = 16.0;
    p.min_vertex_edge_clearance_px = 12.0;
    p.min_corner_angle_deg = 10.0;
    p.max_attempts = 1000;
    return p;
  }
};

struct Scene3D {
  std::vector<Cuboid> blocks;
  CameraModel camera;
  Pose pose;
  std::uint64_t seed = 0;
};

/// A T-junction together with the visible foreground edge it lies on.
/// position(t_vertex) = lambda * position(u) + (1 - lambda) * position(v).
struct Occlusion {
  int t_vertex = 0;
  Edge foreground;
  double lambda = 0.5;
  double occluder_depth = 0.0;  // foreground depth at the junction
};

struct GroundTruth {
  Wireframe wireframe;
  VanishingPoints vps;
  CameraModel camera;
  std::vector<int> edge_axis;  // aligned with wireframe.edges (0, 1, 2 = world x, y, z)
  std::vector<Occlusion> occlusions;
  int visible_buildings = 0;
  int merged_junctions = 0;  // vertices formed by merging coincident junctions
};

/// VPs of the world axes seen through (pose, K). v[2] is world-up (z).
inline VanishingPoints vp_from_pose(const Pose& pose, const Mat3& K) {
  VanishingPoints vps;
  for (int i = 0; i < 3; ++i) vps.v[i] = normalize_vp_homogeneous(K * pose.rotation.col(i));
  return vps;
}

inline Pose look_at(const Vec3& eye, const Vec3& target, double roll_rad = 0.0) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(Vec3::UnitZ());
  if (right.norm() < 1e-9) fail(ErrorKind::kInvalidArgument, "look_at: view direction is vertical");
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  const Mat3 roll = Eigen::AngleAxisd(roll_rad, Vec3::UnitZ()).toRotationMatrix();
  Pose pose;
  pose.rotation = roll * r;
  pose.translation = -pose.rotation * eye;
  return pose;
}

namespace detail {

struct Edge3 {
  int block = 0;
  int corner_a = 0;
  int corner_b = 0;
  int axis = 0;
  Vec3 cam_a, cam_b;
  Vec2 img_a, img_b;

  Vec2 image_at(double t) const { return img_a + t * (img_b - img_a); }
  /// Perspective-correct 3D parameter for image parameter t.
  double space_param(double t) const {
    return t * cam_a.z() / ((1.0 - t) * cam_b.z() + t * cam_a.z());
  }
  Vec3 cam_at(double t) const {
    const double s = space_param(t);
    return cam_a + s * (cam_b - cam_a);
  }
};

/// Liang-Barsky clip of a -> b against [0, xmax] x [0, ymax].
inline std::optional<std::pair<double, double>> clip_to_box(const Vec2& a, const Vec2& b,
                                                            double xmax, double ymax) {
  double t0 = 0.0;
  double t1 = 1.0;
  const Vec2 d = b - a;
  const std::array<double, 4> p = {-d.x(), d.x(), -d.y(), d.y()};
  const std::array<double, 4> q = {a.x(), xmax - a.x(), a.y(), ymax - a.y()};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return std::nullopt;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
  }
  if (t0 >= t1) return std::nullopt;
  return std::make_pair(t0, t1);
}

/// Whether the open segment from `eye` to `x` passes through the interior of
/// any block.
inline bool occluded(const std::vector<Cuboid>& blocks, const Vec3& eye, const Vec3& x) {
  constexpr double kEps = 1e-9;
  const Vec3 d = x - eye;
  for (const auto& box : blocks) {
    double u0 = 0.0;
    double u1 = 1.0;
    bool miss = false;
    for (int k = 0; k < 3 && !miss; ++k) {
      if (d[k] == 0.0) {
        if (eye[k] <= box.min[k] || eye[k] >= box.max[k]) miss = true;
        continue;
      }
      double a = (box.min[k] - eye[k]) / d[k];
      double b = (box.max[k] - eye[k]) / d[k];
      if (a > b) std::swap(a, b);
      u0 = std::max(u0, a);
      u1 = std::min(u1, b);
      if (u0 >= u1) miss = true;
    }
    if (miss) continue;
    if (u1 - u0 > kEps && u0 < 1.0 - kEps) return true;
  }
  return false;
}

struct JunctionKey {
  // kind 0: block corner (a = block, b = corner)
  // kind 1: border clip (a = edge, b = 0 start / 1 end)
  // kind 2: T-junction  (a = background edge, b = occluding edge)
  int kind = 0;
  int a = 0;
  int b = 0;
  auto operator<=>(const JunctionKey&) const = default;
};

struct Run {
  int edge = 0;
  double t0 = 0.0;
  double t1 = 1.0;
  JunctionKey k0, k1;
};

inline int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace detail

/// Hidden-line removal: projects every block edge, splits it at all image
/// crossings and the image border, ray-casts each piece, and turns the
/// visible runs into a wireframe with C- and T-junctions.
inline GroundTruth project_gt(const Scene3D& scene) {
  using detail::Edge3;
  using detail::JunctionKey;
  const auto& cam = scene.camera;
  const double xmax = cam.image_size.width - 1.0 / 64.0;
  const double ymax = cam.image_size.height - 1.0 / 64.0;
  const Vec3 eye = scene.pose.center();

  std::vector<Edge3> edges;
  for (int b = 0; b < static_cast<int>(scene.blocks.size()); ++b) {
    const auto& box = scene.blocks[b];
    for (int axis = 0; axis < 3; ++axis) {
      const int bit = 1 << axis;
      for (int k = 0; k < 8; ++k) {
        if (k & bit) continue;
        Edge3 e;
        e.block = b;
        e.corner_a = k;
        e.corner_b = k | bit;
        e.axis = axis;
        e.cam_a = scene.pose.to_camera(box.corner(e.corner_a));
        e.cam_b = scene.pose.to_camera(box.corner(e.corner_b));
        if (e.cam_a.z() <= 0.0 || e.cam_b.z() <= 0.0) {
          fail(ErrorKind::kInvalidArgument, "block corner behind the camera");
        }
        e.img_a = project(cam, e.cam_a);
        e.img_b = project(cam, e.cam_b);
        edges.push_back(e);
      }
    }
  }
  const int ne = static_cast<int>(edges.size());

  struct Split {
    double t;
    int other;  // -1 for border clip
    double other_t;
  };
  std::vector<std::vector<Split>> splits(ne);
  std::vector<std::optional<std::pair<double, double>>> clip(ne);
  for (int i = 0; i < ne; ++i) clip[i] = detail::clip_to_box(edges[i].img_a, edges[i].img_b, xmax, ymax);
  for (int i = 0; i < ne; ++i) {
    if (!clip[i]) continue;
    for (int j = i + 1; j < ne; ++j) {
      if (!clip[j]) continue;
      const auto c = geom::interior_crossing(edges[i].img_a, edges[i].img_b, edges[j].img_a,
                                             edges[j].img_b);
      if (!c) continue;
      splits[i].push_back({c->t, j, c->u});
      splits[j].push_back({c->u, i, c->t});
    }
  }

  // Visible runs per edge.
  std::vector<detail::Run> runs;
  std::map<JunctionKey, std::pair<int, double>> t_sources;  // T key -> (edge, t)
  for (int i = 0; i < ne; ++i) {
    if (!clip[i]) continue;
    const auto [lo, hi] = *clip[i];
    const auto& e = edges[i];
    const double len_px = (e.img_b - e.img_a).norm();
    std::vector<Split> cuts;
    cuts.push_back({lo, -1, 0.0});
    for (const auto& s : splits[i]) {
      if (s.t > lo && s.t < hi) cuts.push_back(s);
    }
    cuts.push_back({hi, -1, 0.0});
    std::sort(cuts.begin(), cuts.end(), [](const Split& a, const Split& b) { return a.t < b.t; });
    for (size_t k = 1; k < cuts.size(); ++k) {
      if ((cuts[k].t - cuts[k - 1].t) * len_px < 1e-6) {
        fail(ErrorKind::kInvalidArgument, "degenerate view: coincident crossings");
      }
    }
    std::vector<bool> vis(cuts.size() - 1);
    for (size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double tm = 0.5 * (cuts[k].t + cuts[k + 1].t);
      const Vec3 xc = e.cam_at(tm);
      const Vec3 xw = scene.pose.rotation.transpose() * (xc - scene.pose.translation);
      vis[k] = !detail::occluded(scene.blocks, eye, xw);
    }

    auto key_for = [&](size_t k, bool at_start) -> JunctionKey {
      const auto& c = cuts[k];
      if (c.other < 0) {
        if (c.t == 0.0) return {0, e.block, e.corner_a};
        if (c.t == 1.0) return {0, e.block, e.corner_b};
        return {1, i, at_start ? 0 : 1};
      }
      return {2, i, c.other};
    };

    size_t k = 0;
    while (k < vis.size()) {
      if (!vis[k]) {
        ++k;
        continue;
      }
      size_t m = k;
      while (m + 1 < vis.size() && vis[m + 1]) ++m;
      detail::Run run;
      run.edge = i;
      run.t0 = cuts[k].t;
      run.t1 = cuts[m + 1].t;
      run.k0 = key_for(k, true);
      run.k1 = key_for(m + 1, false);
      for (const auto* key : {&run.k0, &run.k1}) {
        if (key->kind == 2) {
          const double t = key == &run.k0 ? run.t0 : run.t1;
          if (!t_sources.emplace(*key, std::make_pair(i, t)).second) {
            fail(ErrorKind::kInvalidArgument, "degenerate view: doubly occluded crossing");
          }
        }
      }
      runs.push_back(run);
      k = m + 1;
    }
  }
  if (runs.empty()) fail(ErrorKind::kEmptyView, "no edge is visible");

  // Junction positions and depths.
  std::map<JunctionKey, int> index_of;
  std::vector<JunctionKey> keys;
  Wireframe wf;
  wf.image_size = cam.image_size;
  auto add_vertex = [&](const JunctionKey& key, int edge, double t) {
    auto it = index_of.find(key);
    if (it != index_of.end()) return it->second;
    const auto& e = edges[edge];
    Vertex v;
    v.type = key.kind == 2 ? JunctionType::T : JunctionType::C;
    if (key.kind == 0) {
      const bool is_a = key.b == e.corner_a;
      v.position = is_a ? e.img_a : e.img_b;
      v.depth = is_a ? e.cam_a.z() : e.cam_b.z();
    } else {
      v.position = e.image_at(t);
      v.depth = e.cam_at(t).z();
    }
    const int idx = static_cast<int>(wf.vertices.size());
    wf.vertices.push_back(v);
    keys.push_back(key);
    index_of.emplace(key, idx);
    return idx;
  };
  struct RawEdge {
    int a, b, axis;
  };
  std::vector<RawEdge> raw_edges;
  std::vector<bool> block_visible(scene.blocks.size(), false);
  for (const auto& run : runs) {
    const int a = add_vertex(run.k0, run.edge, run.t0);
    const int b = add_vertex(run.k1, run.edge, run.t1);
    raw_edges.push_back({a, b, edges[run.edge].axis});
    block_visible[edges[run.edge].block] = true;
  }

  // Merge junctions closer than half a pixel into one C-junction.
  const int nv = static_cast<int>(wf.vertices.size());
  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  for (int i = 0; i < nv; ++i) {
    for (int j = i + 1; j < nv; ++j) {
      if ((wf.vertices[i].position - wf.vertices[j].position).norm() < 0.5) {
        const int ri = detail::find_root(parent, i);
        const int rj = detail::find_root(parent, j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  std::vector<int> remap(nv, -1);
  std::vector<int> group_size(nv, 0);
  for (int i = 0; i < nv; ++i) ++group_size[detail::find_root(parent, i)];
  Wireframe merged;
  merged.image_size = wf.image_size;
  std::vector<JunctionKey> merged_keys;
  for (int i = 0; i < nv; ++i) {
    const int r = detail::find_root(parent, i);
    if (r == i) {
      remap[i] = static_cast<int>(merged.vertices.size());
      Vertex v = wf.vertices[i];
      if (group_size[i] > 1) v.type = JunctionType::C;
      merged.vertices.push_back(v);
      merged_keys.push_back(keys[i]);
    }
  }
  for (int i = 0; i < nv; ++i) remap[i] = remap[detail::find_root(parent, i)];

  std::map<Edge, int> axis_of;
  for (const auto& re : raw_edges) {
    const int a = remap[re.a];
    const int b = remap[re.b];
    if (a == b) continue;
    axis_of.emplace(Edge::make(a, b), re.axis);
  }
  GroundTruth gt;
  for (int i = 0; i < nv; ++i) {
    if (detail::find_root(parent, i) == i && group_size[i] > 1) ++gt.merged_junctions;
  }
  for (const auto& [e, axis] : axis_of) {
    merged.edges.push_back(e);
    gt.edge_axis.push_back(axis);
  }
  // A merge can leave a T-junction with a second incident edge; such
  // junctions are demoted to C.
  {
    const auto deg = merged.degrees();
    for (size_t i = 0; i < merged.vertices.size(); ++i) {
      if (merged.vertices[i].type == JunctionType::T && deg[i] != 1) {
        merged.vertices[i].type = JunctionType::C;
      }
    }
  }

  // Foreground edge of every surviving T-junction.
  for (int vi = 0; vi < static_cast<int>(merged.vertices.size()); ++vi) {
    if (merged.vertices[vi].type != JunctionType::T) continue;
    const auto& key = merged_keys[vi];
    const int fg = key.b;
    const auto& src = t_sources.at(key);
    // Crossing parameter along the occluding edge.
    const auto c = geom::interior_crossing(edges[src.first].img_a, edges[src.first].img_b,
                                           edges[fg].img_a, edges[fg].img_b);
    if (!c) fail(ErrorKind::kInvalidArgument, "degenerate view: lost T crossing");
    const double u = c->u;
    const detail::Run* host = nullptr;
    for (const auto& run : runs) {
      if (run.edge == fg && run.t0 < u && u < run.t1) {
        host = &run;
        break;
      }
    }
    if (host == nullptr) fail(ErrorKind::kInvalidArgument, "degenerate view: hidden occluder");
    const int a = remap[index_of.at(host->k0)];
    const int b = remap[index_of.at(host->k1)];
    if (a == b || a == vi || b == vi) continue;
    const Vec2& pa = merged.vertices[a].position;
    const Vec2& pb = merged.vertices[b].position;
    const auto proj = geom::project_to_line(merged.vertices[vi].position, pa, pb);
    Occlusion occ;
    occ.t_vertex = vi;
    occ.foreground = Edge::make(a, b);
    const double s = proj.t;  // position = (1 - s) * pa + s * pb
    occ.lambda = occ.foreground.a == a ? 1.0 - s : s;
    occ.occluder_depth = edges[fg].cam_at(u).z();
    if (!(*merged.vertices[vi].depth > occ.occluder_depth)) {
      fail(ErrorKind::kInvalidArgument, "degenerate view: T-junction in front of its occluder");
    }
    gt.occlusions.push_back(occ);
  }

  gt.wireframe = std::move(merged);
  gt.camera = cam;
  gt.vps = vp_from_pose(scene.pose, cam.K());
  gt.visible_buildings =
      static_cast<int>(std::count(block_visible.begin(), block_visible.end(), true));
  return gt;
}

/// Smallest image distance between any two junctions (infinity when < 2).
inline double min_junction_separation(const Wireframe& wf) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < wf.vertices.size(); ++i) {
    for (size_t j = i + 1; j < wf.vertices.size(); ++j) {
      best = std::min(best, (wf.vertices[i].position - wf.vertices[j].position).norm());
    }
  }
  return best;
}

inline double min_edge_length(const Wireframe& wf) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : wf.edges) best = std::min(best, wf.edge_length(e));
  return best;
}

/// Smallest distance from a junction to an edge it is not an endpoint of.
/// A T-junction is exempt from the foreground edge it sits on.
inline double min_vertex_edge_clearance(const GroundTruth& gt) {
  const auto& wf = gt.wireframe;
  double best = std::numeric_limits<double>::infinity();
  for (int v = 0; v < static_cast<int>(wf.vertices.size()); ++v) {
    const Edge* own = nullptr;
    for (const auto& occ : gt.occlusions) {
      if (occ.t_vertex == v) own = &occ.foreground;
    }
    for (const auto& e : wf.edges) {
      if (e.touches(v) || (own && *own == e)) continue;
      best = std::min(best, geom::point_segment_distance(wf.vertices[v].position,
                                                         wf.vertices[e.a].position,
                                                         wf.vertices[e.b].position));
    }
  }
  return best;
}

/// Smallest deviation from 0 or 180 degrees between two edges at a junction.
inline double min_corner_angle_deg(const Wireframe& wf) {
  double best = 90.0;
  for (int v = 0; v < static_cast<int>(wf.vertices.size()); ++v) {
    std::vector<Vec2> dirs;
    for (const auto& e : wf.edges) {
      if (e.touches(v)) dirs.push_back(wf.vertices[e.other(v)].position - wf.vertices[v].position);
    }
    for (size_t i = 0; i < dirs.size(); ++i) {
      for (size_t j = i + 1; j < dirs.size(); ++j) {
        const double a = geom::ray_angle_deg(Vec2::Zero(), dirs[i], dirs[j]);
        best = std::min({best, a, 180.0 - a});
      }
    }
  }
  return best;
}

/// Reasons a projected scene fails the sampling criteria; empty when it passes.
inline std::string check_criteria(const GroundTruth& gt, const SceneParams& p) {
  if (gt.visible_buildings < p.min_buildings) return "too few visible buildings";
  if (p.reject_merged_junctions && gt.merged_junctions > 0) return "coincident junctions";
  for (const auto& occ : gt.occlusions) {
    const double zw = *gt.wireframe.vertices[occ.t_vertex].depth;
    if (zw - occ.occluder_depth < p.min_depth_gap) return "T-junction depth gap too small";
    if (p.require_relaxed_t_order) {
      const double zu = *gt.wireframe.vertices[occ.foreground.a].depth;
      const double zv = *gt.wireframe.vertices[occ.foreground.b].depth;
      if (occ.lambda * zu + (1.0 - occ.lambda) * zv > zw) return "relaxed T order violated";
    }
  }
  if (p.min_junction_separation_px > 0.0 &&
      !(min_junction_separation(gt.wireframe) > p.min_junction_separation_px)) {
    return "junctions too close";
  }
  if (p.min_edge_length_px > 0.0 && min_edge_length(gt.wireframe) < p.min_edge_length_px) {
    return "edge too short";
  }
  if (p.min_vertex_edge_clearance_px > 0.0 &&
      !(min_vertex_edge_clearance(gt) > p.min_vertex_edge_clearance_px)) {
    return "junction too close to an edge";
  }
  if (p.min_corner_angle_deg > 0.0 && min_corner_angle_deg(gt.wireframe) < p.min_corner_angle_deg) {
    return "edges too close in angle";
  }
  if (!validate(gt.wireframe).empty()) return "invalid wireframe";
  return {};
}

inline void check_params(const GridSize& grid, const SceneParams& p) {
  auto bad = [](const std::string& what) { fail(ErrorKind::kInvalidArgument, what); };
  if (grid.rows < 1 || grid.cols < 1) bad("grid dimensions must be >= 1");
  if (p.image_width <= 0 || p.image_height <= 0) bad("image size must be positive");
  if (!(p.cell_size > 0.0)) bad("cell_size must be positive");
  if (!(p.footprint_min > 0.0) || !(p.footprint_max > p.footprint_min) || p.footprint_max > 1.0) {
    bad("footprint range must satisfy 0 < min < max <= 1");
  }
  if (!(p.height_min > 0.0) || !(p.height_max > p.height_min)) {
    bad("height range must satisfy 0 < min < max");
  }
  if (!(p.focal_min > 0.0) || p.focal_max < p.focal_min) bad("focal range invalid");
  if (!(p.distance_min > 0.0) || p.distance_max < p.distance_min) bad("distance range invalid");
  if (p.elevation_max_deg < p.elevation_min_deg || p.elevation_max_deg >= 89.0) {
    bad("elevation range invalid");
  }
  if (p.max_attempts < 1) bad("max_attempts must be >= 1");
  if (p.min_buildings > grid.rows * grid.cols) bad("min_buildings exceeds the number of grid cells");
}

/// Builds a block grid and rejection-samples a camera until the projected
/// ground truth meets every criterion in `params`.
inline Scene3D generate(std::uint64_t seed, GridSize grid, const SceneParams& params = {}) {
  check_params(grid, params);
  Rng rng(seed);
  Scene3D scene;
  scene.seed = seed;
  double mean_height = 0.0;
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const double fx = rng.uniform(params.footprint_min, params.footprint_max) * params.cell_size;
      const double fy = rng.uniform(params.footprint_min, params.footprint_max) * params.cell_size;
      const double ox = rng.uniform(0.0, params.cell_size - fx);
      const double oy = rng.uniform(0.0, params.cell_size - fy);
      const double h = rng.uniform(params.height_min, params.height_max);
      Cuboid box;
      box.min = Vec3(c * params.cell_size + ox, r * params.cell_size + oy, 0.0);
      box.max = box.min + Vec3(fx, fy, h);
      scene.blocks.push_back(box);
      mean_height += h;
    }
  }
  mean_height /= static_cast<double>(scene.blocks.size());

  const Vec3 center(0.5 * grid.cols * params.cell_size, 0.5 * grid.rows * params.cell_size, 0.0);
  const double radius = 0.5 * std::hypot(grid.cols, grid.rows) * params.cell_size;
  const ImageSize size{params.image_width, params.image_height};

  std::string last_reason = "no attempt";
  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    CameraModel cam;
    cam.image_size = size;
    cam.focal = rng.uniform(params.focal_min, params.focal_max);
    cam.principal_point =
        Vec2(0.5 * size.width + rng.uniform(-1.0, 1.0) * params.principal_jitter,
             0.5 * size.height + rng.uniform(-1.0, 1.0) * params.principal_jitter);
    const double az = rng.uniform(0.0, 2.0 * geom::kPi);
    const double el = geom::deg2rad(rng.uniform(params.elevation_min_deg, params.elevation_max_deg));
    const double dist = rng.uniform(params.distance_min, params.distance_max) * radius;
    const double roll = geom::deg2rad(rng.uniform(-1.0, 1.0) * params.roll_max_deg);
    const Vec3 jitter(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.0));
    const Vec3 target = center + Vec3(0.0, 0.0, 0.35 * mean_height) +
                        params.lookat_jitter * radius * jitter;
    const Vec3 eye =
        center + dist * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));

    scene.camera = cam;
    scene.pose = look_at(eye, target, roll);

    bool ok = true;
    for (const auto& box : scene.blocks) {
      if (box.contains(eye, params.near_plane)) ok = false;
      for (int k = 0; k < 8 && ok; ++k) {
        if (scene.pose.to_camera(box.corner(k)).z() < params.near_plane) ok = false;
      }
    }
    if (!ok) {
      last_reason = "camera too close";
      continue;
    }
    try {
      const auto gt = project_gt(scene);
      last_reason = check_criteria(gt, params);
      if (last_reason.empty()) return scene;
    } catch (const Error& e) {
      last_reason = e.what();
    }
  }
  fail(ErrorKind::kGenerationFailed,
       "seed " + std::to_string(seed) + ": no admissible viewpoint (" + last_reason + ")");
}

// --- JSON --------------------------------------------------------------------

inline nlohmann::json scene_to_json(const Scene3D& scene) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : scene.blocks) {
    blocks.push_back({{"min", {b.min.x(), b.min.y(), b.min.z()}},
                      {"max", {b.max.x(), b.max.y(), b.max.z()}}});
  }
  nlohmann::json rot = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back({scene.pose.rotation(r, 0), scene.pose.rotation(r, 1), scene.pose.rotation(r, 2)});
  }
  const auto& t = scene.pose.translation;
  const auto& cam = scene.camera;
  return {{"seed", scene.seed},
          {"blocks", std::move(blocks)},
          {"camera",
           {{"focal", cam.focal},
            {"principal_point", {cam.principal_point.x(), cam.principal_point.y()}},
            {"image_size", {cam.image_size.width, cam.image_size.height}}}},
          {"pose", {{"rotation", std::move(rot)}, {"translation", {t.x(), t.y(), t.z()}}}}};
}

inline Scene3D scene_from_json(const nlohmann::json& j) {
  Scene3D scene;
  try {
    scene.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& jb : j.at("blocks")) {
      Cuboid b;
      for (int k = 0; k < 3; ++k) {
        b.min[k] = jb.at("min").at(k).get<double>();
        b.max[k] = jb.at("max").at(k).get<double>();
      }
      scene.blocks.push_back(b);
    }
    const auto& jc = j.at("camera");
    scene.camera.focal = jc.at("focal").get<double>();
    scene.camera.principal_point =
        Vec2(jc.at("principal_point").at(0).get<double>(), jc.at("principal_point").at(1).get<double>());
    scene.camera.image_size = {jc.at("image_size").at(0).get<int>(),
                               jc.at("image_size").at(1).get<int>()};
    const auto& jp = j.at("pose");
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) scene.pose.rotation(r, c) = jp.at("rotation").at(r).at(c).get<double>();
      scene.pose.translation[r] = jp.at("translation").at(r).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("scene JSON: ") + e.what());
  }
  return scene;
}

}  // namespace wf3d
