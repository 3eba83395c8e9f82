#pragma once

// Pipeline configuration document. Every field is optional on input, unknown
// keys are rejected, and to_json() always writes the full canonical form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>

#include "wf3d/errors.hpp"
#include "wf3d/io.hpp"
#include "wf3d/lift.hpp"
#include "wf3d/loss.hpp"
#include "wf3d/synth.hpp"
#include "wf3d/vectorize.hpp"

namespace wf3d {

struct PipelineConfig {
  std::uint64_t seed = 0;
  int count = 5;
  GridSize grid{2, 2};
  SceneParams scene = SceneParams::generic();
  VectorizeParams vectorize;                                     // external heatmaps
  VectorizeParams pipeline_vectorize = VectorizeParams::ground_truth();  // encoded GT
  LiftOptions lift;
  loss::LossWeights loss;
  double iou_threshold = 0.5;
};

inline GridSize parse_grid(const std::string& s) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    size_t used = 0;
    const int r = std::stoi(s.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(s);
    const auto rest = s.substr(x + 1);
    const int c = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(s);
    if (r < 1 || c < 1) throw std::invalid_argument(s);
    return {r, c};
  } catch (const std::logic_error&) {
    fail(ErrorKind::kInvalidArgument, "grid must look like RxC with R, C >= 1, got \"" + s + "\"");
  }
}

inline std::string grid_to_string(GridSize g) {
  return std::to_string(g.rows) + "x" + std::to_string(g.cols);
}

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> known,
                           const std::string& where) {
  if (!j.is_object()) fail(ErrorKind::kInvalidArgument, where + " must be a JSON object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      fail(ErrorKind::kInvalidArgument, "unknown config key \"" + where + "." + key + "\"");
    }
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::kInvalidArgument, "config key \"" + where + "." + key + "\" has the wrong type");
  }
}

inline json vectorize_to_json(const VectorizeParams& p) {
  return {{"theta_c", p.theta_c},   {"theta_t", p.theta_t}, {"theta_e", p.theta_e},
          {"min_angle_deg", p.min_angle_deg}, {"nms", p.nms},     {"t_snap", p.t_snap}};
}

inline VectorizeParams vectorize_from_json(const json& j, VectorizeParams p, const std::string& where) {
  reject_unknown(j, {"theta_c", "theta_t", "theta_e", "min_angle_deg", "nms", "t_snap"}, where);
  read_field(j, "theta_c", p.theta_c, where);
  read_field(j, "theta_t", p.theta_t, where);
  read_field(j, "theta_e", p.theta_e, where);
  read_field(j, "min_angle_deg", p.min_angle_deg, where);
  read_field(j, "nms", p.nms, where);
  read_field(j, "t_snap", p.t_snap, where);
  p.check();
  return p;
}

#define WF3D_SCENE_FIELDS(X)                                                                   \
  X(image_width) X(image_height) X(cell_size) X(footprint_min) X(footprint_max) X(height_min) \
  X(height_max) X(focal_min) X(focal_max) X(principal_jitter) X(distance_min) X(distance_max) \
  X(elevation_min_deg) X(elevation_max_deg) X(roll_max_deg) X(lookat_jitter) X(min_buildings) \
  X(min_depth_gap) X(min_junction_separation_px) X(min_edge_length_px)                         \
  X(min_vertex_edge_clearance_px) X(min_corner_angle_deg) X(require_relaxed_t_order)          \
  X(reject_merged_junctions) X(max_attempts) X(near_plane)

inline json scene_params_to_json(const SceneParams& p) {
  json j = json::object();
#define X(name) j[#name] = p.name;
  WF3D_SCENE_FIELDS(X)
#undef X
  return j;
}

inline SceneParams scene_params_from_json(const json& j, SceneParams p) {
  const std::string where = "scene";
#define X(name) #name,
  reject_unknown(j, {WF3D_SCENE_FIELDS(X)}, where);
#undef X
#define X(name) read_field(j, #name, p.name, where);
  WF3D_SCENE_FIELDS(X)
#undef X
  return p;
}

#undef WF3D_SCENE_FIELDS

}  // namespace detail

inline json config_to_json(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["count"] = c.count;
  j["grid"] = grid_to_string(c.grid);
  j["scene"] = detail::scene_params_to_json(c.scene);
  j["vectorize"] = detail::vectorize_to_json(c.vectorize);
  j["pipeline_vectorize"] = detail::vectorize_to_json(c.pipeline_vectorize);
  j["lift"] = {{"lambda_r", c.lift.lambda_r},
               {"reject_deg", c.lift.reject_deg},
               {"restarts", c.lift.solver.restarts},
               {"solver_seed", c.lift.solver.seed},
               {"z_max_ratio", c.lift.solver.z_max_ratio}};
  j["loss"] = {{"junction", c.loss.junction}, {"offset", c.loss.offset}, {"edge", c.loss.edge},
               {"depth", c.loss.depth},       {"vp", c.loss.vp}};
  j["eval"] = {{"iou_threshold", c.iou_threshold}};
  return j;
}

inline PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  detail::reject_unknown(j, {"seed", "count", "grid", "scene", "vectorize", "pipeline_vectorize",
                             "lift", "loss", "eval"},
                         "config");
  detail::read_field(j, "seed", c.seed, "config");
  detail::read_field(j, "count", c.count, "config");
  if (j.contains("grid")) {
    std::string g;
    detail::read_field(j, "grid", g, "config");
    c.grid = parse_grid(g);
  }
  if (j.contains("scene")) c.scene = detail::scene_params_from_json(j["scene"], c.scene);
  if (j.contains("vectorize")) {
    c.vectorize = detail::vectorize_from_json(j["vectorize"], c.vectorize, "vectorize");
  }
  if (j.contains("pipeline_vectorize")) {
    c.pipeline_vectorize =
        detail::vectorize_from_json(j["pipeline_vectorize"], c.pipeline_vectorize, "pipeline_vectorize");
  }
  if (j.contains("lift")) {
    const auto& l = j["lift"];
    detail::reject_unknown(l, {"lambda_r", "reject_deg", "restarts", "solver_seed", "z_max_ratio"},
                           "lift");
    detail::read_field(l, "lambda_r", c.lift.lambda_r, "lift");
    detail::read_field(l, "reject_deg", c.lift.reject_deg, "lift");
    detail::read_field(l, "restarts", c.lift.solver.restarts, "lift");
    detail::read_field(l, "solver_seed", c.lift.solver.seed, "lift");
    detail::read_field(l, "z_max_ratio", c.lift.solver.z_max_ratio, "lift");
  }
  if (j.contains("loss")) {
    const auto& l = j["loss"];
    detail::reject_unknown(l, {"junction", "offset", "edge", "depth", "vp"}, "loss");
    detail::read_field(l, "junction", c.loss.junction, "loss");
    detail::read_field(l, "offset", c.loss.offset, "loss");
    detail::read_field(l, "edge", c.loss.edge, "loss");
    detail::read_field(l, "depth", c.loss.depth, "loss");
    detail::read_field(l, "vp", c.loss.vp, "loss");
    for (double w : {c.loss.junction, c.loss.offset, c.loss.edge, c.loss.depth, c.loss.vp}) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        fail(ErrorKind::kInvalidArgument, "loss weights must be finite and >= 0");
      }
    }
  }
  if (j.contains("eval")) {
    detail::reject_unknown(j["eval"], {"iou_threshold"}, "eval");
    detail::read_field(j["eval"], "iou_threshold", c.iou_threshold, "eval");
  }
  if (c.count < 0) fail(ErrorKind::kInvalidArgument, "count must be >= 0");
  if (!(c.lift.lambda_r >= 0.0)) fail(ErrorKind::kInvalidArgument, "lambda_r must be >= 0");
  if (c.lift.solver.restarts < 1) fail(ErrorKind::kInvalidArgument, "restarts must be >= 1");
  return c;
}

}  // namespace wf3d
