#pragma once

// Command-line front end. Data goes to files, JSON-line logs go to stderr.
// Exit codes: 0 ok, 1 validation error, 2 I/O error, 64 usage error.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wf3d/config.hpp"
#include "wf3d/heatmap.hpp"
#include "wf3d/io.hpp"
#include "wf3d/lift.hpp"
#include "wf3d/loss.hpp"
#include "wf3d/metrics.hpp"
#include "wf3d/rng.hpp"
#include "wf3d/synth.hpp"
#include "wf3d/vectorize.hpp"

namespace wf3d::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kValidation = 1, kIoFailure = 2, kUsage = 64 };

inline constexpr const char* kWireframeSuffix = ".wireframe.json";
inline constexpr const char* kSceneSuffix = ".scene.json";
inline constexpr const char* kHeatmapSuffix = ".wfhm";
inline constexpr int kSeedTries = 8;
inline constexpr double kDepthMatchPx = 2.0;

class Logger {
 public:
  void set_quiet(bool q) { quiet_ = q; }

  void log(const char* level, const std::string& event, json fields = json::object()) {
    if (quiet_ && std::string_view(level) != "error") return;
    fields["level"] = level;
    fields["event"] = event;
    std::lock_guard<std::mutex> lock(mutex_);
    std::cerr << fields.dump() << '\n';
  }

  void info(const std::string& event, json fields = json::object()) {
    log("info", event, std::move(fields));
  }
  void error(const std::string& event, json fields = json::object()) {
    log("error", event, std::move(fields));
  }

 private:
  std::mutex mutex_;
  bool quiet_ = false;
};

inline Logger& logger() {
  static Logger l;
  return l;
}

inline std::string sample_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%04d", index);
  return buf;
}

/// Runs f(0..n-1) on up to `jobs` threads. The first exception by index is
/// rethrown after all workers finish.
template <typename F>
void parallel_for(int n, int jobs, F&& f) {
  std::vector<std::exception_ptr> errors(static_cast<size_t>(std::max(n, 0)));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, std::max(n, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// --- building blocks -----------------------------------------------------------

struct Sample {
  std::uint64_t seed = 0;
  Scene3D scene;
  GroundTruth gt;
};

/// Scene for sample `index`; seeds whose block layout admits no viewpoint
/// are replaced by further streams of the same sample seed.
inline Sample generate_sample(const PipelineConfig& cfg, int index) {
  const std::uint64_t base = mix_seed(cfg.seed, static_cast<std::uint64_t>(index));
  std::string last;
  for (int k = 0; k < kSeedTries; ++k) {
    const std::uint64_t s = k == 0 ? base : mix_seed(base, static_cast<std::uint64_t>(k));
    try {
      Sample out;
      out.seed = s;
      out.scene = generate(s, cfg.grid, cfg.scene);
      out.gt = project_gt(out.scene);
      return out;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kGenerationFailed) throw;
      last = e.what();
    }
  }
  fail(ErrorKind::kGenerationFailed, sample_id(index) + ": " + last);
}

inline WireframeDocument gt_document(const GroundTruth& gt) {
  WireframeDocument doc;
  doc.wireframe = gt.wireframe;
  doc.camera = gt.camera;
  doc.vps = gt.vps;
  for (const auto& occ : gt.occlusions) {
    doc.t_constraints.push_back({occ.t_vertex, occ.foreground, occ.lambda});
  }
  for (const auto& v : gt.wireframe.vertices) doc.points.push_back(back_project(gt.camera, v));
  return doc;
}

inline WireframeDocument vectorized_document(const VectorizeResult& r, const VanishingPoints& vps) {
  WireframeDocument doc;
  doc.wireframe = r.wireframe;
  doc.vps = vps;
  doc.scores = r.scores;
  for (const auto& a : r.attachments) doc.t_constraints.push_back({a.t_vertex, a.line, a.lambda});
  return doc;
}

/// Lifts `doc` in place. T constraints come from the document when present,
/// otherwise from geometry.
inline LiftResult lift_document(WireframeDocument& doc, const LiftOptions& options,
                                const std::optional<CameraModel>& camera) {
  if (!doc.vps) fail(ErrorKind::kInvalidArgument, "wireframe has no vanishing points");
  const auto tcs =
      doc.t_constraints.empty() ? infer_t_constraints(doc.wireframe) : doc.t_constraints;
  auto r = lift(doc.wireframe, *doc.vps, tcs, camera, options);
  doc.wireframe = r.wireframe;
  doc.points = r.points;
  doc.camera = r.camera;
  doc.t_constraints = tcs;
  return r;
}

inline json lift_summary(const LiftResult& r) {
  return {{"objective", r.solution.objective},
          {"iterations", r.solution.iterations},
          {"restart_spread", r.solution.restart_spread}};
}

inline std::optional<CameraModel> document_camera(const WireframeDocument& doc) {
  if (doc.camera) return doc.camera;
  if (!doc.vps) return std::nullopt;
  try {
    return calibrate_from_vps(*doc.vps, doc.wireframe.image_size);
  } catch (const Error&) {
    return std::nullopt;
  }
}

/// Camera-space 3D points: stored ones, else back-projected depths.
inline std::vector<Vec3> document_points(const WireframeDocument& doc) {
  if (doc.points.size() == doc.wireframe.vertices.size()) return doc.points;
  const auto cam = document_camera(doc);
  if (!cam || !doc.wireframe.all_depths()) {
    fail(ErrorKind::kInvalidArgument, "wireframe has neither 3D points nor depths with a camera");
  }
  std::vector<Vec3> out;
  for (const auto& v : doc.wireframe.vertices) out.push_back(back_project(*cam, v));
  return out;
}

inline std::string to_obj(const WireframeDocument& doc) {
  const auto pts = document_points(doc);
  Wireframe wf = doc.wireframe;
  wf.canonicalize();
  std::string out;
  char buf[128];
  for (const auto& p : pts) {
    // camera frame (x right, y down, z forward) to y-up, -z forward
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", p.x(), -p.y(), -p.z());
    out += buf;
  }
  for (const auto& e : wf.edges) {
    std::snprintf(buf, sizeof buf, "l %d %d\n", e.a + 1, e.b + 1);
    out += buf;
  }
  return out;
}

struct SvgView {
  double azimuth_deg = 30.0;
  double elevation_deg = 20.0;
  int size = 512;
};

/// Novel view orbiting the wireframe centroid; lines colored near (red) to
/// far (blue) and drawn far to near.
inline std::string to_svg(const WireframeDocument& doc, const SvgView& view) {
  if (view.size <= 0) fail(ErrorKind::kInvalidArgument, "render size must be positive");
  const auto pts = document_points(doc);
  const auto& wf = doc.wireframe;
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  if (!pts.empty()) c /= static_cast<double>(pts.size());
  double radius = 1e-9;
  for (const auto& p : pts) radius = std::max(radius, (p - c).norm());

  const double az = geom::deg2rad(view.azimuth_deg);
  const double el = geom::deg2rad(view.elevation_deg);
  const Mat3 R = (Eigen::AngleAxisd(el, Vec3::UnitX()) * Eigen::AngleAxisd(az, Vec3::UnitY()))
                     .toRotationMatrix();
  const double s = view.size;
  const double f = 0.9 * s;
  std::vector<Vec3> q;
  double zmin = std::numeric_limits<double>::infinity();
  double zmax = -zmin;
  for (const auto& p : pts) {
    Vec3 r = R * (p - c);
    r.z() += 3.0 * radius;
    q.emplace_back(0.5 * s + f * r.x() / r.z(), 0.5 * s + f * r.y() / r.z(), r.z());
    zmin = std::min(zmin, r.z());
    zmax = std::max(zmax, r.z());
  }
  const double span = zmax > zmin ? zmax - zmin : 1.0;

  std::vector<std::pair<double, Edge>> order;
  for (const auto& e : wf.edges) order.push_back({0.5 * (q[e.a].z() + q[e.b].z()), e});
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n",
                view.size, view.size, view.size, view.size);
  out += buf;
  for (const auto& [depth, e] : order) {
    const double t = std::clamp((depth - zmin) / span, 0.0, 1.0);
    const int red = static_cast<int>(std::lround(220.0 * (1.0 - t)));
    const int blue = static_cast<int>(std::lround(220.0 * t));
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#%02x30%02x\" "
                  "stroke-width=\"2\"/>\n",
                  q[e.a].x(), q[e.a].y(), q[e.b].x(), q[e.b].y(), red, blue);
    out += buf;
  }
  for (size_t i = 0; i < q.size(); ++i) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n",
                  q[i].x(), q[i].y(), wf.vertices[i].type == JunctionType::C ? "black" : "gray");
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

// --- evaluation ----------------------------------------------------------------

struct EvalInput {
  WireframeDocument pred;
  std::optional<HeatmapBundle> pred_heatmaps;
  WireframeDocument gt;
  std::optional<HeatmapBundle> gt_heatmaps;
};

inline Grid edge_map(const WireframeDocument& doc, const std::optional<HeatmapBundle>& hm) {
  if (hm) return hm->emap;
  auto b = HeatmapBundle::zeros(doc.wireframe.image_size);
  rasterize_edges(doc.wireframe, b.emap, b.stride);
  return b.emap;
}

inline std::pair<std::vector<double>, std::vector<double>> depth_pairs(const EvalInput& in) {
  std::vector<double> pred;
  std::vector<double> gt;
  const auto& gw = in.gt.wireframe;
  const auto& pw = in.pred.wireframe;
  for (const auto& v : gw.vertices) {
    if (!v.depth) continue;
    const int t = type_index(v.type);
    if (in.pred_heatmaps) {
      const auto& hm = *in.pred_heatmaps;
      const int c = static_cast<int>(std::floor(v.position.x() / hm.stride));
      const int r = static_cast<int>(std::floor(v.position.y() / hm.stride));
      if (r < 0 || c < 0 || r >= hm.rows() || c >= hm.cols()) continue;
      const double d = hm.jdepth[t](r, c);
      if (d > 0.0) {
        pred.push_back(d);
        gt.push_back(*v.depth);
      }
      continue;
    }
    double best = kDepthMatchPx;
    std::optional<double> match;
    for (const auto& p : pw.vertices) {
      if (p.type != v.type || !p.depth || !(*p.depth > 0.0)) continue;
      const double d = (p.position - v.position).norm();
      if (d <= best) {
        best = d;
        match = *p.depth;
      }
    }
    if (match) {
      pred.push_back(*match);
      gt.push_back(*v.depth);
    }
  }
  return {pred, gt};
}

inline json evaluate_sample(const EvalInput& in, double iou_threshold) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  const auto& pw = in.pred.wireframe;
  const auto& gw = in.gt.wireframe;
  json m;
  m["ap_c"] = opt(metrics::junction_map(pw, in.pred.scores, gw, JunctionType::C));
  m["ap_t"] = opt(metrics::junction_map(pw, in.pred.scores, gw, JunctionType::T));

  if (!(pw.image_size == gw.image_size)) {
    fail(ErrorKind::kShapeMismatch, "prediction and ground truth differ in image size");
  }
  m["iou_e"] = metrics::edge_iou(edge_map(in.pred, in.pred_heatmaps), edge_map(in.gt, in.gt_heatmaps),
                                 iou_threshold);

  const auto [pd, gd] = depth_pairs(in);
  m["silog"] = pd.empty() ? json(nullptr) : json(metrics::silog_eval(pd, gd));
  m["depth_pairs"] = pd.size();

  auto vps_of = [](const WireframeDocument& d, const std::optional<HeatmapBundle>& hm) {
    if (d.vps) return std::optional<VanishingPoints>(d.vps);
    if (hm) return std::optional<VanishingPoints>(hm->vps);
    return std::optional<VanishingPoints>();
  };
  auto pred_doc = in.pred;
  auto gt_doc = in.gt;
  pred_doc.vps = vps_of(in.pred, in.pred_heatmaps);
  gt_doc.vps = vps_of(in.gt, in.gt_heatmaps);
  const auto gt_cam = document_camera(gt_doc);
  const auto pred_cam = document_camera(pred_doc);
  m["vp_mean_deg"] = nullptr;
  m["vp_failure"] = nullptr;
  if (pred_doc.vps && gt_doc.vps && gt_cam) {
    const auto e = metrics::vp_errors(*pred_doc.vps, *gt_doc.vps, *gt_cam);
    m["vp_deg"] = e.deg;
    m["vp_mean_deg"] = e.mean;
    m["vp_failure"] = e.failure;
  }
  m["focal_rel_err"] =
      pred_cam && gt_cam ? json(metrics::focal_rel_err(*pred_cam, *gt_cam)) : json(nullptr);
  return m;
}

inline constexpr std::array<const char*, 6> kAggregateKeys = {
    "ap_c", "ap_t", "iou_e", "silog", "vp_mean_deg", "focal_rel_err"};

inline json aggregate(const std::vector<json>& samples) {
  json agg;
  int failed = 0;
  for (const auto& s : samples) failed += s.contains("error");
  for (const char* key : kAggregateKeys) {
    std::vector<double> v;
    for (const auto& s : samples) {
      if (s.contains(key) && s[key].is_number()) v.push_back(s[key].get<double>());
    }
    agg[key] = {{"mean", v.empty() ? json(nullptr) : json(metrics::mean(v))},
                {"median", v.empty() ? json(nullptr) : json(metrics::median(v))},
                {"n", v.size()}};
  }
  int vp_n = 0;
  int vp_fail = 0;
  for (const auto& s : samples) {
    if (s.contains("vp_failure") && s["vp_failure"].is_boolean()) {
      ++vp_n;
      vp_fail += s["vp_failure"].get<bool>();
    }
  }
  agg["vp_failure_pct"] = vp_n ? json(100.0 * vp_fail / vp_n) : json(nullptr);
  agg["samples"] = samples.size();
  agg["failed"] = failed;
  agg["failed_pct"] = samples.empty() ? 0.0 : 100.0 * failed / static_cast<double>(samples.size());
  return agg;
}

inline std::string strip_suffix(const std::string& name, const std::string& suffix) {
  if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix)) {
    return {};
  }
  return name.substr(0, name.size() - suffix.size());
}

inline std::optional<HeatmapBundle> sibling_heatmaps(const fs::path& wireframe_path) {
  const auto id = strip_suffix(wireframe_path.filename().string(), kWireframeSuffix);
  if (id.empty()) return std::nullopt;
  const auto p = wireframe_path.parent_path() / (id + kHeatmapSuffix);
  if (!fs::exists(p)) return std::nullopt;
  return read_wfhm(p);
}

inline std::vector<std::string> list_ids(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorKind::kIo, dir.string() + " is not a directory");
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto id = strip_suffix(entry.path().filename().string(), kWireframeSuffix);
    if (!id.empty()) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline json eval_report(const std::vector<json>& samples, double iou_threshold) {
  json report;
  report["iou_threshold"] = iou_threshold;
  report["aggregate"] = aggregate(samples);
  report["samples"] = samples;
  return report;
}

// --- commands ------------------------------------------------------------------

inline PipelineConfig load_config(const std::string& path) {
  return path.empty() ? PipelineConfig{} : config_from_json(read_json_file(path));
}

struct GenArgs {
  std::string config, out;
  std::uint64_t seed = 0;
  int count = 1;
  std::string grid = "2x2";
  int jobs = 1;
  bool encode = false;
};

inline void write_gt_files(const fs::path& dir, const std::string& id, const Sample& s, bool encode_too,
                           const WireframeDocument& doc) {
  write_json_file(dir / (id + kSceneSuffix), scene_to_json(s.scene));
  write_wireframe(dir / (id + kWireframeSuffix), doc);
  if (encode_too) write_wfhm(dir / (id + kHeatmapSuffix), encode(doc.wireframe, *doc.vps));
}

inline int cmd_gen(const PipelineConfig& cfg, const GenArgs& a) {
  std::atomic<int> failures{0};
  parallel_for(cfg.count, a.jobs, [&](int i) {
    const auto id = sample_id(i);
    try {
      const auto s = generate_sample(cfg, i);
      write_gt_files(a.out, id, s, a.encode, gt_document(s.gt));
      logger().info("generated", {{"sample", id},
                                  {"seed", s.seed},
                                  {"vertices", s.gt.wireframe.vertices.size()},
                                  {"edges", s.gt.wireframe.edges.size()}});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kIo) throw;
      ++failures;
      logger().error("generation_failed", {{"sample", id}, {"message", e.what()}});
    }
  });
  return failures ? kValidation : kOk;
}

inline int cmd_encode(const std::string& in, const std::string& out) {
  const auto doc = read_wireframe(in);
  if (!doc.vps) fail(ErrorKind::kInvalidArgument, in + ": wireframe has no \"vps\"");
  write_wfhm(out, encode(doc.wireframe, *doc.vps));
  logger().info("encoded", {{"in", in}, {"out", out}});
  return kOk;
}

inline int cmd_loss(const PipelineConfig& cfg, const std::string& pred, const std::string& gt,
                    const std::string& out) {
  const auto b = loss::total_loss(read_wfhm(pred), read_wfhm(gt), cfg.loss);
  const json j = {{"junction", b.junction}, {"offset", b.offset}, {"edge", b.edge},
                  {"depth", b.depth},       {"vp", b.vp},         {"total", b.total}};
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(out, j);
  }
  return kOk;
}

inline int cmd_vectorize(const VectorizeParams& params, const std::string& in, const std::string& out) {
  const auto hm = read_wfhm(in);
  const auto r = vectorize_full(hm, params);
  write_wireframe(out, vectorized_document(r, hm.vps));
  logger().info("vectorized", {{"in", in},
                               {"vertices", r.wireframe.vertices.size()},
                               {"edges", r.wireframe.edges.size()},
                               {"t_attachments", r.attachments.size()}});
  return kOk;
}

struct LiftArgs {
  std::string in, out, heatmaps, camera;
};

inline int cmd_lift(const PipelineConfig& cfg, const LiftArgs& a) {
  auto doc = read_wireframe(a.in);
  if (!a.heatmaps.empty()) doc.vps = read_wfhm(a.heatmaps).vps;
  std::optional<CameraModel> cam;
  if (!a.camera.empty()) cam = camera_from_json(read_json_file(a.camera));
  const auto r = lift_document(doc, cfg.lift, cam);
  json j = wireframe_to_json(doc);
  j["lift"] = lift_summary(r);
  write_json_file(a.out, j);
  logger().info("lifted", {{"in", a.in}, {"objective", r.solution.objective},
                           {"iterations", r.solution.iterations}});
  return kOk;
}

inline int cmd_eval(const PipelineConfig& cfg, const std::string& pred, const std::string& gt,
                    const std::string& out, int jobs) {
  std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> pairs;
  if (fs::is_regular_file(gt)) {
    if (!fs::is_regular_file(pred)) fail(ErrorKind::kIo, pred + " is not a file");
    const auto id = strip_suffix(fs::path(gt).filename().string(), kWireframeSuffix);
    pairs.push_back({id.empty() ? fs::path(gt).stem().string() : id, {pred, gt}});
  } else {
    for (const auto& id : list_ids(gt)) {
      pairs.push_back({id, {fs::path(pred) / (id + kWireframeSuffix), fs::path(gt) / (id + kWireframeSuffix)}});
    }
  }
  std::vector<json> samples(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), jobs, [&](int i) {
    const auto& [id, paths] = pairs[i];
    json rec;
    rec["id"] = id;
    try {
      if (!fs::exists(paths.first)) fail(ErrorKind::kIo, "missing prediction " + paths.first.string());
      EvalInput in{read_wireframe(paths.first), sibling_heatmaps(paths.first),
                   read_wireframe(paths.second), sibling_heatmaps(paths.second)};
      rec.update(evaluate_sample(in, cfg.iou_threshold));
    } catch (const Error& e) {
      rec["error"] = e.what();
      logger().error("eval_failed", {{"sample", id}, {"message", e.what()}});
    }
    samples[i] = std::move(rec);
  });
  write_json_file(out, eval_report(samples, cfg.iou_threshold));
  logger().info("evaluated", {{"samples", samples.size()}, {"out", out}});
  return kOk;
}

/// gen, encode, vectorize, lift and eval for one sample; files go under
/// out/gt and out/pred.
inline json pipeline_sample(const PipelineConfig& cfg, int index, const fs::path& out) {
  const auto id = sample_id(index);
  json rec;
  rec["id"] = id;
  try {
    const auto s = generate_sample(cfg, index);
    rec["seed"] = s.seed;
    const auto gt_doc = gt_document(s.gt);
    write_gt_files(out / "gt", id, s, false, gt_doc);
    const auto hm = encode(gt_doc.wireframe, *gt_doc.vps);
    write_wfhm(out / "gt" / (id + kHeatmapSuffix), hm);

    const auto vr = vectorize_full(hm, cfg.pipeline_vectorize);
    auto pred = vectorized_document(vr, hm.vps);
    json jpred;
    try {
      const auto lr = lift_document(pred, cfg.lift, std::nullopt);
      jpred = wireframe_to_json(pred);
      jpred["lift"] = lift_summary(lr);
      rec["lift_objective"] = lr.solution.objective;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kIo) throw;
      rec["lift_error"] = e.what();
      jpred = wireframe_to_json(pred);
    }
    write_json_file(out / "pred" / (id + kWireframeSuffix), jpred);
    rec.update(evaluate_sample({pred, std::nullopt, gt_doc, hm}, cfg.iou_threshold));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    rec["error"] = e.what();
    logger().error("sample_failed", {{"sample", id}, {"message", e.what()}});
    return rec;
  }
  logger().info("sample_done", {{"sample", id}});
  return rec;
}

inline int cmd_pipeline(const PipelineConfig& cfg, const std::string& out, int jobs) {
  std::vector<json> samples(static_cast<size_t>(cfg.count));
  parallel_for(cfg.count, jobs, [&](int i) { samples[i] = pipeline_sample(cfg, i, out); });
  json report = eval_report(samples, cfg.iou_threshold);
  report["config"] = config_to_json(cfg);
  write_json_file(fs::path(out) / "report.json", report);
  logger().info("pipeline_done", {{"samples", samples.size()}, {"out", out}});
  return kOk;
}

// --- entry point ---------------------------------------------------------------

inline int run(int argc, const char* const* argv) {
  CLI::App app{"Manhattan wireframe reconstruction from 2.5D heatmaps", "wf3d"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log errors");

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Pipeline config JSON");
  };

  GenArgs g;
  auto* gen = app.add_subcommand("gen", "Sample synthetic scenes and their ground truth");
  add_config(gen);
  auto* gen_seed = gen->add_option("--seed", g.seed, "Base seed");
  auto* gen_count = gen->add_option("--count", g.count, "Number of samples")->check(CLI::NonNegativeNumber);
  auto* gen_grid = gen->add_option("--grid", g.grid, "Block grid RxC");
  gen->add_option("--out", g.out, "Output directory")->required();
  gen->add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  gen->add_flag("--encode", g.encode, "Also write heatmap bundles");

  std::string enc_in, enc_out;
  auto* enc = app.add_subcommand("encode", "Encode a wireframe into a heatmap bundle");
  enc->add_option("--wireframe", enc_in, "Wireframe JSON with depths and vps")->required();
  enc->add_option("--out", enc_out, "Output .wfhm")->required();

  std::string loss_pred, loss_gt, loss_out;
  auto* lossc = app.add_subcommand("loss", "Training losses between two heatmap bundles");
  add_config(lossc);
  lossc->add_option("--pred", loss_pred, "Predicted .wfhm")->required();
  lossc->add_option("--gt", loss_gt, "Ground-truth .wfhm")->required();
  lossc->add_option("--out", loss_out, "Output JSON (stdout when omitted)");

  std::string vec_in, vec_out;
  bool vec_gt = false;
  bool vec_no_nms = false;
  double theta_c = 0, theta_t = 0, theta_e = 0;
  auto* vec = app.add_subcommand("vectorize", "Heatmap bundle to 2D wireframe");
  add_config(vec);
  vec->add_option("--in", vec_in, "Input .wfhm")->required();
  vec->add_option("--out", vec_out, "Output wireframe JSON")->required();
  vec->add_flag("--gt-preset", vec_gt, "Parameters for encoded ground truth");
  auto* vec_tc = vec->add_option("--theta-c", theta_c, "C-junction threshold");
  auto* vec_tt = vec->add_option("--theta-t", theta_t, "T-junction threshold");
  auto* vec_te = vec->add_option("--theta-e", theta_e, "Line confidence threshold");
  vec->add_flag("--no-nms", vec_no_nms, "Disable junction non-maximum suppression");

  LiftArgs la;
  double lambda_r = 1.0, reject_deg = 10.0;
  auto* liftc = app.add_subcommand("lift", "Refine depths and lift a wireframe to 3D");
  add_config(liftc);
  liftc->add_option("--in", la.in, "Wireframe JSON")->required();
  liftc->add_option("--out", la.out, "Output wireframe JSON with 3D points")->required();
  liftc->add_option("--heatmaps", la.heatmaps, "Take VPs from this .wfhm");
  liftc->add_option("--camera", la.camera, "Camera JSON (default: calibrate from VPs)");
  auto* lift_lr = liftc->add_option("--lambda-r", lambda_r, "Weight of the depth-prior term");
  auto* lift_rd = liftc->add_option("--reject-deg", reject_deg, "VP assignment rejection angle");

  std::string ev_pred, ev_gt, ev_out;
  int ev_jobs = 1;
  double iou_th = 0.5;
  auto* ev = app.add_subcommand("eval", "Evaluate predictions against ground truth");
  add_config(ev);
  ev->add_option("--pred", ev_pred, "Prediction directory or wireframe JSON")->required();
  ev->add_option("--gt", ev_gt, "Ground-truth directory or wireframe JSON")->required();
  ev->add_option("--out", ev_out, "Report JSON")->required();
  ev->add_option("--jobs", ev_jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* ev_th = ev->add_option("--iou-threshold", iou_th, "Edge-map binarization threshold");

  std::string obj_in, obj_out;
  auto* obj = app.add_subcommand("export-obj", "Write a lifted wireframe as OBJ lines");
  obj->add_option("--in", obj_in, "Lifted wireframe JSON")->required();
  obj->add_option("--out", obj_out, "Output .obj")->required();

  std::string svg_in, svg_out;
  SvgView sv;
  auto* svg = app.add_subcommand("render-svg", "Render a lifted wireframe from a novel view");
  svg->add_option("--in", svg_in, "Lifted wireframe JSON")->required();
  svg->add_option("--out", svg_out, "Output .svg")->required();
  svg->add_option("--azimuth", sv.azimuth_deg, "Orbit azimuth in degrees");
  svg->add_option("--elevation", sv.elevation_deg, "Orbit elevation in degrees");
  svg->add_option("--size", sv.size, "Image size in pixels")->check(CLI::PositiveNumber);

  GenArgs pa;
  auto* pipe = app.add_subcommand("pipeline", "gen, encode, vectorize, lift and eval end to end");
  add_config(pipe);
  auto* pipe_seed = pipe->add_option("--seed", pa.seed, "Base seed");
  auto* pipe_count = pipe->add_option("--count", pa.count, "Number of samples")->check(CLI::NonNegativeNumber);
  auto* pipe_grid = pipe->add_option("--grid", pa.grid, "Block grid RxC");
  pipe->add_option("--out", pa.out, "Output directory")->required();
  pipe->add_option("--jobs", pa.jobs, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  logger().set_quiet(quiet);

  try {
    auto cfg = load_config(config_path);
    auto apply_sample_args = [&](CLI::Option* seed, CLI::Option* count, CLI::Option* grid,
                                 const GenArgs& a) {
      if (seed->count()) cfg.seed = a.seed;
      if (count->count()) cfg.count = a.count;
      if (grid->count()) cfg.grid = parse_grid(a.grid);
    };
    if (*gen) {
      apply_sample_args(gen_seed, gen_count, gen_grid, g);
      check_params(cfg.grid, cfg.scene);
      return cmd_gen(cfg, g);
    }
    if (*enc) return cmd_encode(enc_in, enc_out);
    if (*lossc) return cmd_loss(cfg, loss_pred, loss_gt, loss_out);
    if (*vec) {
      auto p = vec_gt ? VectorizeParams::ground_truth() : cfg.vectorize;
      if (vec_tc->count()) p.theta_c = theta_c;
      if (vec_tt->count()) p.theta_t = theta_t;
      if (vec_te->count()) p.theta_e = theta_e;
      if (vec_no_nms) p.nms = false;
      return cmd_vectorize(p, vec_in, vec_out);
    }
    if (*liftc) {
      if (lift_lr->count()) cfg.lift.lambda_r = lambda_r;
      if (lift_rd->count()) cfg.lift.reject_deg = reject_deg;
      return cmd_lift(cfg, la);
    }
    if (*ev) {
      if (ev_th->count()) cfg.iou_threshold = iou_th;
      return cmd_eval(cfg, ev_pred, ev_gt, ev_out, ev_jobs);
    }
    if (*obj) {
      write_file_atomic(obj_out, to_obj(read_wireframe(obj_in)));
      return kOk;
    }
    if (*svg) {
      write_file_atomic(svg_out, to_svg(read_wireframe(svg_in), sv));
      return kOk;
    }
    if (*pipe) {
      apply_sample_args(pipe_seed, pipe_count, pipe_grid, pa);
      check_params(cfg.grid, cfg.scene);
      return cmd_pipeline(cfg, pa.out, pa.jobs);
    }
  } catch (const Error& e) {
    logger().error("failed", {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}});
    return e.kind() == ErrorKind::kIo ? kIoFailure : kValidation;
  } catch (const fs::filesystem_error& e) {
    logger().error("failed", {{"kind", "IoError"}, {"message", e.what()}});
    return kIoFailure;
  } catch (const std::exception& e) {
    logger().error("failed", {{"message", e.what()}});
    return kValidation;
  }
  return kUsage;
}

}  // namespace wf3d::cli
