#pragma once

// JSON interchange for wireframes and cameras, plus atomic file writes.
//
// Wireframe document:
//   {"image_size":[W,H],
//    "vertices":[{"xy":[x,y],"type":"C"|"T","depth":number|null}, ...],
//    "edges":[[i,j], ...],            // sorted lexicographically on write
//    "camera":{...}, "vps":[[..],[..],[..]],        // optional
//    "t_constraints":[[w,a,b,lambda], ...]}          // optional
// Vertices may also carry "score" (detection confidence) and "xyz"
// (camera-space 3D position).

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "wf3d/core.hpp"

namespace wf3d {

using json = nlohmann::json;

struct WireframeDocument {
  Wireframe wireframe;
  std::optional<CameraModel> camera;
  std::optional<VanishingPoints> vps;
  std::vector<TConstraint> t_constraints;
  std::vector<double> scores;  // empty or one per vertex
  std::vector<Vec3> points;    // empty or one per vertex
};

inline json camera_to_json(const CameraModel& cam) {
  return json{{"focal", cam.focal},
              {"principal_point", {cam.principal_point.x(), cam.principal_point.y()}},
              {"image_size", {cam.image_size.width, cam.image_size.height}}};
}

inline CameraModel camera_from_json(const json& j) {
  CameraModel cam;
  try {
    cam.focal = j.at("focal").get<double>();
    const auto& pp = j.at("principal_point");
    cam.principal_point = Vec2(pp.at(0).get<double>(), pp.at(1).get<double>());
    if (j.contains("image_size")) {
      cam.image_size = {j["image_size"].at(0).get<int>(), j["image_size"].at(1).get<int>()};
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("camera JSON: ") + e.what());
  }
  if (!cam.valid()) fail(ErrorKind::kInvalidArgument, "camera focal must be positive");
  return cam;
}

inline json vps_to_json(const VanishingPoints& vps) {
  json arr = json::array();
  for (const auto& v : vps.v) arr.push_back({v.x(), v.y(), v.z()});
  return arr;
}

inline VanishingPoints vps_from_json(const json& j) {
  VanishingPoints vps;
  try {
    for (int i = 0; i < 3; ++i) {
      vps.v[i] = Vec3(j.at(i).at(0).get<double>(), j.at(i).at(1).get<double>(),
                      j.at(i).at(2).get<double>());
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("vps JSON: ") + e.what());
  }
  return vps;
}

inline json wireframe_to_json(const WireframeDocument& doc) {
  Wireframe wf = doc.wireframe;
  wf.canonicalize();
  json verts = json::array();
  for (const auto& v : wf.vertices) {
    json jv;
    jv["xy"] = {v.position.x(), v.position.y()};
    jv["type"] = std::string(1, type_char(v.type));
    jv["depth"] = v.depth ? json(*v.depth) : json(nullptr);
    verts.push_back(std::move(jv));
  }
  if (doc.scores.size() == verts.size()) {
    for (size_t i = 0; i < verts.size(); ++i) verts[i]["score"] = doc.scores[i];
  }
  if (doc.points.size() == verts.size()) {
    for (size_t i = 0; i < verts.size(); ++i) {
      verts[i]["xyz"] = {doc.points[i].x(), doc.points[i].y(), doc.points[i].z()};
    }
  }
  json edges = json::array();
  for (const auto& e : wf.edges) edges.push_back({e.a, e.b});

  json j;
  j["image_size"] = {wf.image_size.width, wf.image_size.height};
  j["vertices"] = std::move(verts);
  j["edges"] = std::move(edges);
  if (doc.camera) j["camera"] = camera_to_json(*doc.camera);
  if (doc.vps) j["vps"] = vps_to_json(*doc.vps);
  if (!doc.t_constraints.empty()) {
    json tc = json::array();
    for (const auto& t : doc.t_constraints) {
      const Edge line = Edge::make(t.line.a, t.line.b);
      const double lambda = line.a == t.line.a ? t.lambda : 1.0 - t.lambda;
      tc.push_back({t.w, line.a, line.b, lambda});
    }
    j["t_constraints"] = std::move(tc);
  }
  return j;
}

inline WireframeDocument wireframe_from_json(const json& j) {
  WireframeDocument doc;
  auto& wf = doc.wireframe;
  try {
    wf.image_size = {j.at("image_size").at(0).get<int>(), j.at("image_size").at(1).get<int>()};
    for (const auto& jv : j.at("vertices")) {
      Vertex v;
      v.position = Vec2(jv.at("xy").at(0).get<double>(), jv.at("xy").at(1).get<double>());
      const auto type = jv.at("type").get<std::string>();
      if (type == "C") {
        v.type = JunctionType::C;
      } else if (type == "T") {
        v.type = JunctionType::T;
      } else {
        fail(ErrorKind::kInvalidArgument, "vertex type must be \"C\" or \"T\"");
      }
      if (jv.contains("depth") && !jv["depth"].is_null()) v.depth = jv["depth"].get<double>();
      if (jv.contains("score")) doc.scores.push_back(jv["score"].get<double>());
      if (jv.contains("xyz")) {
        const auto& x = jv["xyz"];
        doc.points.emplace_back(x.at(0).get<double>(), x.at(1).get<double>(), x.at(2).get<double>());
      }
      wf.vertices.push_back(v);
    }
    if (!doc.scores.empty() && doc.scores.size() != wf.vertices.size()) {
      fail(ErrorKind::kInvalidArgument, "wireframe JSON: score given for some vertices only");
    }
    if (!doc.points.empty() && doc.points.size() != wf.vertices.size()) {
      fail(ErrorKind::kInvalidArgument, "wireframe JSON: xyz given for some vertices only");
    }
    for (const auto& je : j.at("edges")) {
      wf.edges.push_back(Edge::make(je.at(0).get<int>(), je.at(1).get<int>()));
    }
    if (j.contains("t_constraints")) {
      const int n = static_cast<int>(wf.vertices.size());
      for (const auto& jt : j["t_constraints"]) {
        TConstraint t;
        t.w = jt.at(0).get<int>();
        t.line = Edge{jt.at(1).get<int>(), jt.at(2).get<int>()};
        t.lambda = jt.at(3).get<double>();
        for (int i : {t.w, t.line.a, t.line.b}) {
          if (i < 0 || i >= n) fail(ErrorKind::kInvalidArgument, "t_constraints: bad vertex index");
        }
        doc.t_constraints.push_back(t);
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("wireframe JSON: ") + e.what());
  }
  if (j.contains("camera")) doc.camera = camera_from_json(j["camera"]);
  if (j.contains("vps")) doc.vps = vps_from_json(j["vps"]);
  wf.canonicalize();
  return doc;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  static std::atomic<unsigned> counter{0};
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto tmp = path;
  tmp += ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorKind::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorKind::kIo, "cannot rename onto " + path.string());
  }
}

inline json read_json_file(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kInvalidArgument, path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

inline WireframeDocument read_wireframe(const std::filesystem::path& path) {
  return wireframe_from_json(read_json_file(path));
}

inline void write_wireframe(const std::filesystem::path& path, const WireframeDocument& doc) {
  write_json_file(path, wireframe_to_json(doc));
}

}  // namespace wf3d
