#pragma once

// Wireframe data model shared by every stage of the pipeline.
//
// Image coordinates: origin at the top-left corner of the top-left pixel,
// x to the right, y down, continuous sub-pixel positions.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wf3d/errors.hpp"

namespace wf3d {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class JunctionType : std::uint8_t { C = 0, T = 1 };

inline constexpr std::array<JunctionType, 2> kJunctionTypes = {JunctionType::C,
                                                               JunctionType::T};

inline int type_index(JunctionType t) { return static_cast<int>(t); }

inline char type_char(JunctionType t) { return t == JunctionType::C ? 'C' : 'T'; }

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct Vertex {
  Vec2 position = Vec2::Zero();
  JunctionType type = JunctionType::C;
  // Camera-space z in relative units. For T-junctions this is the depth of
  // the occluded (background) line at the junction.
  std::optional<double> depth;
};

/// Undirected edge; constructed through make() so that a <= b.
struct Edge {
  int a = 0;
  int b = 0;

  static Edge make(int i, int j) { return i <= j ? Edge{i, j} : Edge{j, i}; }

  int other(int i) const { return i == a ? b : a; }
  bool touches(int i) const { return a == i || b == i; }

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Wireframe {
  ImageSize image_size;
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;

  int degree(int v) const {
    return static_cast<int>(std::count_if(edges.begin(), edges.end(),
                                          [v](const Edge& e) { return e.touches(v); }));
  }

  std::vector<int> degrees() const {
    std::vector<int> d(vertices.size(), 0);
    for (const auto& e : edges) {
      if (e.a >= 0 && e.a < static_cast<int>(d.size())) ++d[e.a];
      if (e.b != e.a && e.b >= 0 && e.b < static_cast<int>(d.size())) ++d[e.b];
    }
    return d;
  }

  double edge_length(const Edge& e) const {
    return (vertices[e.a].position - vertices[e.b].position).norm();
  }

  /// Sum of the image-space lengths of the lines incident to each vertex.
  std::vector<double> incident_lengths() const {
    std::vector<double> w(vertices.size(), 0.0);
    for (const auto& e : edges) {
      const double len = edge_length(e);
      w[e.a] += len;
      w[e.b] += len;
    }
    return w;
  }

  bool all_depths() const {
    return std::all_of(vertices.begin(), vertices.end(),
                       [](const Vertex& v) { return v.depth.has_value(); });
  }

  /// Edges sorted lexicographically; the serialized form always uses this.
  void canonicalize() {
    for (auto& e : edges) e = Edge::make(e.a, e.b);
    std::sort(edges.begin(), edges.end());
  }
};

/// Depth order at a T-junction w lying on the occluding line (a, b):
/// position(w) = lambda * position(line.a) + (1 - lambda) * position(line.b).
struct TConstraint {
  int w = 0;
  Edge line;
  double lambda = 0.5;

  friend bool operator==(const TConstraint&, const TConstraint&) = default;
};

/// Three vanishing points, each stored as [x, y, 1] / (x^2 + y^2 + 1) with
/// (x, y) the image-space position. v[2] is the vertical one.
struct VanishingPoints {
  std::array<Vec3, 3> v = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
};

struct CameraModel {
  double focal = 1.0;
  Vec2 principal_point = Vec2::Zero();
  ImageSize image_size;

  Mat3 K() const {
    Mat3 k = Mat3::Identity();
    k(0, 0) = focal;
    k(1, 1) = focal;
    k(0, 2) = principal_point.x();
    k(1, 2) = principal_point.y();
    return k;
  }

  Mat3 K_inv() const {
    Mat3 k = Mat3::Identity();
    k(0, 0) = 1.0 / focal;
    k(1, 1) = 1.0 / focal;
    k(0, 2) = -principal_point.x() / focal;
    k(1, 2) = -principal_point.y() / focal;
    return k;
  }

  bool valid() const {
    return std::isfinite(focal) && focal > 0.0 && principal_point.allFinite();
  }
};

/// Bounded homogeneous form of an image-space point.
inline Vec3 normalize_vp(const Vec2& p) {
  const double s = p.squaredNorm() + 1.0;
  return Vec3(p.x(), p.y(), 1.0) / s;
}

/// Same normalization applied to a homogeneous direction h = (a, b, c):
/// c * h / |h|^2. Directions at infinity (c = 0) collapse to zero.
inline Vec3 normalize_vp_homogeneous(const Vec3& h) {
  const double n2 = h.squaredNorm();
  if (n2 == 0.0) return Vec3::Zero();
  return h * (h.z() / n2);
}

/// Image position of a normalized VP, or nullopt when it sits at (or numerically
/// near) infinity: third component below 1e-6 of the planar part.
inline std::optional<Vec2> vp_pixel(const Vec3& v) {
  const double planar = std::max(std::abs(v.x()), std::abs(v.y()));
  if (!(v.z() > 0.0) || v.z() < 1e-6 * planar) return std::nullopt;
  return Vec2(v.x() / v.z(), v.y() / v.z());
}

inline Vec3 calibrated_ray(const CameraModel& cam, const Vec2& p) {
  return Vec3((p.x() - cam.principal_point.x()) / cam.focal,
              (p.y() - cam.principal_point.y()) / cam.focal, 1.0);
}

/// Pinhole projection of a camera-space point (z > 0).
inline Vec2 project(const CameraModel& cam, const Vec3& x) {
  return Vec2(cam.focal * x.x() / x.z() + cam.principal_point.x(),
              cam.focal * x.y() / x.z() + cam.principal_point.y());
}

/// Camera-space 3D position of a vertex with depth.
inline Vec3 back_project(const CameraModel& cam, const Vertex& v) {
  return calibrated_ray(cam, v.position) * v.depth.value_or(0.0);
}

struct Violation {
  std::string rule;
  std::vector<int> indices;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks every structural rule of a wireframe. Empty result means valid.
inline std::vector<Violation> validate(const Wireframe& wf) {
  std::vector<Violation> out;
  const int n = static_cast<int>(wf.vertices.size());
  const double w = wf.image_size.width;
  const double h = wf.image_size.height;

  for (int i = 0; i < n; ++i) {
    const auto& v = wf.vertices[i];
    const auto& p = v.position;
    if (!p.allFinite() || p.x() < 0.0 || p.y() < 0.0 || p.x() >= w || p.y() >= h) {
      out.push_back({"position-range", {i}});
    }
    if (v.depth && !(*v.depth > 0.0 && std::isfinite(*v.depth))) {
      out.push_back({"depth-nonpositive", {i}});
    }
  }

  std::set<Edge> seen;
  std::vector<int> deg(n, 0);
  for (const auto& raw : wf.edges) {
    if (raw.a < 0 || raw.b < 0 || raw.a >= n || raw.b >= n) {
      out.push_back({"edge-index", {raw.a, raw.b}});
      continue;
    }
    if (raw.a == raw.b) {
      out.push_back({"self-loop", {raw.a, raw.b}});
      continue;
    }
    const Edge e = Edge::make(raw.a, raw.b);
    if (!seen.insert(e).second) {
      out.push_back({"duplicate-edge", {e.a, e.b}});
      continue;
    }
    ++deg[e.a];
    ++deg[e.b];
  }

  for (int i = 0; i < n; ++i) {
    if (wf.vertices[i].type == JunctionType::T && deg[i] != 1) {
      out.push_back({"T-degree", {i}});
    }
  }
  return out;
}

}  // namespace wf3d
