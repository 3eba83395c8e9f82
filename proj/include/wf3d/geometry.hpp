#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "wf3d/core.hpp"

namespace wf3d::geom {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Euclidean distance from p to the closed segment [a, b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

struct LineProjection {
  double t = 0.0;         // parameter along a -> b (0 at a, 1 at b)
  double distance = 0.0;  // perpendicular distance to the infinite line
  Vec2 foot = Vec2::Zero();
};

inline LineProjection project_to_line(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  LineProjection out;
  if (len2 == 0.0) {
    out.foot = a;
    out.distance = (p - a).norm();
    return out;
  }
  out.t = (p - a).dot(d) / len2;
  out.foot = a + out.t * d;
  out.distance = (p - out.foot).norm();
  return out;
}

struct SegmentCrossing {
  double t = 0.0;  // along the first segment
  double u = 0.0;  // along the second segment
};

/// Crossing of two segments where both parameters lie strictly inside
/// (margin, 1 - margin). Parallel segments never cross here.
inline std::optional<SegmentCrossing> interior_crossing(const Vec2& a0, const Vec2& a1,
                                                        const Vec2& b0, const Vec2& b1,
                                                        double margin = 1e-9) {
  const Vec2 r = a1 - a0;
  const Vec2 s = b1 - b0;
  const double denom = cross2(r, s);
  const double scale = r.norm() * s.norm();
  if (scale == 0.0 || std::abs(denom) <= 1e-12 * scale) return std::nullopt;
  const Vec2 q = b0 - a0;
  const double t = cross2(q, s) / denom;
  const double u = cross2(q, r) / denom;
  if (t <= margin || t >= 1.0 - margin || u <= margin || u >= 1.0 - margin) return std::nullopt;
  return SegmentCrossing{t, u};
}

/// True when the segments share a point other than a common endpoint: a
/// proper crossing, or a collinear overlap of positive length. Touching
/// (one endpoint lying on the other segment) is not an intersection.
inline bool segments_intersect(const Vec2& a0, const Vec2& a1, const Vec2& b0,
                               const Vec2& b1, double eps = 1e-6) {
  const Vec2 da = a1 - a0;
  const Vec2 db = b1 - b0;
  const double la = da.norm();
  const double lb = db.norm();
  if (la == 0.0 || lb == 0.0) return false;
  // Signed distances of each segment's endpoints to the other's line.
  const double d1 = cross2(da, b0 - a0) / la;
  const double d2 = cross2(da, b1 - a0) / la;
  const double d3 = cross2(db, a0 - b0) / lb;
  const double d4 = cross2(db, a1 - b0) / lb;
  const bool collinear = std::abs(d1) <= eps && std::abs(d2) <= eps;
  if (collinear) {
    const Vec2 dir = da / la;
    const double s0 = 0.0;
    const double s1 = la;
    double t0 = (b0 - a0).dot(dir);
    double t1 = (b1 - a0).dot(dir);
    if (t0 > t1) std::swap(t0, t1);
    const double overlap = std::min(s1, t1) - std::max(s0, t0);
    return overlap > eps;
  }
  const bool straddle_a = (d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps);
  const bool straddle_b = (d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps);
  return straddle_a && straddle_b;
}

/// Angle in degrees between the rays origin->p and origin->q, in [0, 180].
inline double ray_angle_deg(const Vec2& origin, const Vec2& p, const Vec2& q) {
  const Vec2 a = p - origin;
  const Vec2 b = q - origin;
  return rad2deg(std::atan2(std::abs(cross2(a, b)), a.dot(b)));
}

/// Angle in degrees between two undirected directions, in [0, 90].
inline double line_angle_deg(const Vec2& d1, const Vec2& d2) {
  return rad2deg(std::atan2(std::abs(cross2(d1, d2)), std::abs(d1.dot(d2))));
}

}  // namespace wf3d::geom
