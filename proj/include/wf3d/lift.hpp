#pragma once

// Lifting a 2.5D wireframe to 3D: calibration from three orthogonal VPs,
// line-to-VP assignment and the convex depth refinement
//
//   min  sum_i sum_{(u,v) in A_i} |(z_u u' - z_v v') x V_i| + lambda_r sum_v (z_v - alpha zt_v)^2
//   s.t. z_v >= 1,  lambda z_u + (1 - lambda) z_v <= z_w  (per T-junction w on line (u, v))
//
// solved with a log-barrier interior point method on the second-order cone form.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wf3d/core.hpp"
#include "wf3d/errors.hpp"
#include "wf3d/geometry.hpp"
#include "wf3d/rng.hpp"

namespace wf3d {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// --- calibration -------------------------------------------------------------

/// Focal length and principal point from three mutually orthogonal VPs. The
/// principal point is the orthocenter of the VP triangle. With exactly one VP
/// at infinity the principal point falls back to the image center.
inline CameraModel calibrate_from_vps(const VanishingPoints& vps, ImageSize size) {
  std::array<std::optional<Vec2>, 3> p;
  int finite = 0;
  for (int i = 0; i < 3; ++i) {
    p[i] = vp_pixel(vps.v[i]);
    if (p[i]) ++finite;
  }
  CameraModel cam;
  cam.image_size = size;
  if (finite < 2) fail(ErrorKind::kDegenerateVPs, "two or more vanishing points at infinity");

  if (finite == 2) {
    cam.principal_point = Vec2(0.5 * size.width, 0.5 * size.height);
    std::vector<Vec2> q;
    for (const auto& x : p) {
      if (x) q.push_back(*x - cam.principal_point);
    }
    const double f2 = -q[0].dot(q[1]);
    if (!(f2 > 0.0)) fail(ErrorKind::kNegativeFocalSquared, "finite VPs imply focal^2 <= 0");
    cam.focal = std::sqrt(f2);
    return cam;
  }

  const Vec2 a = *p[0];
  const Vec2 b = *p[1];
  const Vec2 c = *p[2];
  const double scale = std::max({(b - a).squaredNorm(), (c - a).squaredNorm(), (c - b).squaredNorm()});
  if (!(std::abs(geom::cross2(b - a, c - a)) > 1e-12 * scale)) {
    fail(ErrorKind::kDegenerateVPs, "vanishing points are collinear");
  }
  // (h - a).(b - c) = 0 and (h - b).(a - c) = 0
  Eigen::Matrix2d m;
  m.row(0) = (b - c).transpose();
  m.row(1) = (a - c).transpose();
  const Eigen::Vector2d rhs(a.dot(b - c), b.dot(a - c));
  const Vec2 h = m.partialPivLu().solve(rhs);

  const double f_ab = -(a - h).dot(b - h);
  const double f_bc = -(b - h).dot(c - h);
  const double f_ac = -(a - h).dot(c - h);
  if (!(f_ab > 0.0) || !(f_bc > 0.0) || !(f_ac > 0.0)) {
    fail(ErrorKind::kNegativeFocalSquared, "VP triangle is not acute");
  }
  const double mean = (f_ab + f_bc + f_ac) / 3.0;
  const double spread = std::max({f_ab, f_bc, f_ac}) - std::min({f_ab, f_bc, f_ac});
  if (spread > 1e-6 * std::max(mean, 1e-12 * scale)) {
    fail(ErrorKind::kNegativeFocalSquared, "inconsistent focal estimates from VP pairs");
  }
  cam.principal_point = h;
  cam.focal = std::sqrt(mean);
  return cam;
}

/// Unit 3D direction K^-1 V of a normalized VP.
inline Vec3 vp_direction(const CameraModel& cam, const Vec3& v) {
  const Vec3 d = cam.K_inv() * v;
  const double n = d.norm();
  if (!(n > 0.0)) fail(ErrorKind::kDegenerateVPs, "vanishing point has no direction");
  return d / n;
}

// --- assignment --------------------------------------------------------------

inline constexpr int kUnassigned = -1;

/// Parallelogram area |(u - V) x (u - w)| for a VP in normalized homogeneous
/// form, together with the angle-based rejection bound |u - V| |u - w| sin(tol).
struct AssignmentScore {
  double area = std::numeric_limits<double>::infinity();
  double bound = 0.0;
};

inline AssignmentScore assignment_score(const Vec2& u, const Vec2& w, const Vec3& vp,
                                        double reject_deg) {
  AssignmentScore s;
  if (!(vp.z() > 0.0)) return s;
  const Vec2 to_vp = u - vp.head<2>() / vp.z();
  const Vec2 d = u - w;
  s.area = std::abs(geom::cross2(to_vp, d));
  s.bound = std::sin(geom::deg2rad(reject_deg)) * to_vp.norm() * d.norm();
  return s;
}

/// Assigns each edge to the VP with the smallest parallelogram area (ties go
/// to the lower index); edges deviating by more than `reject_deg` from the
/// ray towards their best VP stay unassigned.
inline std::vector<int> assign_lines(const Wireframe& wf, const VanishingPoints& vps,
                                     double reject_deg = 10.0) {
  std::vector<int> out;
  out.reserve(wf.edges.size());
  for (const auto& e : wf.edges) {
    const Vec2& u = wf.vertices[e.a].position;
    const Vec2& w = wf.vertices[e.b].position;
    int best = kUnassigned;
    AssignmentScore best_score;
    for (int i = 0; i < 3; ++i) {
      const auto s = assignment_score(u, w, vps.v[i], reject_deg);
      if (s.area < best_score.area) {
        best_score = s;
        best = i;
      }
    }
    if (best != kUnassigned && best_score.area > best_score.bound) best = kUnassigned;
    out.push_back(best);
  }
  return out;
}

// --- refinement --------------------------------------------------------------

struct LiftProblem {
  Wireframe wireframe;  // positions and initial depths
  CameraModel camera;
  VanishingPoints vps;
  std::vector<int> assignment;  // per edge: 0, 1, 2 or kUnassigned
  std::vector<TConstraint> t_constraints;
  double lambda_r = 1.0;
};

struct SolverOptions {
  int restarts = 3;
  std::uint64_t seed = 0;
  // Upper bound z <= z_max_ratio * max(zt) / min(zt). The objective is flat
  // along the scale ray when the alignment term vanishes, and the barrier
  // needs a bounded feasible set; the bound is far from any optimum.
  double z_max_ratio = 1e3;
  double gap_tol = 1e-9;  // barrier gap target, scaled by max(1, objective)
  double mu = 20.0;
  int max_newton = 100;
  int max_outer = 60;
  double restart_rel_tol = 1e-6;
};

struct LiftSolution {
  std::vector<double> depths;
  double alpha = 1.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double restart_spread = 0.0;
};

namespace detail {

// r = z_u a_u - z_v a_v
struct Cone {
  int u = 0;
  int v = 0;
  Vec3 a_u;
  Vec3 a_v;
};

// sum_k coef_k x_k - b >= 0
struct Linear {
  std::vector<std::pair<int, double>> coef;
  double b = 0.0;
};

struct Program {
  int n = 0;  // vertex count; variable n is alpha
  std::vector<Cone> cones;
  std::vector<Linear> lin;
  VecX zt;
  double lambda_r = 1.0;

  int dim() const { return n + 1; }

  Vec3 residual(const Cone& c, const VecX& x) const { return x[c.u] * c.a_u - x[c.v] * c.a_v; }

  double term1(const VecX& x) const {
    double s = 0.0;
    for (const auto& c : cones) s += residual(c, x).norm();
    return s;
  }

  double quad(const VecX& x) const {
    return lambda_r * (x.head(n) - x[n] * zt).squaredNorm();
  }

  double objective(const VecX& x) const { return term1(x) + quad(x); }

  double slack(const Linear& l, const VecX& x) const {
    double s = -l.b;
    for (const auto& [i, a] : l.coef) s += a * x[i];
    return s;
  }

  bool strictly_feasible(const VecX& x) const {
    return std::all_of(lin.begin(), lin.end(), [&](const Linear& l) { return slack(l, x) > 0.0; });
  }
};

inline Program build_program(const LiftProblem& p, double z_max) {
  Program prog;
  const auto& wf = p.wireframe;
  prog.n = static_cast<int>(wf.vertices.size());
  prog.lambda_r = p.lambda_r;
  prog.zt = VecX(prog.n);
  for (int i = 0; i < prog.n; ++i) prog.zt[i] = wf.vertices[i].depth.value_or(1.0);

  std::array<Vec3, 3> dir;
  for (int i = 0; i < 3; ++i) {
    const Vec3 d = p.camera.K_inv() * p.vps.v[i];
    dir[i] = d.norm() > 0.0 ? Vec3(d.normalized()) : Vec3::Zero();
  }
  for (size_t k = 0; k < wf.edges.size(); ++k) {
    const int axis = p.assignment[k];
    if (axis == kUnassigned) continue;
    const Edge& e = wf.edges[k];
    detail::Cone c;
    c.u = e.a;
    c.v = e.b;
    c.a_u = calibrated_ray(p.camera, wf.vertices[e.a].position).cross(dir[axis]);
    c.a_v = calibrated_ray(p.camera, wf.vertices[e.b].position).cross(dir[axis]);
    prog.cones.push_back(c);
  }
  for (int i = 0; i < prog.n; ++i) {
    prog.lin.push_back({{{i, 1.0}}, 1.0});
    prog.lin.push_back({{{i, -1.0}}, -z_max});
  }
  for (const auto& t : p.t_constraints) {
    prog.lin.push_back({{{t.w, 1.0}, {t.line.a, -t.lambda}, {t.line.b, -(1.0 - t.lambda)}}, 0.0});
  }
  return prog;
}

/// Phase I: a strictly feasible z for the linear constraints. Tries depth
/// propagation along T-junction constraints first, then an LP barrier.
inline std::optional<VecX> phase_one(const Program& prog, const LiftProblem& p, VecX x,
                                     double z_max) {
  const int n = prog.n;
  const double margin = 1e-3;
  for (int i = 0; i < n; ++i) x[i] = std::clamp(x[i], 1.0 + margin, 0.5 * z_max);
  for (int sweep = 0; sweep < 4 * n + 4 && !prog.strictly_feasible(x); ++sweep) {
    for (const auto& t : p.t_constraints) {
      const double need = t.lambda * x[t.line.a] + (1.0 - t.lambda) * x[t.line.b];
      if (x[t.w] <= need) x[t.w] = need * (1.0 + margin) + margin;
    }
  }
  if (prog.strictly_feasible(x)) return x;

  // minimize s subject to slack_j(x) + s >= 0, from a strictly feasible (x, s).
  const int m = static_cast<int>(prog.lin.size());
  double s = 1.0;
  for (const auto& l : prog.lin) s = std::max(s, 1.0 - prog.slack(l, x));
  const int d = prog.dim() + 1;
  VecX y(d);
  y.head(prog.dim()) = x;
  y[d - 1] = s;
  auto slack = [&](const Linear& l, const VecX& yy) { return prog.slack(l, yy.head(prog.dim())) + yy[d - 1]; };
  auto value = [&](const VecX& yy, double tau) {
    double v = tau * yy[d - 1];
    for (const auto& l : prog.lin) {
      const double sl = slack(l, yy);
      if (!(sl > 0.0)) return std::numeric_limits<double>::infinity();
      v -= std::log(sl);
    }
    return v;
  };
  for (double tau = 1.0; tau < 1e12; tau *= 20.0) {
    for (int it = 0; it < 100; ++it) {
      VecX g = VecX::Zero(d);
      MatX h = MatX::Zero(d, d);
      g[d - 1] = tau;
      for (const auto& l : prog.lin) {
        const double sl = slack(l, y);
        VecX a = VecX::Zero(d);
        for (const auto& [i, c] : l.coef) a[i] += c;
        a[d - 1] = 1.0;
        g -= a / sl;
        h += a * a.transpose() / (sl * sl);
      }
      h.diagonal().array() += 1e-12;
      const VecX step = -h.ldlt().solve(g);
      const double dec = -g.dot(step);
      if (!(dec > 1e-12)) break;
      double a = 1.0;
      const double f0 = value(y, tau);
      while (a > 1e-12 && !(value(y + a * step, tau) <= f0 - 0.25 * a * dec)) a *= 0.5;
      if (a <= 1e-12) break;
      y += a * step;
      if (y[d - 1] < -margin) {
        VecX out = y.head(prog.dim());
        if (prog.strictly_feasible(out)) return out;
      }
    }
    if (static_cast<double>(m) / tau < 1e-9) break;
  }
  return std::nullopt;
}

struct BarrierResult {
  VecX x;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Barrier method on (x, t) where each cone contributes t_k >= |r_k(x)|; the
/// epigraph variables are eliminated from every Newton system.
inline BarrierResult barrier_solve(const Program& prog, VecX x, const SolverOptions& opt) {
  const int d = prog.dim();
  const int nk = static_cast<int>(prog.cones.size());
  VecX t(nk);
  for (int k = 0; k < nk; ++k) t[k] = 1.5 * prog.residual(prog.cones[k], x).norm() + 1.0;
  const double nu = 2.0 * nk + static_cast<double>(prog.lin.size());

  auto phi = [&](const VecX& xx, const VecX& tt, double tau) {
    double v = tau * (tt.sum() + prog.quad(xx));
    for (int k = 0; k < nk; ++k) {
      if (!(tt[k] > 0.0)) return std::numeric_limits<double>::infinity();
      const double s = tt[k] * tt[k] - prog.residual(prog.cones[k], xx).squaredNorm();
      if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
      v -= std::log(s);
    }
    for (const auto& l : prog.lin) {
      const double s = prog.slack(l, xx);
      if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
      v -= std::log(s);
    }
    return v;
  };

  BarrierResult res;
  // Start where the objective and the barrier carry comparable weight.
  double tau = std::clamp(nu / std::max(prog.objective(x), 1e-12), 1.0, 1e6);
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    bool centered = false;
    for (int it = 0; it < opt.max_newton; ++it) {
      ++res.iterations;
      // Gradient and Hessian in x of everything except the cone blocks' t part.
      VecX gx = VecX::Zero(d);
      MatX hx = MatX::Zero(d, d);
      const int n = prog.n;
      const double lr = prog.lambda_r;
      const VecX diff = x.head(n) - x[n] * prog.zt;
      gx.head(n) += tau * 2.0 * lr * diff;
      gx[n] += tau * -2.0 * lr * prog.zt.dot(diff);
      hx.topLeftCorner(n, n).diagonal().array() += tau * 2.0 * lr;
      hx.block(0, n, n, 1) += tau * -2.0 * lr * prog.zt;
      hx.block(n, 0, 1, n) += tau * -2.0 * lr * prog.zt.transpose();
      hx(n, n) += tau * 2.0 * lr * prog.zt.squaredNorm();
      for (const auto& l : prog.lin) {
        const double s = prog.slack(l, x);
        for (const auto& [i, a] : l.coef) {
          gx[i] -= a / s;
          for (const auto& [j, b] : l.coef) hx(i, j) += a * b / (s * s);
        }
      }
      // Cone blocks; t eliminated by its Schur complement.
      VecX gt(nk);
      VecX dtt(nk);
      std::vector<Vec3> htr(nk);
      for (int k = 0; k < nk; ++k) {
        const auto& c = prog.cones[k];
        const Vec3 r = prog.residual(c, x);
        const double tk = t[k];
        const double s = tk * tk - r.squaredNorm();
        const Vec3 gr = 2.0 * r / s;
        const Eigen::Matrix3d hrr = 2.0 * Eigen::Matrix3d::Identity() / s + 4.0 * r * r.transpose() / (s * s);
        htr[k] = -4.0 * tk * r / (s * s);
        dtt[k] = (2.0 * tk * tk + 2.0 * r.squaredNorm()) / (s * s);
        gt[k] = tau - 2.0 * tk / s;
        // r = A x with A = [a_u at column u, -a_v at column v]
        const Eigen::Matrix3d schur = hrr - htr[k] * htr[k].transpose() / dtt[k];
        const Vec3 gred = gr - htr[k] * (gt[k] / dtt[k]);
        const int idx[2] = {c.u, c.v};
        const Vec3 col[2] = {c.a_u, -c.a_v};
        for (int i = 0; i < 2; ++i) {
          gx[idx[i]] += col[i].dot(gred);
          for (int j = 0; j < 2; ++j) hx(idx[i], idx[j]) += col[i].dot(schur * col[j]);
        }
      }
      hx.diagonal().array() += 1e-14 * (1.0 + hx.diagonal().cwiseAbs().maxCoeff());
      const VecX dx = -hx.ldlt().solve(gx);
      VecX dt(nk);
      for (int k = 0; k < nk; ++k) {
        const auto& c = prog.cones[k];
        const Vec3 dr = dx[c.u] * c.a_u - dx[c.v] * c.a_v;
        dt[k] = -(gt[k] + htr[k].dot(dr)) / dtt[k];
      }
      // Full gradient along the step, for the decrement and Armijo test.
      double slope = 0.0;
      {
        VecX gfull = VecX::Zero(d);
        gfull.head(n) += tau * 2.0 * lr * diff;
        gfull[n] += tau * -2.0 * lr * prog.zt.dot(diff);
        for (const auto& l : prog.lin) {
          const double s = prog.slack(l, x);
          for (const auto& [i, a] : l.coef) gfull[i] -= a / s;
        }
        for (int k = 0; k < nk; ++k) {
          const auto& c = prog.cones[k];
          const Vec3 r = prog.residual(c, x);
          const double s = t[k] * t[k] - r.squaredNorm();
          const Vec3 gr = 2.0 * r / s;
          gfull[c.u] += c.a_u.dot(gr);
          gfull[c.v] -= c.a_v.dot(gr);
        }
        slope = gfull.dot(dx) + gt.dot(dt);
      }
      if (!(slope < 0.0) || -slope < 1e-10) {
        centered = true;
        break;
      }
      const double f0 = phi(x, t, tau);
      double a = 1.0;
      while (a > 1e-14 && !(phi(x + a * dx, t + a * dt, tau) <= f0 + 0.25 * a * slope)) a *= 0.5;
      if (a <= 1e-14) {
        centered = true;  // no further progress possible at this precision
        break;
      }
      x += a * dx;
      t += a * dt;
      const double f1 = phi(x, t, tau);
      if (-slope < 2e-10 || f0 - f1 <= 1e-15 * (1.0 + std::abs(f0))) {
        centered = true;
        break;
      }
    }
    const double f = prog.objective(x);
    if (centered && nu / tau <= opt.gap_tol * std::max(1.0, f)) {
      res.converged = true;
      break;
    }
    tau *= opt.mu;
  }
  res.x = x;
  res.objective = prog.objective(x);
  return res;
}

}  // namespace detail

inline void check_problem(const LiftProblem& p) {
  const auto& wf = p.wireframe;
  const int n = static_cast<int>(wf.vertices.size());
  if (p.assignment.size() != wf.edges.size()) {
    fail(ErrorKind::kInvalidArgument, "assignment must have one entry per edge");
  }
  for (int a : p.assignment) {
    if (a < kUnassigned || a > 2) fail(ErrorKind::kInvalidArgument, "assignment out of range");
  }
  for (const auto& v : wf.vertices) {
    if (!v.depth || !(*v.depth > 0.0)) {
      fail(ErrorKind::kNonPositiveDepth, "initial depths must be positive");
    }
  }
  for (const auto& t : p.t_constraints) {
    if (t.w < 0 || t.w >= n || t.line.a < 0 || t.line.a >= n || t.line.b < 0 || t.line.b >= n) {
      fail(ErrorKind::kInvalidArgument, "T constraint references a missing vertex");
    }
    if (!(t.lambda > 0.0 && t.lambda < 1.0)) {
      fail(ErrorKind::kInvalidArgument, "T constraint lambda must lie in (0, 1)");
    }
  }
  if (!(p.lambda_r >= 0.0) || !std::isfinite(p.lambda_r)) {
    fail(ErrorKind::kInvalidArgument, "lambda_r must be finite and >= 0");
  }
  if (!p.camera.valid()) fail(ErrorKind::kInvalidArgument, "camera is not valid");
}

/// Objective of the refinement program at (z, alpha), measured on the
/// residual norms themselves.
inline double lift_objective(const LiftProblem& p, const std::vector<double>& z, double alpha) {
  const auto prog = detail::build_program(p, std::numeric_limits<double>::infinity());
  VecX x(prog.dim());
  for (int i = 0; i < prog.n; ++i) x[i] = z[i];
  x[prog.n] = alpha;
  return prog.objective(x);
}

/// First (VP-alignment) term of the objective.
inline double alignment_residual(const LiftProblem& p, const std::vector<double>& z) {
  const auto prog = detail::build_program(p, std::numeric_limits<double>::infinity());
  VecX x = VecX::Zero(prog.dim());
  for (int i = 0; i < prog.n; ++i) x[i] = z[i];
  return prog.term1(x);
}

/// Runs the barrier solver from `options.restarts` seeded starting points and
/// returns the best run. Converged means every run reached the gap target
/// and all objectives agree to `restart_rel_tol`.
inline LiftSolution refine_depths(const LiftProblem& problem, const SolverOptions& options = {}) {
  check_problem(problem);
  LiftSolution sol;
  if (problem.wireframe.vertices.empty()) {
    sol.converged = true;
    return sol;
  }
  double zt_min = std::numeric_limits<double>::infinity();
  double zt_max = 0.0;
  for (const auto& v : problem.wireframe.vertices) {
    zt_min = std::min(zt_min, *v.depth);
    zt_max = std::max(zt_max, *v.depth);
  }
  const double z_max = options.z_max_ratio * std::max(zt_max / zt_min, 2.0);
  const auto prog = detail::build_program(problem, z_max);
  const int n = prog.n;

  std::vector<detail::BarrierResult> runs;
  Rng rng(options.seed);
  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    VecX x(prog.dim());
    const double scale = (r == 0 ? 1.1 : rng.uniform(1.1, 3.0)) / zt_min;
    for (int i = 0; i < n; ++i) {
      const double jitter = r == 0 ? 1.0 : std::exp(0.2 * rng.normal());
      x[i] = scale * prog.zt[i] * jitter;
    }
    x[n] = scale;
    const auto start = detail::phase_one(prog, problem, x, z_max);
    if (!start) fail(ErrorKind::kInfeasible, "no strictly feasible depth assignment found");
    runs.push_back(detail::barrier_solve(prog, *start, options));
  }

  // Shrinking (z, alpha) towards min z = 1 keeps feasibility and never raises
  // the objective.
  for (auto& run : runs) {
    const double zmin = run.x.head(n).minCoeff();
    if (zmin > 1.0) {
      const VecX shrunk = run.x / zmin;
      const double f = prog.objective(shrunk);
      if (f <= run.objective) {
        run.x = shrunk;
        run.objective = f;
      }
    }
  }

  size_t best = 0;
  double lo = runs[0].objective;
  double hi = runs[0].objective;
  bool all_converged = true;
  int iterations = 0;
  for (size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].objective < runs[best].objective) best = i;
    lo = std::min(lo, runs[i].objective);
    hi = std::max(hi, runs[i].objective);
    all_converged = all_converged && runs[i].converged;
    iterations += runs[i].iterations;
  }
  sol.restart_spread = hi - lo;
  const double tol = options.restart_rel_tol * std::max(std::abs(lo), 1e-6);
  sol.converged = all_converged && sol.restart_spread <= tol;
  const VecX& x = runs[best].x;
  sol.depths.assign(x.data(), x.data() + n);
  sol.alpha = x[n];
  sol.objective = runs[best].objective;
  sol.iterations = iterations;
  return sol;
}

// --- full lift ---------------------------------------------------------------

struct LiftOptions {
  double lambda_r = 1.0;
  double reject_deg = 10.0;
  SolverOptions solver;
};

struct LiftResult {
  Wireframe wireframe;       // refined depths
  std::vector<Vec3> points;  // camera-space 3D positions
  CameraModel camera;
  std::vector<int> assignment;
  LiftSolution solution;
};

inline LiftResult lift(const Wireframe& wf, const VanishingPoints& vps,
                       const std::vector<TConstraint>& t_constraints,
                       const std::optional<CameraModel>& camera = std::nullopt,
                       const LiftOptions& options = {}) {
  LiftResult out;
  out.camera = camera ? *camera : calibrate_from_vps(vps, wf.image_size);
  out.assignment = assign_lines(wf, vps, options.reject_deg);
  LiftProblem p;
  p.wireframe = wf;
  p.camera = out.camera;
  p.vps = vps;
  p.assignment = out.assignment;
  p.t_constraints = t_constraints;
  p.lambda_r = options.lambda_r;
  out.solution = refine_depths(p, options.solver);
  if (!out.solution.converged) {
    fail(ErrorKind::kNonConvergence, "depth refinement did not reach its tolerance");
  }
  out.wireframe = wf;
  for (size_t i = 0; i < wf.vertices.size(); ++i) {
    out.wireframe.vertices[i].depth = out.solution.depths[i];
    out.points.push_back(back_project(out.camera, out.wireframe.vertices[i]));
  }
  return out;
}

/// T-junction constraints recovered from geometry alone: each T-junction
/// lies inside the nearest edge that does not end at it.
inline std::vector<TConstraint> infer_t_constraints(const Wireframe& wf, double tol_px = 1e-3) {
  std::vector<TConstraint> out;
  for (int w = 0; w < static_cast<int>(wf.vertices.size()); ++w) {
    if (wf.vertices[w].type != JunctionType::T) continue;
    std::optional<TConstraint> best;
    double best_dist = tol_px;
    for (const auto& e : wf.edges) {
      if (e.touches(w)) continue;
      const auto proj = geom::project_to_line(wf.vertices[w].position, wf.vertices[e.a].position,
                                              wf.vertices[e.b].position);
      if (proj.t <= 0.0 || proj.t >= 1.0 || proj.distance > best_dist) continue;
      best_dist = proj.distance;
      best = TConstraint{w, e, 1.0 - proj.t};
    }
    if (best) out.push_back(*best);
  }
  return out;
}

}  // namespace wf3d
