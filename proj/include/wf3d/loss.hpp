#pragma once

// Reference implementations of the five heatmap training losses.

#include <algorithm>
#include <array>
#include <cmath>

#include "wf3d/errors.hpp"
#include "wf3d/heatmap.hpp"

namespace wf3d::loss {

struct LossWeights {
  double junction = 2.0;
  double offset = 0.25;
  double edge = 3.0;
  double depth = 0.1;
  double vp = 1.0;  // not given in the literature; documented default
};

struct LossBreakdown {
  double junction = 0.0;
  double offset = 0.0;
  double edge = 0.0;
  double depth = 0.0;
  double vp = 0.0;
  double total = 0.0;
};

/// Binary cross entropy with a soft target. Probabilities are clamped to
/// [1e-12, 1 - 1e-12] so saturated predictions stay finite.
inline double cross_entropy(double p, double target) {
  constexpr double kEps = 1e-12;
  p = std::clamp(p, kEps, 1.0 - kEps);
  return -(target * std::log(p) + (1.0 - target) * std::log1p(-p));
}

inline void require_same_shape(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_shape(b)) fail(ErrorKind::kShapeMismatch, what);
}

/// Sum over both types of per-cell cross entropy, divided by the cell count
/// of one heatmap.
inline double junction_loss(const std::array<Grid, 2>& pred, const std::array<Grid, 2>& gt) {
  double sum = 0.0;
  for (int t = 0; t < 2; ++t) {
    require_same_shape(pred[t], gt[t], "junction maps differ in shape");
    for (size_t i = 0; i < pred[t].size(); ++i) {
      sum += cross_entropy(pred[t].data()[i], gt[t].data()[i]);
    }
  }
  return sum / static_cast<double>(gt[0].size());
}

/// Masked squared error, normalized per type by that type's junction count.
/// A type with no ground-truth junctions contributes zero.
inline double offset_loss(const std::array<Grid, 2>& pred_x, const std::array<Grid, 2>& pred_y,
                          const std::array<Grid, 2>& gt_x, const std::array<Grid, 2>& gt_y,
                          const std::array<Grid, 2>& gt_jmap) {
  double total = 0.0;
  for (int t = 0; t < 2; ++t) {
    require_same_shape(pred_x[t], gt_x[t], "offset maps differ in shape");
    require_same_shape(pred_y[t], gt_y[t], "offset maps differ in shape");
    require_same_shape(gt_jmap[t], gt_x[t], "mask differs in shape");
    double num = 0.0;
    double den = 0.0;
    for (size_t i = 0; i < gt_x[t].size(); ++i) {
      const double m = gt_jmap[t].data()[i];
      if (m == 0.0) continue;
      const double dx = static_cast<double>(pred_x[t].data()[i]) - gt_x[t].data()[i];
      const double dy = static_cast<double>(pred_y[t].data()[i]) - gt_y[t].data()[i];
      num += m * (dx * dx + dy * dy);
      den += m;
    }
    if (den > 0.0) total += num / den;
  }
  return total;
}

inline double edge_loss(const Grid& pred, const Grid& gt) {
  require_same_shape(pred, gt, "edge maps differ in shape");
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) sum += cross_entropy(pred.data()[i], gt.data()[i]);
  return sum / static_cast<double>(gt.size());
}

/// Scale-invariant log error of one pooled set of log differences.
inline double silog(const std::vector<double>& log_diff) {
  if (log_diff.empty()) return 0.0;
  const double n = static_cast<double>(log_diff.size());
  double s = 0.0;
  double s2 = 0.0;
  for (double d : log_diff) {
    s += d;
    s2 += d * d;
  }
  return std::max(0.0, s2 / n - (s * s) / (n * n));
}

/// SILog per junction type over the ground-truth junction cells, summed.
inline double depth_loss(const std::array<Grid, 2>& pred, const std::array<Grid, 2>& gt,
                         const std::array<Grid, 2>& gt_jmap) {
  double total = 0.0;
  for (int t = 0; t < 2; ++t) {
    require_same_shape(pred[t], gt[t], "depth maps differ in shape");
    require_same_shape(gt_jmap[t], gt[t], "mask differs in shape");
    std::vector<double> diffs;
    for (size_t i = 0; i < gt[t].size(); ++i) {
      if (gt_jmap[t].data()[i] == 0.0f) continue;
      const double p = pred[t].data()[i];
      const double g = gt[t].data()[i];
      if (!(p > 0.0) || !(g > 0.0)) {
        fail(ErrorKind::kNonPositiveDepth, "depth must be positive on junction cells");
      }
      diffs.push_back(std::log(p) - std::log(g));
    }
    total += silog(diffs);
  }
  return total;
}

/// Chamfer distance over the two horizontal VPs plus squared error on the
/// vertical one.
inline double vp_loss(const VanishingPoints& pred, const VanishingPoints& gt) {
  const auto& p = pred.v;
  const auto& g = gt.v;
  return std::min((p[0] - g[0]).norm(), (p[1] - g[0]).norm()) +
         std::min((p[0] - g[1]).norm(), (p[1] - g[1]).norm()) + (p[2] - g[2]).squaredNorm();
}

inline LossBreakdown total_loss(const HeatmapBundle& pred, const HeatmapBundle& gt,
                                const LossWeights& w = {}) {
  LossBreakdown out;
  out.junction = junction_loss(pred.jmap, gt.jmap);
  out.offset = offset_loss(pred.offset_x, pred.offset_y, gt.offset_x, gt.offset_y, gt.jmap);
  out.edge = edge_loss(pred.emap, gt.emap);
  out.depth = depth_loss(pred.jdepth, gt.jdepth, gt.jmap);
  out.vp = vp_loss(pred.vps, gt.vps);
  out.total = w.junction * out.junction + w.offset * out.offset + w.edge * out.edge +
              w.depth * out.depth + w.vp * out.vp;
  return out;
}

}  // namespace wf3d::loss
