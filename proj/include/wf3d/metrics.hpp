#pragma once

// Evaluation metrics: length-weighted junction AP, edge-map IoU, SILog at
// ground-truth junctions, VP angular error and focal error.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "wf3d/core.hpp"
#include "wf3d/errors.hpp"
#include "wf3d/geometry.hpp"
#include "wf3d/heatmap.hpp"
#include "wf3d/lift.hpp"
#include "wf3d/loss.hpp"

namespace wf3d::metrics {

inline constexpr std::array<double, 3> kApThresholds = {0.5, 1.0, 2.0};

struct Detection {
  Vec2 position;
  double score = 1.0;
};

struct Target {
  Vec2 position;
  double weight = 1.0;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

namespace detail {

struct PrStep {
  double gain = 0.0;  // target weight credited at this step (0 for a miss)
  double tp = 0.0;
  double precision = 0.0;
};

// Per-detection steps plus the recall denominator. The denominator adds the
// credited weights in claim order, so full coverage gives recall exactly 1.
inline std::pair<std::vector<PrStep>, double> pr_steps(const std::vector<Detection>& dets,
                                                       const std::vector<Target>& targets,
                                                       double threshold) {
  double total = 0.0;
  for (const auto& t : targets) total += t.weight;
  const double fp_weight = targets.empty() ? 1.0 : total / static_cast<double>(targets.size());

  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return dets[a].score > dets[b].score; });

  std::vector<bool> claimed(targets.size(), false);
  std::vector<PrStep> steps;
  double tp = 0.0;
  double fp = 0.0;
  for (size_t i : order) {
    int best = -1;
    double best_d = threshold;
    for (size_t g = 0; g < targets.size(); ++g) {
      if (claimed[g]) continue;
      const double d = (dets[i].position - targets[g].position).norm();
      if (d < best_d || (best < 0 && d == best_d)) {
        best = static_cast<int>(g);
        best_d = d;
      }
    }
    double gain = 0.0;
    if (best >= 0) {
      claimed[best] = true;
      gain = targets[best].weight;
      tp += gain;
    } else {
      fp += fp_weight;
    }
    const double denom = tp + fp;
    steps.push_back({gain, tp, denom > 0.0 ? tp / denom : 0.0});
  }
  double denom = tp;
  for (size_t g = 0; g < targets.size(); ++g) {
    if (!claimed[g]) denom += targets[g].weight;
  }
  return {steps, denom};
}

}  // namespace detail

/// Precision/recall points in descending score order (ties: input order).
/// Each detection claims the nearest unclaimed target within `threshold`;
/// a hit earns the target's weight, a miss costs the mean target weight.
inline std::vector<PrPoint> pr_curve(const std::vector<Detection>& dets,
                                     const std::vector<Target>& targets, double threshold) {
  const auto [steps, total] = detail::pr_steps(dets, targets, threshold);
  std::vector<PrPoint> curve;
  for (const auto& s : steps) curve.push_back({total > 0.0 ? s.tp / total : 0.0, s.precision});
  return curve;
}

/// Area under the PR curve by trapezoids over recall, starting at
/// (0, first precision). nullopt when the targets carry no weight.
inline std::optional<double> average_precision(const std::vector<Detection>& dets,
                                               const std::vector<Target>& targets,
                                               double threshold) {
  const auto [steps, total] = detail::pr_steps(dets, targets, threshold);
  if (!(total > 0.0)) return std::nullopt;
  if (steps.empty()) return 0.0;
  double area = 0.0;
  double prev = steps.front().precision;
  for (const auto& s : steps) {
    area += s.gain * 0.5 * (s.precision + prev);
    prev = s.precision;
  }
  return area / total;
}

/// Mean AP over the thresholds 0.5, 1 and 2 px.
inline std::optional<double> mean_average_precision(const std::vector<Detection>& dets,
                                                    const std::vector<Target>& targets) {
  double sum = 0.0;
  for (double th : kApThresholds) {
    const auto ap = average_precision(dets, targets, th);
    if (!ap) return std::nullopt;
    sum += *ap;
  }
  return sum / static_cast<double>(kApThresholds.size());
}

/// Junction targets of one type, weighted by incident line length (or 1).
inline std::vector<Target> junction_targets(const Wireframe& gt, JunctionType type, bool weighted) {
  const auto w = gt.incident_lengths();
  std::vector<Target> out;
  for (size_t i = 0; i < gt.vertices.size(); ++i) {
    if (gt.vertices[i].type != type) continue;
    out.push_back({gt.vertices[i].position, weighted ? w[i] : 1.0});
  }
  return out;
}

inline std::vector<Detection> junction_detections(const Wireframe& pred,
                                                  const std::vector<double>& scores,
                                                  JunctionType type) {
  std::vector<Detection> out;
  for (size_t i = 0; i < pred.vertices.size(); ++i) {
    if (pred.vertices[i].type != type) continue;
    out.push_back({pred.vertices[i].position, i < scores.size() ? scores[i] : 1.0});
  }
  return out;
}

inline std::optional<double> junction_map(const Wireframe& pred, const std::vector<double>& scores,
                                          const Wireframe& gt, JunctionType type,
                                          bool weighted = true) {
  return mean_average_precision(junction_detections(pred, scores, type),
                                junction_targets(gt, type, weighted));
}

/// IoU of the two maps binarized at `threshold` (value >= threshold is on).
/// Two empty maps score 1.
inline double edge_iou(const Grid& pred, const Grid& gt, double threshold = 0.5) {
  if (!pred.same_shape(gt)) fail(ErrorKind::kShapeMismatch, "edge maps differ in shape");
  size_t inter = 0;
  size_t uni = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const bool a = pred.data()[i] >= threshold;
    const bool b = gt.data()[i] >= threshold;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct VpErrors {
  std::array<double, 3> deg = {0.0, 0.0, 0.0};
  double mean = 0.0;
  bool failure = false;  // some error above 8 degrees
};

inline constexpr double kVpFailureDeg = 8.0;

/// Angle between the undirected 3D directions K^-1 V.
inline double direction_angle_deg(const Vec3& a, const Vec3& b) {
  const double c = std::abs(a.normalized().dot(b.normalized()));
  const double s = a.normalized().cross(b.normalized()).norm();
  return geom::rad2deg(std::atan2(s, c));
}

/// Per-axis angular errors; the two horizontal VPs are matched in the order
/// that gives the smaller total error.
inline VpErrors vp_errors(const VanishingPoints& pred, const VanishingPoints& gt,
                          const CameraModel& cam) {
  std::array<Vec3, 3> p;
  std::array<Vec3, 3> g;
  for (int i = 0; i < 3; ++i) {
    p[i] = vp_direction(cam, pred.v[i]);
    g[i] = vp_direction(cam, gt.v[i]);
  }
  VpErrors out;
  const double straight0 = direction_angle_deg(p[0], g[0]);
  const double straight1 = direction_angle_deg(p[1], g[1]);
  const double swapped0 = direction_angle_deg(p[1], g[0]);
  const double swapped1 = direction_angle_deg(p[0], g[1]);
  if (swapped0 + swapped1 < straight0 + straight1) {
    out.deg = {swapped0, swapped1, 0.0};
  } else {
    out.deg = {straight0, straight1, 0.0};
  }
  out.deg[2] = direction_angle_deg(p[2], g[2]);
  out.mean = (out.deg[0] + out.deg[1] + out.deg[2]) / 3.0;
  out.failure = *std::max_element(out.deg.begin(), out.deg.end()) > kVpFailureDeg;
  return out;
}

inline double focal_rel_err(const CameraModel& pred, const CameraModel& gt) {
  return std::abs(pred.focal - gt.focal) / gt.focal;
}

/// SILog over one pooled set of depth pairs.
inline double silog_eval(const std::vector<double>& pred, const std::vector<double>& gt) {
  if (pred.size() != gt.size()) fail(ErrorKind::kShapeMismatch, "depth lists differ in length");
  if (pred.empty()) fail(ErrorKind::kEmptyMatch, "no depth pairs to evaluate");
  std::vector<double> diff;
  diff.reserve(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    if (!(pred[i] > 0.0) || !(gt[i] > 0.0)) fail(ErrorKind::kNonPositiveDepth, "depth must be positive");
    diff.push_back(std::log(pred[i]) - std::log(gt[i]));
  }
  return loss::silog(diff);
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace wf3d::metrics
