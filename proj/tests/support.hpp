#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

#include "wf3d/lift.hpp"
#include "wf3d/rng.hpp"
#include "wf3d/synth.hpp"

namespace wf3d::test {

/// First `count` seeds from `first` that generate, cycling the given grids.
inline std::vector<GroundTruth> generic_scenes(int count, std::uint64_t first = 0,
                                               std::vector<GridSize> grids = {{1, 2}, {2, 2}, {2, 3}},
                                               std::vector<std::uint64_t>* seeds = nullptr) {
  std::vector<GroundTruth> out;
  const auto params = SceneParams::generic();
  for (std::uint64_t s = first; static_cast<int>(out.size()) < count; ++s) {
    try {
      out.push_back(project_gt(generate(s, grids[out.size() % grids.size()], params)));
      if (seeds) seeds->push_back(s);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kGenerationFailed) throw;
    }
  }
  return out;
}

struct Matching {
  std::vector<int> gt_to_pred;  // -1 when unmatched
  int matched = 0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Greedy one-to-one matching of same-type vertices by ascending distance.
inline Matching match_vertices(const Wireframe& gt, const Wireframe& pred, double tol) {
  struct Pair {
    double d;
    int g;
    int p;
  };
  std::vector<Pair> pairs;
  for (int g = 0; g < static_cast<int>(gt.vertices.size()); ++g) {
    for (int p = 0; p < static_cast<int>(pred.vertices.size()); ++p) {
      if (gt.vertices[g].type != pred.vertices[p].type) continue;
      const double d = (gt.vertices[g].position - pred.vertices[p].position).norm();
      if (d <= tol) pairs.push_back({d, g, p});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.d, a.g, a.p) < std::tie(b.d, b.g, b.p);
  });
  Matching m;
  m.gt_to_pred.assign(gt.vertices.size(), -1);
  std::vector<bool> used(pred.vertices.size(), false);
  for (const auto& pr : pairs) {
    if (m.gt_to_pred[pr.g] >= 0 || used[pr.p]) continue;
    m.gt_to_pred[pr.g] = pr.p;
    used[pr.p] = true;
    ++m.matched;
  }
  m.precision = pred.vertices.empty() ? 1.0 : static_cast<double>(m.matched) / pred.vertices.size();
  m.recall = gt.vertices.empty() ? 1.0 : static_cast<double>(m.matched) / gt.vertices.size();
  return m;
}

/// True when every vertex matches within tol and the edge sets agree under the matching.
inline bool isomorphic(const Wireframe& gt, const Wireframe& pred, double tol) {
  const auto m = match_vertices(gt, pred, tol);
  if (m.precision != 1.0 || m.recall != 1.0) return false;
  std::set<Edge> mapped;
  for (const auto& e : gt.edges) mapped.insert(Edge::make(m.gt_to_pred[e.a], m.gt_to_pred[e.b]));
  const std::set<Edge> got(pred.edges.begin(), pred.edges.end());
  return mapped == got;
}

/// Refinement problem with exact VPs, true axes and z~ = true depths.
inline LiftProblem lift_problem(const GroundTruth& gt, double lambda_r = 1.0) {
  LiftProblem p;
  p.wireframe = gt.wireframe;
  p.camera = gt.camera;
  p.vps = gt.vps;
  p.assignment = gt.edge_axis;
  for (const auto& occ : gt.occlusions) p.t_constraints.push_back({occ.t_vertex, occ.foreground, occ.lambda});
  p.lambda_r = lambda_r;
  return p;
}

inline std::vector<double> depths(const Wireframe& wf) {
  std::vector<double> out;
  for (const auto& v : wf.vertices) out.push_back(*v.depth);
  return out;
}

/// Problem on a generated scene with z~ perturbed by exp(N(0, sigma^2)).
inline LiftProblem noisy_problem(const GroundTruth& gt, Rng& rng, double sigma, double lambda_r = 1.0) {
  auto p = lift_problem(gt, lambda_r);
  for (auto& v : p.wireframe.vertices) *v.depth *= std::exp(sigma * rng.normal());
  return p;
}

/// Scale-invariant log error between positive depth vectors.
inline double silog_of(const std::vector<double>& pred, const std::vector<double>& gt) {
  double s = 0.0;
  double s2 = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = std::log(pred[i]) - std::log(gt[i]);
    s += d;
    s2 += d * d;
  }
  const double n = static_cast<double>(pred.size());
  return s2 / n - (s / n) * (s / n);
}

}  // namespace wf3d::test
