#include "flowlab/flow.hpp"

#include <cmath>

#include "flowlab/errors.hpp"

namespace flowlab {

int grid_node_index(const TimeGrid& grid, double t) {
  const auto& nodes = grid.nodes;
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), t - 1e-12);
  if (it == nodes.end() || std::abs(*it - t) > 1e-9)
    throw ConfigError("time does not match a grid node");
  return static_cast<int>(it - nodes.begin());
}

static bool is_structured_singular(const DriftField& drift) {
  return drift.kind == DriftKind::counterexample_f || drift.kind == DriftKind::counterexample_h;
}

static void require_graded_for(const DriftField& drift, const TimeGrid& grid) {
  if (drift.singular_times.empty()) return;
  const double s = drift.singular_times.front();
  if (s > grid.T() + 1e-12) return; // singularity beyond the integration window
  const bool graded = grid.singular_point.has_value() &&
                      std::abs(*grid.singular_point - s) < 1e-9 && grid.grading_exponent > 1.0;
  if (!graded)
    throw ConfigError("integrate_flow: drift declares a singular time but the grid is not graded toward it");
}

std::vector<Vec> integrate_flow_from(const DriftField& drift, const BrownianPath& path,
                                     const Vec& x, int k_start) {
  require_graded_for(drift, path.grid);
  if (path.dim != drift.dim) throw ConfigError("integrate_flow: path/drift dimension mismatch");
  const auto& nodes = path.grid.nodes;
  const int n = path.grid.n();
  std::vector<Vec> states;
  states.reserve(static_cast<std::size_t>(n - k_start) + 1);
  Vec cur = x;
  states.push_back(cur);
  if (is_structured_singular(drift)) {
    const TimeProfile profile = profile_from_drift(drift);
    const double x_abscissa = cur[0] - path.value(k_start, 0); // initial x-coordinate
    for (int k = k_start; k < n; ++k) {
      const double w = profile.segment_integral(nodes[k], nodes[k + 1]);
      Vec next = cur;
      next[0] += path.value(k + 1, 0) - path.value(k, 0);
      next[1] += w * eval_g(x_abscissa + path.value(k, 0), drift.alpha) +
                 (path.value(k + 1, 1) - path.value(k, 1));
      cur = next;
      states.push_back(cur);
    }
    return states;
  }
  for (int k = k_start; k < n; ++k) {
    const double dt = nodes[k + 1] - nodes[k];
    const Vec b = drift.eval(nodes[k], cur);
    Vec next = cur;
    for (int j = 0; j < drift.dim; ++j)
      next[j] += b[j] * dt + (path.value(k + 1, j) - path.value(k, j));
    cur = next;
    states.push_back(cur);
  }
  return states;
}

FlowTrajectory integrate_flow(const DriftField& drift, const BrownianPath& path, const Vec& x0) {
  FlowTrajectory traj;
  traj.grid = path.grid;
  traj.dim = drift.dim;
  traj.start = x0;
  traj.driving_seed = path.seed;
  const auto states = integrate_flow_from(drift, path, x0, 0);
  traj.states.resize(states.size() * static_cast<std::size_t>(drift.dim));
  for (std::size_t k = 0; k < states.size(); ++k)
    for (int j = 0; j < drift.dim; ++j) traj.states[k * drift.dim + j] = states[k][j];
  return traj;
}

Vec closed_form_flow(const DriftField& drift, const BrownianPath& path, const Vec& xy, double t) {
  if (!is_structured_singular(drift)) throw ConfigError("closed_form_flow: structured d=2 drift required");
  const TimeProfile profile = profile_from_drift(drift);
  const int node = grid_node_index(path.grid, t);
  const auto g = [&](double v) { return eval_g(v, drift.alpha); };
  Vec out(2);
  out[0] = xy[0] + path.value(node, 0);
  out[1] = xy[1] + path.value(node, 1) + singular_time_integral(path, profile, g, xy[0], t);
  return out;
}

Vec closed_form_inverse(const DriftField& drift, const BrownianPath& path, const Vec& xy, double t) {
  if (!is_structured_singular(drift)) throw ConfigError("closed_form_inverse: structured d=2 drift required");
  const TimeProfile profile = profile_from_drift(drift);
  const int node = grid_node_index(path.grid, t);
  const auto g = [&](double v) { return eval_g(v, drift.alpha); };
  const double a = xy[0] - path.value(node, 0);
  Vec out(2);
  out[0] = a;
  out[1] = xy[1] - path.value(node, 1) - singular_time_integral(path, profile, g, a, t);
  return out;
}

double evaluate_solution(const SolutionField& field, const DriftField& drift,
                         const BrownianPath& path, const Vec& x) {
  if (field.t == 0.0) return field.u0(x);
  if (field.method == InverseMethod::closed_form) {
    switch (drift.kind) {
      case DriftKind::zero: {
        const int node = grid_node_index(path.grid, field.t);
        return field.u0(x - path.point(node));
      }
      case DriftKind::constant: {
        const int node = grid_node_index(path.grid, field.t);
        return field.u0(x - path.point(node) - field.t * drift.constant_value);
      }
      case DriftKind::counterexample_f:
      case DriftKind::counterexample_h:
        return field.u0(closed_form_inverse(drift, path, x, field.t));
      default: throw ConfigError("evaluate_solution: no closed-form inverse for this drift kind");
    }
  }
  return field.u0(inverse_flow_numeric(drift, path, x, field.t, 1e-10));
}

} // namespace flowlab
