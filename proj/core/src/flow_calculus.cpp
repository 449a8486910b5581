#include "flowlab/flow_calculus.hpp"

#include <cmath>

#include "flowlab/errors.hpp"

namespace flowlab {

static bool is_structured_singular(const DriftField& drift) {
  return drift.kind == DriftKind::counterexample_f || drift.kind == DriftKind::counterexample_h;
}

JacobianPath propagate_jacobian(const DriftField& drift, const FlowTrajectory& traj) {
  JacobianPath jac;
  jac.grid = traj.grid;
  jac.dim = traj.dim;
  const int n = traj.grid.n();
  jac.matrices.reserve(static_cast<std::size_t>(n) + 1);
  Mat J = Mat::identity(traj.dim);
  jac.matrices.push_back(J);
  const auto& nodes = traj.grid.nodes;
  if (is_structured_singular(drift)) {
    const TimeProfile profile = profile_from_drift(drift);
    for (int k = 0; k < n; ++k) {
      const double w = profile.segment_integral(nodes[k], nodes[k + 1]);
      // unit lower-triangular: only the (1,0) entry accumulates
      J(1, 0) += w * eval_g_prime(traj.point(k)[0], drift.alpha);
      if (std::abs(J(1, 0)) > jacobian_overflow_threshold) jac.overflow = true;
      jac.matrices.push_back(J);
    }
    return jac;
  }
  for (int k = 0; k < n; ++k) {
    const double dt = nodes[k + 1] - nodes[k];
    const Mat G = drift.jacobian(nodes[k], traj.point(k));
    J = (Mat::identity(traj.dim) + dt * G) * J;
    for (int i = 0; i < traj.dim * traj.dim; ++i)
      if (std::abs(J.a[i]) > jacobian_overflow_threshold) jac.overflow = true;
    jac.matrices.push_back(J);
  }
  return jac;
}

Mat finite_difference_jacobian(const DriftField& drift, const BrownianPath& path, const Vec& x,
                               double t, double h) {
  if (!(h > 0.0)) throw ConfigError("finite_difference_jacobian: step must be positive");
  const int node = grid_node_index(path.grid, t);
  Mat m(drift.dim);
  for (int j = 0; j < drift.dim; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const auto sp = integrate_flow_from(drift, path, xp, 0);
    const auto sm = integrate_flow_from(drift, path, xm, 0);
    for (int i = 0; i < drift.dim; ++i) m(i, j) = (sp[node][i] - sm[node][i]) / (2.0 * h);
  }
  return m;
}

double determinant_identity_check(const DriftField& drift, const FlowTrajectory& traj,
                                  const JacobianPath& jac) {
  if (!drift.has_divergence()) throw ConfigError("determinant_identity_check: drift lacks divergence");
  const auto& nodes = traj.grid.nodes;
  double max_dev = 0.0;
  double div_integral = 0.0;
  for (std::size_t k = 0; k < jac.matrices.size(); ++k) {
    const double dev = std::abs(jac.matrices[k].det() - std::exp(div_integral));
    max_dev = std::max(max_dev, dev);
    if (k + 1 < jac.matrices.size())
      div_integral += drift.divergence(nodes[k], traj.point(static_cast<int>(k))) * (nodes[k + 1] - nodes[k]);
  }
  return max_dev;
}

double counterexample_forward_jacobian_entry(const DriftField& drift, const BrownianPath& path,
                                             double x0, double t) {
  if (!is_structured_singular(drift))
    throw ConfigError("counterexample_forward_jacobian_entry: structured drift required");
  const TimeProfile profile = profile_from_drift(drift);
  const auto gp = [&](double v) { return eval_g_prime(v, drift.alpha); };
  return singular_time_integral(path, profile, gp, x0, t);
}

double counterexample_inverse_jacobian_entry(const DriftField& drift, const BrownianPath& path,
                                             double x, double t) {
  const int node = grid_node_index(path.grid, t);
  return counterexample_forward_jacobian_entry(drift, path, x - path.value(node, 0), t);
}

Vec inverse_flow_numeric(const DriftField& drift, const BrownianPath& path, const Vec& y, double t,
                         double tol) {
  const int node = grid_node_index(path.grid, t);
  if (node == 0) return y; // identity flow at t=0
  Vec x = y; // initial guess
  const auto residual = [&](const Vec& cand) {
    const auto states = integrate_flow_from(drift, path, cand, 0);
    return states[node] - y;
  };
  Vec r = residual(x);
  for (int it = 0; it < 50; ++it) {
    if (r.norm() <= tol) return x;
    FlowTrajectory traj = integrate_flow(drift, path, x);
    const JacobianPath jac = propagate_jacobian(drift, traj);
    const Mat J = jac.matrices[node];
    const Vec step = J.inverse() * r;
    // damped Newton: halve the step until the residual decreases
    double damp = 1.0;
    bool accepted = false;
    for (int half = 0; half < 6; ++half) {
      Vec cand = x - damp * step;
      Vec rc = residual(cand);
      if (rc.norm() < r.norm()) {
        x = cand;
        r = rc;
        accepted = true;
        break;
      }
      damp *= 0.5;
    }
    if (!accepted) throw NonConvergence("inverse_flow_numeric: damped Newton stalled (near-singular Jacobian)");
  }
  if (r.norm() <= tol) return x;
  throw NonConvergence("inverse_flow_numeric: no convergence within iteration budget");
}

SolutionGradient solution_gradient(const std::function<Vec(const Vec&)>& u0_grad,
                                   const DriftField& drift, const BrownianPath& path, const Vec& x,
                                   double t, InverseMethod method) {
  SolutionGradient out;
  if (t == 0.0) {
    out.value = u0_grad(x);
    return out;
  }
  if (method == InverseMethod::closed_form && is_structured_singular(drift)) {
    const Vec w = closed_form_inverse(drift, path, x, t);
    const double entry = counterexample_inverse_jacobian_entry(drift, path, x[0], t);
    Mat Jinv = Mat::identity(2);
    Jinv(1, 0) = -entry;
    out.overflow = std::abs(entry) > jacobian_overflow_threshold;
    out.value = u0_grad(w) * Jinv;
    return out;
  }
  if (method == InverseMethod::closed_form && drift.kind == DriftKind::zero) {
    const int node = grid_node_index(path.grid, t);
    out.value = u0_grad(x - path.point(node));
    return out;
  }
  const Vec w = inverse_flow_numeric(drift, path, x, t, 1e-10);
  const FlowTrajectory traj = integrate_flow(drift, path, w);
  const JacobianPath jac = propagate_jacobian(drift, traj);
  const int node = grid_node_index(path.grid, t);
  out.overflow = jac.overflow;
  out.value = u0_grad(w) * jac.matrices[node].inverse();
  return out;
}

} // namespace flowlab
