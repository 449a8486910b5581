#pragma once

#include <functional>
#include <vector>

#include "flowlab/paths.hpp"

namespace flowlab {

struct FlowTrajectory {
  TimeGrid grid;
  int dim{1};
  std::vector<double> states; // (n+1) x dim row-major
  Vec start{};
  std::uint64_t driving_seed{0};

  Vec point(int node) const {
    Vec v(dim);
    for (int j = 0; j < dim; ++j) v[j] = states[static_cast<std::size_t>(node) * dim + j];
    return v;
  }
};

// Euler-Maruyama along the path's grid. Structured singular drifts use exact
// closed-form time-segment integrals in place of pointwise f(t_k) evaluation,
// and demand a grid graded toward the declared singular time.
FlowTrajectory integrate_flow(const DriftField& drift, const BrownianPath& path, const Vec& x0);

// same scheme restarted at node k_start from state x; returns states at nodes k_start..n
std::vector<Vec> integrate_flow_from(const DriftField& drift, const BrownianPath& path,
                                     const Vec& x, int k_start);

// exact flow map (x,y) -> (x+B1, y+B2+\int f g(x+B1(s))) for the structured d=2 drift
Vec closed_form_flow(const DriftField& drift, const BrownianPath& path, const Vec& xy, double t);

// exact pathwise inverse: a = x-B1(t), then
// (a, y - B2(t) - \int_0^t f(s) g(a + B1(s)) ds); round-trips with
// closed_form_flow are exact by construction (the integrand is re-anchored at
// the pulled-back abscissa, which is what makes the identity hold path-by-path)
Vec closed_form_inverse(const DriftField& drift, const BrownianPath& path, const Vec& xy, double t);

// damped Newton solve of X(t, x) = y using propagated Jacobians
Vec inverse_flow_numeric(const DriftField& drift, const BrownianPath& path, const Vec& y, double t,
                         double tol);

enum class InverseMethod { closed_form, numeric };

struct SolutionField {
  std::function<double(const Vec&)> u0;
  double t{0.0};
  InverseMethod method{InverseMethod::numeric};
};

// evaluates u(t,x) = u0(X^{-1}(t,x)) along the given driving path
double evaluate_solution(const SolutionField& field, const DriftField& drift,
                         const BrownianPath& path, const Vec& x);

// index of the grid node matching time t (within snap tolerance)
int grid_node_index(const TimeGrid& grid, double t);

} // namespace flowlab
