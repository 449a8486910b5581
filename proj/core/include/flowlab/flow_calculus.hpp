#pragma once

#include "flowlab/flow.hpp"

namespace flowlab {

inline constexpr double jacobian_overflow_threshold = 1e15;

struct JacobianPath {
  TimeGrid grid;
  int dim{1};
  std::vector<Mat> matrices; // one per node, matrices[0] = I
  bool overflow{false};      // some entry exceeded the overflow threshold
};

// variational Euler recursion J_{k+1} = (I + grad b(t_k, X_k) dt_k) J_k; the
// structured singular drift accumulates its single off-diagonal entry with
// exact time-segment weights
JacobianPath propagate_jacobian(const DriftField& drift, const FlowTrajectory& traj);

// central differences of integrate_flow over the SAME driving path
Mat finite_difference_jacobian(const DriftField& drift, const BrownianPath& path, const Vec& x,
                               double t, double h);

// max over nodes of |det J_k - exp(\int_0^{t_k} div b along the trajectory)|
double determinant_identity_check(const DriftField& drift, const FlowTrajectory& traj,
                                  const JacobianPath& jac);

// closed-form Jacobian entries of the structured drift:
// forward: \int_0^t f(s) g'(x0 + B1(s)) ds at initial abscissa x0
double counterexample_forward_jacobian_entry(const DriftField& drift, const BrownianPath& path,
                                             double x0, double t);
// inverse (at terminal abscissa x): \int_0^t f(s) g'(x - B1(t) + B1(s)) ds
double counterexample_inverse_jacobian_entry(const DriftField& drift, const BrownianPath& path,
                                             double x, double t);

struct SolutionGradient {
  Vec value{};
  bool overflow{false};
};

// chain rule grad(u0(X^{-1}))(t,x) = grad u0(X^{-1}(t,x)) * grad X^{-1}(t,x)
SolutionGradient solution_gradient(const std::function<Vec(const Vec&)>& u0_grad,
                                   const DriftField& drift, const BrownianPath& path, const Vec& x,
                                   double t, InverseMethod method = InverseMethod::numeric);

} // namespace flowlab
