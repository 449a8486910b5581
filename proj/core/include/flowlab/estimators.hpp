#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "flowlab/flow_calculus.hpp"

namespace flowlab {

struct MonteCarloEstimate {
  double mean{0.0};
  double std_error{0.0}; // sample standard deviation / sqrt(n)
  long long n{0};
  std::uint64_t master_seed{0};
  long long censored{0}; // overflow-flagged samples, excluded from the mean
};

// separable initial datum u0(x, y) = u01(x) u02(y): a near-power x-factor with
// derivative exactly x^{eps - 1/p} on (0, R], tapered to 0 on [R, 2R], and a
// plateau bump y-factor (1 on [-2R/3, R/3], supported in (-R, 2R/3))
struct InitialDatum {
  double p_exponent{2.0};
  double eps{0.05};
  double support_radius{0.0}; // R
  std::function<double(double)> u01, u01_prime, u02, u02_prime;

  double u0(double x, double y) const { return u01(x) * u02(y); }
  Vec grad_u0(double x, double y) const {
    return vec2(u01_prime(x) * u02(y), u01(x) * u02_prime(y));
  }
};

InitialDatum build_counterexample_datum(double p, double eps, double R);

enum class SobolevMode {
  chain_rule,        // |grad u(t, z)|^p at terminal points via the chain rule
  product_frobenius  // initial-coordinate product |grad u0(w)|^p (2 + K(w_x)^2)^{p/2}
};

struct SobolevOptions {
  SobolevMode mode{SobolevMode::chain_rule};
  int n_steps{2048};    // driving-path nodes for the pathwise kernel sums
  int gauss_points{8};  // per x-panel
  double x_upper{0.0};  // truncate the x-integration at this abscissa (0 = box edge)
  int y_panels{24};     // tensor quadrature panels when p != 2
  int workers{0};       // 0 = hardware concurrency
};

// E over paths of the delta-truncated integral of |grad u(t, .)|^p over the
// box (the strip |x| < delta, transported by the flow, is excluded); all
// cutoffs are evaluated in a single pass per path
std::vector<MonteCarloEstimate> mc_sobolev_norm_sweep(const InitialDatum& datum,
                                                      const DriftField& drift, double t, double p,
                                                      double box_half_width,
                                                      const std::vector<double>& deltas,
                                                      long long n_paths, std::uint64_t master_seed,
                                                      const SobolevOptions& opts = {});
MonteCarloEstimate mc_sobolev_norm(const InitialDatum& datum, const DriftField& drift, double t,
                                   double p, double box_half_width, double delta_cutoff,
                                   long long n_paths, std::uint64_t master_seed,
                                   const SobolevOptions& opts = {});

// E over paths of sup over (time grid x spatial grid, restricted to the ball
// |X| <= R) of the Frobenius norm of the inverse flow Jacobian, raised to r
MonteCarloEstimate mc_inverse_gradient_moment(const DriftField& drift, double r, double R,
                                              long long n_paths, int grid_x, int t_nodes,
                                              std::uint64_t master_seed, int workers = 0);

// E[ 1_{|B1(t1)| <= R/3} g'(x + B1(t1) - B1(s)) ] by nested Gaussian
// quadrature with a mass substitution absorbing the g' singularity; s = 0 is
// admitted (degenerate outer integral)
double exact_indicator_expectation(double x, double s, double t1, double R, double alpha);
// same expectation with g' replaced by the step kernel 1_{(0,1)}
double exact_indicator_expectation_step(double x, double s, double t1, double R);
// plain Monte Carlo counterpart of exact_indicator_expectation
MonteCarloEstimate mc_indicator_expectation(double x, double s, double t1, double R, double alpha,
                                            long long n, std::uint64_t master_seed,
                                            int workers = 0);

// Phi(x) = x^{-2 eps} * upper incomplete gamma(eps, x^2 / t1)
double incomplete_gamma_shape(double x, double t1, double eps);

struct LowerBoundResult {
  double c{0.0};          // largest c with estimate(x) >= c * Phi(x) for all xs
  double ratio_min{0.0};  // range of estimate(x) / Phi(x)
  double ratio_max{0.0};
  std::vector<double> xs, estimates, std_errors, phis;
};

// time integral int_0^t1 f(s) E[1 g'(x + B1(t1) - B1(s))] ds against the
// shape Phi; n_paths = 0 integrates exact_indicator_expectation with exact-f
// segment weights, n_paths > 0 estimates the integral by Monte Carlo
LowerBoundResult lower_bound_consistency(const std::vector<double>& xs, double t1, double alpha,
                                         double eps, double R, long long n_paths,
                                         std::uint64_t master_seed = 0, int n_time = 48,
                                         int workers = 0);

} // namespace flowlab
