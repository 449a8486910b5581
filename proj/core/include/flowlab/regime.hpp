#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "flowlab/linalg.hpp"

namespace flowlab {

enum class RegimeLabel { strong_existence, indeterminate, non_existence };

std::string to_string(RegimeLabel label);

struct RegimeClassification {
  RegimeLabel label;
  double two_over_q;
  double threshold_low;  // = alpha
  double threshold_high; // = alpha + 1
};

// strict-inequality classification; q may be +infinity (2/q = 0)
RegimeClassification classify_regime(double q, double alpha, int d);

// piecewise power profile: 0 for x<=0, x^alpha on (0,1), 1 for x>=1
double eval_g(double x, double alpha);
// its derivative, with the kink convention g'(0)=g'(1)=0
double eval_g_prime(double x, double alpha);
// time profile singular at t1: (t1-t)^{-(alpha+1)/2-eps} on [0,t1), 0 after;
// returns +infinity at t=t1 exactly (callers must reject the sentinel)
double eval_f(double t, double t1, double alpha, double eps);
// mirrored profile singular at t=0: t^{-(alpha+1)/2-eps} on (0,T], 0 beyond T
double eval_h(double t, double alpha, double eps, double T);

enum class DriftKind { zero, constant, smooth_bump, counterexample_f, counterexample_h, linear };

// time-space vector field with declared (q, alpha) regularity metadata.
// Structured kinds get exact handling (closed-form time integrals,
// analytic spatial gradients) in the flow and calculus modules.
struct DriftField {
  DriftKind kind{DriftKind::zero};
  int dim{1};
  double T{1.0};

  // piecewise-power drift parameters (counterexample kinds)
  double alpha{0.5};
  double eps{0.05};
  double t1{0.5};

  Vec constant_value{};   // kind == constant
  double amplitude{1.0};  // kind == smooth_bump
  Mat linear_matrix{};    // kind == linear

  double q_exponent{std::numeric_limits<double>::infinity()};
  std::vector<double> singular_times{};

  Vec eval(double t, const Vec& x) const;
  // spatial Jacobian of the field at (t, x)
  Mat jacobian(double t, const Vec& x) const;
  bool has_divergence() const;
  double divergence(double t, const Vec& x) const;
  // envelope sup_x |b(t, x)|
  double sup_abs(double t) const;
};

DriftField make_zero_drift(int dim, double T);
DriftField make_constant_drift(const Vec& c, double T);
// b_i(x) = amplitude * bump(x_{(i+1) mod d}); divergence-free for d >= 2
DriftField make_smooth_bump_drift(int dim, double amplitude, double T);
// d=2 field (0, f(t) g(x)) with f singular at t1; divergence-free
DriftField make_counterexample_drift(double alpha, double eps, double t1, double T);
// same spatial structure with the time profile singular at t=0
DriftField make_counterexample_h_drift(double alpha, double eps, double T);
DriftField make_linear_drift(const Mat& A, double T);

// C-infinity bump: exp(1 - 1/(1-s^2)) on |s|<1, else 0; value 1 at s=0
double smooth_bump(double s);
double smooth_bump_prime(double s);

struct QNormResult {
  double value;
  bool diverged;
};

// graded-mesh quadrature of \int_0^T (sup_x |b(t,x)|)^q dt with divergence
// detection across mesh doublings (growth factor > 1.5 flags divergence)
QNormResult drift_q_norm(const DriftField& field, double q, int n_t);

} // namespace flowlab
