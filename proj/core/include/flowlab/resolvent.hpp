#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "flowlab/paths.hpp"

namespace flowlab {

// axis-aligned box with a uniform mesh per axis (dim 1 or 2)
struct GridBox {
  int dim{1};
  std::array<double, 2> lo{{-1.0, -1.0}};
  std::array<double, 2> hi{{1.0, 1.0}};
  std::array<int, 2> n{{2, 2}}; // node count per axis (>= 2)

  double h(int axis) const { return (hi[axis] - lo[axis]) / (n[axis] - 1); }
  double coord(int axis, int idx) const { return lo[axis] + h(axis) * idx; }
  std::size_t node_count() const {
    return static_cast<std::size_t>(n[0]) * (dim == 2 ? static_cast<std::size_t>(n[1]) : 1);
  }
};

GridBox make_grid_1d(double lo, double hi, int n);
GridBox make_grid_2d(double half_width, int n_per_axis);

// scalar field sampled on a GridBox (index = iy * nx + ix)
struct GridFunction {
  GridBox box;
  double time_label{0.0};
  std::vector<double> values;

  double& at(int ix, int iy = 0) {
    return values[static_cast<std::size_t>(iy) * box.n[0] + ix];
  }
  double at(int ix, int iy = 0) const {
    return values[static_cast<std::size_t>(iy) * box.n[0] + ix];
  }
};

GridFunction make_grid_function(const GridBox& box,
                                const std::function<double(const Vec&)>& f, double time_label = 0.0);

// Gaussian kernel (2 pi r)^{-d/2} exp(-|x|^2 / (2r)); rejects r <= 0
double heat_kernel(double r, const Vec& x);

// symmetric 1d tap vector for spacing h, truncated at radius 6 sqrt(r) and
// normalized to sum exactly 1 (constants are preserved to machine precision);
// raw_mass reports the h-scaled tap sum before normalization
std::vector<double> heat_kernel_taps(double r, double h, double* raw_mass = nullptr);

// true when the truncation radius 6 sqrt(r) exceeds a half-width of the box
// (replicate padding then pollutes an interior neighborhood of the boundary)
bool semigroup_boundary_pollution(const GridBox& box, double r);

// P_r phi by separable discrete convolution with replicate padding;
// sets *boundary_warning when truncation reaches past the box edge
GridFunction semigroup_apply(const GridFunction& phi, double r, bool* boundary_warning = nullptr);

// source f(t, x) = time_factor(t) * spatial(x); time_factor may blow up at
// isolated endpoints (the r-quadrature grades toward r = 0)
struct SeparableSource {
  std::function<double(double)> time_factor; // nullptr means identically 1
  GridFunction spatial;
};

struct ResolventOptions {
  int r_panels{24};
  int gauss_points{6};
  double grade_gamma{2.0}; // panel grading toward r = 0
  double lambda_tail{45.0}; // integrate r over [0, min(T-t, lambda_tail/lambda)]
};

struct ResolventResult {
  GridFunction U;
  bool boundary_warning{false};
};

// U(t,x) = \int_0^{T-t} e^{-lambda r} (P_r f(t+r, .))(x) dr by graded panel
// quadrature; the multi-lambda variant shares every P_r application
ResolventResult resolvent_solve(const SeparableSource& f, double lambda, double T, double t,
                                const ResolventOptions& opts = {});
std::vector<ResolventResult> resolvent_solve_multi(const SeparableSource& f,
                                                   const std::vector<double>& lambdas, double T,
                                                   double t, const ResolventOptions& opts = {});

// max over interior nodes (within |x_i| <= core_half_width) of the
// central-difference gradient magnitude
double max_gradient(const GridFunction& U, double core_half_width);

// backward-equation residual max |dU/dt + (1/2) Lap U - lambda U + f| over
// interior nodes of interior time slices, central differences in t and x;
// the sign convention matches the representation used by resolvent_solve
double pde_residual(const std::vector<GridFunction>& slices, const std::vector<double>& times,
                    const std::function<double(double, const Vec&)>& source, double lambda,
                    double core_half_width);

// list of (lambda, sup |grad U|) for a shared source
std::vector<std::pair<double, double>> gradient_decay_study(const SeparableSource& f,
                                                            const std::vector<double>& lambdas,
                                                            double T, double t,
                                                            double core_half_width,
                                                            const ResolventOptions& opts = {});

// max over axis-aligned grid pairs at dyadic separations s >= min_separation
// of |G(x) - G(y)| / |x - y|^exponent
double holder_seminorm(const GridFunction& G, double exponent, double min_separation = 0.0);

// time-indexed scalar potential on a 1d grid with gamma(t,x) = x + U(t,x);
// tables interpolate cubically in x and linearly in t
struct ZvonkinMap {
  std::vector<double> times; // increasing slice times spanning [0, T]
  GridBox box;               // 1d
  std::vector<std::vector<double>> U;   // one table per slice
  std::vector<std::vector<double>> Ux;  // central-difference d/dx tables
  std::vector<std::vector<double>> Uxx; // central-difference d2/dx2 tables
  double lambda{0.0};
  double sup_gradient{0.0};

  double u(double t, double x) const;
  double ux(double t, double x) const;
  double uxx(double t, double x) const;
  double gamma(double t, double x) const { return x + u(t, x); }
  // Newton inversion of gamma(t, .), residual < 1e-9
  double gamma_inverse(double t, double y) const;
};

// builds derivative tables and validates sup |dU/dx| < 1 (diffeomorphism
// certification level); rejects otherwise
ZvonkinMap zvonkin_transform(std::vector<double> times, const GridBox& box,
                             std::vector<std::vector<double>> U_slices, double lambda);

// fixed point of U = R_lambda[ b (1 + dU/dx) ] on time slices, which makes
// x + U(t,x) absorb the drift: dY = lambda U dt + (1 + dU/dx) dB
ZvonkinMap solve_zvonkin_potential(const DriftField& b, double lambda, double T,
                                   const GridBox& box, int t_slices,
                                   const ResolventOptions& opts = {});

enum class TransformedScheme {
  euler,      // strong order 1/2 against the direct route (state-dependent noise)
  first_order // adds (1/2) Uxx ((dB)^2 - dt); strong order ~1
};

// integrates the transformed SDE with the SAME increments as the direct
// Euler route and returns sup over nodes <= t of |gamma^{-1}(t_k, Y_k) - X_k|
double transformed_sde_step_equivalence(const DriftField& b_smooth, const ZvonkinMap& map,
                                        const BrownianPath& path, double x0, double t,
                                        TransformedScheme scheme = TransformedScheme::first_order);

} // namespace flowlab
