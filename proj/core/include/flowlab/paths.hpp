#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "flowlab/regime.hpp"

namespace flowlab {

struct TimeGrid {
  std::vector<double> nodes; // strictly increasing, nodes[0]=0, back()=T
  double grading_exponent{1.0};
  std::optional<double> singular_point{};

  int n() const { return static_cast<int>(nodes.size()) - 1; }
  double T() const { return nodes.back(); }
};

// gamma=1 gives the uniform grid; gamma>1 clusters nodes toward singular_point.
// Interior singular points split the grid proportionally, both halves graded
// toward the singularity.
TimeGrid make_graded_grid(double T, int n, std::optional<double> singular_point, double gamma);

struct BrownianPath {
  TimeGrid grid;
  int dim{1};
  std::vector<double> values; // (n+1) x dim, row-major; values[0,:]=0
  std::uint64_t seed{0};

  double value(int node, int component) const {
    return values[static_cast<std::size_t>(node) * dim + component];
  }
  Vec point(int node) const {
    Vec v(dim);
    for (int j = 0; j < dim; ++j) v[j] = value(node, j);
    return v;
  }
};

// deterministic function of (d, grid, seed); increment k uses counter-keyed draws
BrownianPath sample_brownian(int d, const TimeGrid& grid, std::uint64_t seed);

// fill new nodes of a containing finer grid by Brownian-bridge conditional draws;
// existing node values are kept bit-exactly
BrownianPath refine_bridge(const BrownianPath& path, const TimeGrid& finer);

// time profile with a closed-form segment antiderivative (exact-in-f quadrature)
struct TimeProfile {
  enum class Kind { none, blowup_at_t1, singular_at_origin };
  Kind kind{Kind::none};
  double alpha{0.5};
  double eps{0.05};
  double t1{1.0}; // blowup time (Kind::blowup_at_t1)
  double T{1.0};  // support end (Kind::singular_at_origin)

  double sigma() const { return 0.5 * (alpha + 1.0) + eps; }
  double singular_time() const { return kind == Kind::blowup_at_t1 ? t1 : 0.0; }
  double operator()(double t) const;
  // exact \int_a^b of the profile (clipped to its support)
  double segment_integral(double a, double b) const;
  // exact \int_0^{t1} f = t1^beta / beta with beta = (1-alpha)/2 - eps
  double total_integral_bound() const;
};

TimeProfile profile_from_drift(const DriftField& drift);

// left-endpoint-in-g, exact-in-profile quadrature of \int_0^t profile(s) g(x + B1(s)) ds
double singular_time_integral(const BrownianPath& path, const TimeProfile& profile,
                              const std::function<double(double)>& g_eval, double x, double t);

} // namespace flowlab
