#include "flowlab/special.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "flowlab/quadrature.hpp"

namespace flowlab {

double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double gauss_density(double x, double v) {
  return std::exp(-0.5 * x * x / v) / std::sqrt(2.0 * std::numbers::pi * v);
}

double upper_incomplete_gamma(double eps, double a) {
  if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("upper_incomplete_gamma: eps must lie in (0,1)");
  if (a < 0.0) throw std::invalid_argument("upper_incomplete_gamma: a must be >= 0");
  double total = 0.0;
  const double knee = 1.0;
  if (a < knee) {
    // substitute v = s^eps so the s^{eps-1} factor becomes a bounded smooth integrand
    const double vlo = std::pow(a, eps);
    const auto fv = [eps](double v) { return std::exp(-std::pow(v, 1.0 / eps)); };
    total += integrate_panels(fv, vlo, 1.0, 16, 12, GradeTo::right, 2.0) / eps;
  }
  const double lo = std::max(a, knee);
  const double hi = lo + 60.0; // e^{-60} tail is far below double noise here
  const auto fs = [eps](double s) { return std::pow(s, eps - 1.0) * std::exp(-s); };
  total += integrate_panels(fs, lo, hi, 24, 12, GradeTo::left, 2.0);
  return total;
}

} // namespace flowlab
