#pragma once

namespace flowlab {

// standard normal pdf/cdf
double norm_pdf(double z);
double norm_cdf(double z);

// Gaussian density with variance v at displacement x
double gauss_density(double x, double v);

// upper incomplete gamma integral: \int_a^\infty s^{eps-1} e^{-s} ds, a >= 0,
// evaluated by adaptive-grade quadrature (power-substitution near 0, plain tail)
double upper_incomplete_gamma(double eps, double a);

} // namespace flowlab
