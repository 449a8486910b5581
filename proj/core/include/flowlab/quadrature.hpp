#pragma once

#include <functional>
#include <vector>

namespace flowlab {

struct GaussRule {
  std::vector<double> x; // nodes on [-1, 1]
  std::vector<double> w; // weights summing to 2
};

// Gauss-Legendre rule with n points (Newton iteration on Legendre polynomials)
const GaussRule& gauss_legendre(int n);

enum class GradeTo { none, left, right };

// panel edges on [a,b]; gamma > 1 clusters panels toward the graded end
std::vector<double> panel_edges(double a, double b, int panels, GradeTo grade, double gamma);

// composite Gauss quadrature over graded panels
double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                        int points_per_panel, GradeTo grade = GradeTo::none, double gamma = 2.0);

} // namespace flowlab
