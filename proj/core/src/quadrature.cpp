#include "flowlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace flowlab {

static GaussRule make_gauss_legendre(int n) {
  GaussRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < n; ++i) {
    // initial guess: Chebyshev-like approximation to the i-th root
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      // evaluate P_n(x) and P_{n-1}(x) by recurrence
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule.x[n - 1 - i] = x;
    rule.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: order out of range");
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

std::vector<double> panel_edges(double a, double b, int panels, GradeTo grade, double gamma) {
  if (panels < 1) throw std::invalid_argument("panel_edges: need at least one panel");
  std::vector<double> e(panels + 1);
  const double len = b - a;
  for (int k = 0; k <= panels; ++k) {
    const double u = static_cast<double>(k) / panels;
    double v;
    switch (grade) {
      case GradeTo::left: v = std::pow(u, gamma); break;
      case GradeTo::right: v = 1.0 - std::pow(1.0 - u, gamma); break;
      default: v = u;
    }
    e[k] = a + len * v;
  }
  e.front() = a;
  e.back() = b;
  return e;
}

double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                        int points_per_panel, GradeTo grade, double gamma) {
  const auto edges = panel_edges(a, b, panels, grade, gamma);
  const GaussRule& rule = gauss_legendre(points_per_panel);
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = 0.5 * (edges[k] + edges[k + 1]);
    const double half = 0.5 * (edges[k + 1] - edges[k]);
    if (!(half > 0.0)) continue; // grading can collapse panels to zero width
    double s = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * f(mid + half * rule.x[i]);
    total += half * s;
  }
  return total;
}

} // namespace flowlab
