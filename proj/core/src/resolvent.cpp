#include "flowlab/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flowlab/errors.hpp"
#include "flowlab/flow.hpp"
#include "flowlab/quadrature.hpp"

namespace flowlab {

GridBox make_grid_1d(double lo, double hi, int n) {
  if (!(lo < hi) || n < 2) throw ConfigError("make_grid_1d: need lo < hi and n >= 2");
  GridBox box;
  box.dim = 1;
  box.lo = {lo, 0.0};
  box.hi = {hi, 0.0};
  box.n = {n, 1};
  return box;
}

GridBox make_grid_2d(double half_width, int n_per_axis) {
  if (!(half_width > 0.0) || n_per_axis < 2)
    throw ConfigError("make_grid_2d: need half_width > 0 and n >= 2");
  GridBox box;
  box.dim = 2;
  box.lo = {-half_width, -half_width};
  box.hi = {half_width, half_width};
  box.n = {n_per_axis, n_per_axis};
  return box;
}

GridFunction make_grid_function(const GridBox& box, const std::function<double(const Vec&)>& f,
                                double time_label) {
  GridFunction g;
  g.box = box;
  g.time_label = time_label;
  g.values.resize(box.node_count());
  const int ny = box.dim == 2 ? box.n[1] : 1;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < box.n[0]; ++ix) {
      Vec x(box.dim);
      x[0] = box.coord(0, ix);
      if (box.dim == 2) x[1] = box.coord(1, iy);
      g.at(ix, iy) = f(x);
    }
  return g;
}

double heat_kernel(double r, const Vec& x) {
  if (!(r > 0.0)) throw ConfigError("heat_kernel: r must be positive");
  double q = 0.0;
  for (int i = 0; i < x.d; ++i) q += x[i] * x[i];
  return std::pow(2.0 * std::numbers::pi * r, -0.5 * x.d) * std::exp(-q / (2.0 * r));
}

std::vector<double> heat_kernel_taps(double r, double h, double* raw_mass) {
  if (!(r > 0.0) || !(h > 0.0)) throw ConfigError("heat_kernel_taps: need r > 0 and h > 0");
  const int m = std::max(1, static_cast<int>(std::ceil(6.0 * std::sqrt(r) / h)));
  std::vector<double> taps(static_cast<std::size_t>(2 * m + 1));
  double sum = 0.0;
  for (int j = -m; j <= m; ++j) {
    const double v = std::exp(-(j * h) * (j * h) / (2.0 * r));
    taps[static_cast<std::size_t>(j + m)] = v;
    sum += v;
  }
  if (raw_mass) *raw_mass = sum * h / std::sqrt(2.0 * std::numbers::pi * r);
  for (double& v : taps) v /= sum;
  return taps;
}

bool semigroup_boundary_pollution(const GridBox& box, double r) {
  const double radius = 6.0 * std::sqrt(r);
  for (int axis = 0; axis < box.dim; ++axis)
    if (radius > 0.5 * (box.hi[axis] - box.lo[axis])) return true;
  return false;
}

// 1d convolution with replicate padding, output restricted to [out_lo, out_hi]
static void convolve_replicate(const double* in, int n, const std::vector<double>& taps,
                               double* out, int out_lo, int out_hi) {
  const int m = (static_cast<int>(taps.size()) - 1) / 2;
  for (int i = out_lo; i <= out_hi; ++i) {
    double s = 0.0;
    for (int j = -m; j <= m; ++j) {
      const int k = std::clamp(i - j, 0, n - 1);
      s += taps[static_cast<std::size_t>(j + m)] * in[k];
    }
    out[i] = s;
  }
}

GridFunction semigroup_apply(const GridFunction& phi, double r, bool* boundary_warning) {
  if (boundary_warning && semigroup_boundary_pollution(phi.box, r)) *boundary_warning = true;
  const GridBox& box = phi.box;
  GridFunction out = phi;
  if (box.dim == 1) {
    const auto taps = heat_kernel_taps(r, box.h(0));
    convolve_replicate(phi.values.data(), box.n[0], taps, out.values.data(), 0, box.n[0] - 1);
    return out;
  }
  const int nx = box.n[0], ny = box.n[1];
  const auto taps_x = heat_kernel_taps(r, box.h(0));
  std::vector<double> mid(phi.values.size());
  for (int iy = 0; iy < ny; ++iy)
    convolve_replicate(phi.values.data() + static_cast<std::size_t>(iy) * nx, nx, taps_x,
                       mid.data() + static_cast<std::size_t>(iy) * nx, 0, nx - 1);
  const auto taps_y = heat_kernel_taps(r, box.h(1));
  std::vector<double> col_in(static_cast<std::size_t>(ny)), col_out(static_cast<std::size_t>(ny));
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) col_in[static_cast<std::size_t>(iy)] = mid[static_cast<std::size_t>(iy) * nx + ix];
    convolve_replicate(col_in.data(), ny, taps_y, col_out.data(), 0, ny - 1);
    for (int iy = 0; iy < ny; ++iy) out.values[static_cast<std::size_t>(iy) * nx + ix] = col_out[static_cast<std::size_t>(iy)];
  }
  return out;
}

// r-quadrature nodes (r_k, w_k) over [0, r_max], panels graded toward 0
static std::vector<std::pair<double, double>> r_quadrature_nodes(double r_max,
                                                                 const ResolventOptions& opts) {
  std::vector<std::pair<double, double>> nodes;
  if (!(r_max > 0.0)) return nodes;
  const auto edges = panel_edges(0.0, r_max, opts.r_panels, GradeTo::left, opts.grade_gamma);
  const GaussRule& rule = gauss_legendre(opts.gauss_points);
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double mid = 0.5 * (edges[p] + edges[p + 1]);
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    if (!(half > 0.0)) continue; // grading can collapse panels for tiny r_max
    for (std::size_t k = 0; k < rule.x.size(); ++k)
      nodes.emplace_back(mid + half * rule.x[k], half * rule.w[k]);
  }
  return nodes;
}

std::vector<ResolventResult> resolvent_solve_multi(const SeparableSource& f,
                                                   const std::vector<double>& lambdas, double T,
                                                   double t, const ResolventOptions& opts) {
  if (lambdas.empty()) throw ConfigError("resolvent_solve_multi: no lambda values");
  for (double l : lambdas)
    if (!(l > 0.0)) throw ConfigError("resolvent_solve_multi: lambda must be positive");
  if (t > T + 1e-12) throw ConfigError("resolvent_solve_multi: t beyond horizon T");

  std::vector<ResolventResult> results(lambdas.size());
  for (auto& res : results) {
    res.U.box = f.spatial.box;
    res.U.time_label = t;
    res.U.values.assign(f.spatial.box.node_count(), 0.0);
  }
  const double lambda_min = *std::min_element(lambdas.begin(), lambdas.end());
  const double r_max = std::min(std::max(T - t, 0.0), opts.lambda_tail / lambda_min);
  for (const auto& [r, w] : r_quadrature_nodes(r_max, opts)) {
    bool warn = false;
    const GridFunction pr = semigroup_apply(f.spatial, r, &warn);
    const double tf = f.time_factor ? f.time_factor(t + r) : 1.0;
    if (!std::isfinite(tf))
      throw NumericalError("resolvent_solve: time factor not finite at a quadrature node");
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      const double c = w * std::exp(-lambdas[li] * r) * tf;
      if (c == 0.0) continue;
      double* acc = results[li].U.values.data();
      const double* src = pr.values.data();
      for (std::size_t i = 0; i < pr.values.size(); ++i) acc[i] += c * src[i];
      results[li].boundary_warning = results[li].boundary_warning || warn;
    }
  }
  return results;
}

ResolventResult resolvent_solve(const SeparableSource& f, double lambda, double T, double t,
                                const ResolventOptions& opts) {
  return std::move(resolvent_solve_multi(f, {lambda}, T, t, opts).front());
}

double max_gradient(const GridFunction& U, double core_half_width) {
  const GridBox& box = U.box;
  double best = 0.0;
  const int ny = box.dim == 2 ? box.n[1] : 1;
  for (int iy = 0; iy < ny; ++iy) {
    if (box.dim == 2) {
      if (iy == 0 || iy == ny - 1) continue;
      if (std::abs(box.coord(1, iy)) > core_half_width) continue;
    }
    for (int ix = 1; ix + 1 < box.n[0]; ++ix) {
      if (std::abs(box.coord(0, ix)) > core_half_width) continue;
      const double gx = (U.at(ix + 1, iy) - U.at(ix - 1, iy)) / (2.0 * box.h(0));
      double g2 = gx * gx;
      if (box.dim == 2) {
        const double gy = (U.at(ix, iy + 1) - U.at(ix, iy - 1)) / (2.0 * box.h(1));
        g2 += gy * gy;
      }
      best = std::max(best, g2);
    }
  }
  return std::sqrt(best);
}

double pde_residual(const std::vector<GridFunction>& slices, const std::vector<double>& times,
                    const std::function<double(double, const Vec&)>& source, double lambda,
                    double core_half_width) {
  if (slices.size() < 3 || slices.size() != times.size())
    throw ConfigError("pde_residual: need >= 3 matched time slices");
  const GridBox& box = slices.front().box;
  double worst = 0.0;
  for (std::size_t s = 1; s + 1 < slices.size(); ++s) {
    const GridFunction& U = slices[s];
    const double dt2 = times[s + 1] - times[s - 1];
    const int ny = box.dim == 2 ? box.n[1] : 1;
    for (int iy = 0; iy < ny; ++iy) {
      if (box.dim == 2 && (iy == 0 || iy == ny - 1)) continue;
      if (box.dim == 2 && std::abs(box.coord(1, iy)) > core_half_width) continue;
      for (int ix = 1; ix + 1 < box.n[0]; ++ix) {
        if (std::abs(box.coord(0, ix)) > core_half_width) continue;
        const double ut = (slices[s + 1].at(ix, iy) - slices[s - 1].at(ix, iy)) / dt2;
        double lap = (U.at(ix + 1, iy) - 2.0 * U.at(ix, iy) + U.at(ix - 1, iy)) /
                     (box.h(0) * box.h(0));
        if (box.dim == 2)
          lap += (U.at(ix, iy + 1) - 2.0 * U.at(ix, iy) + U.at(ix, iy - 1)) /
                 (box.h(1) * box.h(1));
        Vec x(box.dim);
        x[0] = box.coord(0, ix);
        if (box.dim == 2) x[1] = box.coord(1, iy);
        const double res = ut + 0.5 * lap - lambda * U.at(ix, iy) + source(times[s], x);
        worst = std::max(worst, std::abs(res));
      }
    }
  }
  return worst;
}

std::vector<std::pair<double, double>> gradient_decay_study(const SeparableSource& f,
                                                            const std::vector<double>& lambdas,
                                                            double T, double t,
                                                            double core_half_width,
                                                            const ResolventOptions& opts) {
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] > lambdas[i - 1]))
      throw ConfigError("gradient_decay_study: lambdas must be increasing");
  const auto solves = resolvent_solve_multi(f, lambdas, T, t, opts);
  std::vector<std::pair<double, double>> out;
  out.reserve(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    out.emplace_back(lambdas[i], max_gradient(solves[i].U, core_half_width));
  return out;
}

double holder_seminorm(const GridFunction& G, double exponent, double min_separation) {
  if (!(exponent > 0.0) || !(exponent < 1.0))
    throw ConfigError("holder_seminorm: exponent must lie in (0,1)");
  const GridBox& box = G.box;
  double best = 0.0;
  const int ny = box.dim == 2 ? box.n[1] : 1;
  for (int axis = 0; axis < box.dim; ++axis) {
    const int len = box.n[axis];
    for (int step = 1; step < len; step *= 2) {
      const double s = step * box.h(axis);
      if (s < min_separation) continue;
      const double denom = std::pow(s, exponent);
      for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < box.n[0]; ++ix) {
          const int jx = axis == 0 ? ix + step : ix;
          const int jy = axis == 1 ? iy + step : iy;
          if (jx >= box.n[0] || (box.dim == 2 && jy >= box.n[1])) continue;
          best = std::max(best, std::abs(G.at(jx, jy) - G.at(ix, iy)) / denom);
        }
    }
  }
  return best;
}

// Catmull-Rom interpolation of a uniformly sampled table, replicate-clamped
static double cubic_interp(const std::vector<double>& v, double lo, double h, double x) {
  const int n = static_cast<int>(v.size());
  double u = (x - lo) / h;
  u = std::clamp(u, 0.0, static_cast<double>(n - 1));
  int i = static_cast<int>(std::floor(u));
  i = std::min(i, n - 2);
  const double f = u - i;
  const auto tap = [&](int k) { return v[static_cast<std::size_t>(std::clamp(k, 0, n - 1))]; };
  const double p0 = tap(i - 1), p1 = tap(i), p2 = tap(i + 1), p3 = tap(i + 2);
  return p1 + 0.5 * f *
                  (p2 - p0 +
                   f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)));
}

// locates the slice interval for t and returns the blend weight
static std::pair<std::size_t, double> slice_blend(const std::vector<double>& times, double t) {
  const double tc = std::clamp(t, times.front(), times.back());
  const std::size_t last = times.size() - 1;
  std::size_t j = 0;
  while (j + 1 < last && times[j + 1] <= tc) ++j;
  const double span = times[j + 1] - times[j];
  return {j, span > 0.0 ? (tc - times[j]) / span : 0.0};
}

static double table_eval(const std::vector<std::vector<double>>& tables,
                         const std::vector<double>& times, const GridBox& box, double t, double x) {
  const auto [j, theta] = slice_blend(times, t);
  const double a = cubic_interp(tables[j], box.lo[0], box.h(0), x);
  const double b = cubic_interp(tables[j + 1], box.lo[0], box.h(0), x);
  return (1.0 - theta) * a + theta * b;
}

double ZvonkinMap::u(double t, double x) const { return table_eval(U, times, box, t, x); }
double ZvonkinMap::ux(double t, double x) const { return table_eval(Ux, times, box, t, x); }
double ZvonkinMap::uxx(double t, double x) const { return table_eval(Uxx, times, box, t, x); }

double ZvonkinMap::gamma_inverse(double t, double y) const {
  double x = y;
  for (int it = 0; it < 50; ++it) {
    const double res = x + u(t, x) - y;
    if (std::abs(res) < 1e-12) return x;
    const double slope = 1.0 + ux(t, x);
    x -= res / std::max(slope, 1.0 - sup_gradient > 0.0 ? 1.0 - sup_gradient : 0.1);
  }
  if (std::abs(x + u(t, x) - y) < 1e-9) return x;
  throw NonConvergence("gamma_inverse: Newton did not reach the residual tolerance");
}

// central-difference tables (second-order one-sided rows at the edges)
static std::vector<double> derivative_table(const std::vector<double>& v, double h) {
  const std::size_t n = v.size();
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
  d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
  d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
  return d;
}

static std::vector<double> second_derivative_table(const std::vector<double>& v, double h) {
  const std::size_t n = v.size();
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
  d[0] = d[1];
  d[n - 1] = d[n - 2];
  return d;
}

ZvonkinMap zvonkin_transform(std::vector<double> times, const GridBox& box,
                             std::vector<std::vector<double>> U_slices, double lambda) {
  if (box.dim != 1) throw ConfigError("zvonkin_transform: 1d grids only");
  if (times.size() < 2 || times.size() != U_slices.size())
    throw ConfigError("zvonkin_transform: need matched times and slices (>= 2)");
  for (const auto& s : U_slices)
    if (s.size() != static_cast<std::size_t>(box.n[0]))
      throw ConfigError("zvonkin_transform: slice length does not match the grid");
  ZvonkinMap map;
  map.times = std::move(times);
  map.box = box;
  map.U = std::move(U_slices);
  map.lambda = lambda;
  const double h = box.h(0);
  for (const auto& slice : map.U) {
    map.Ux.push_back(derivative_table(slice, h));
    map.Uxx.push_back(second_derivative_table(slice, h));
  }
  for (const auto& dx : map.Ux)
    for (double v : dx) map.sup_gradient = std::max(map.sup_gradient, std::abs(v));
  if (map.sup_gradient >= 1.0)
    throw NumericalError(
        "zvonkin_transform: sup |dU/dx| >= 1, the map is not certified as a diffeomorphism "
        "(increase lambda)");
  return map;
}

ZvonkinMap solve_zvonkin_potential(const DriftField& b, double lambda, double T,
                                   const GridBox& box, int t_slices,
                                   const ResolventOptions& opts) {
  if (box.dim != 1) throw ConfigError("solve_zvonkin_potential: 1d grids only");
  if (b.dim != 1) throw ConfigError("solve_zvonkin_potential: drift must be one-dimensional");
  if (!(lambda > 0.0) || t_slices < 2)
    throw ConfigError("solve_zvonkin_potential: need lambda > 0 and >= 2 time slices");
  const int nx = box.n[0];
  const double h = box.h(0);

  // the drift kinds admitted here are time-constant, so sample it once
  std::vector<double> bvec(static_cast<std::size_t>(nx));
  int lo_sup = nx, hi_sup = -1;
  for (int i = 0; i < nx; ++i) {
    bvec[static_cast<std::size_t>(i)] = b.eval(0.0, vec1(box.coord(0, i)))[0];
    if (bvec[static_cast<std::size_t>(i)] != 0.0) {
      lo_sup = std::min(lo_sup, i);
      hi_sup = std::max(hi_sup, i);
    }
  }
  // the potential relaxes like e^{-lambda (T-t)} toward its terminal zero, so
  // cluster slice times quadratically toward T where it actually varies
  std::vector<double> times(static_cast<std::size_t>(t_slices) + 1);
  for (int j = 0; j <= t_slices; ++j) {
    const double u = static_cast<double>(j) / t_slices;
    times[static_cast<std::size_t>(j)] = T * (1.0 - (1.0 - u) * (1.0 - u));
  }
  times.front() = 0.0;
  times.back() = T;
  std::vector<std::vector<double>> U(times.size(), std::vector<double>(static_cast<std::size_t>(nx), 0.0));
  if (hi_sup < 0) return zvonkin_transform(times, box, U, lambda); // zero drift: U = 0

  // per-slice r-quadrature nodes with cached kernel taps and e^{-lambda r} weights
  struct RNode {
    double r, weight;
    std::vector<double> taps;
  };
  std::vector<std::vector<RNode>> slice_nodes(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double r_max = std::min(T - times[j], opts.lambda_tail / lambda);
    for (const auto& [r, w] : r_quadrature_nodes(r_max, opts))
      slice_nodes[j].push_back({r, w * std::exp(-lambda * r), heat_kernel_taps(r, h)});
  }

  // iteration state restricted to the source support (padded for derivatives)
  const int pad = 2;
  const int lo_r = std::max(0, lo_sup - pad), hi_r = std::min(nx - 1, hi_sup + pad);
  std::vector<std::vector<double>> Ux(times.size(), std::vector<double>(static_cast<std::size_t>(nx), 0.0));
  std::vector<double> src(static_cast<std::size_t>(nx), 0.0), conv(static_cast<std::size_t>(nx), 0.0);

  const auto source_at = [&](double s, int i) {
    const auto [j, theta] = slice_blend(times, s);
    const double ux = (1.0 - theta) * Ux[j][static_cast<std::size_t>(i)] +
                      theta * Ux[j + 1][static_cast<std::size_t>(i)];
    return bvec[static_cast<std::size_t>(i)] * (1.0 + ux);
  };

  const auto sweep = [&](int out_lo, int out_hi, bool track_delta) {
    double delta = 0.0;
    for (std::size_t j = times.size(); j-- > 0;) {
      for (int i = out_lo; i <= out_hi; ++i) conv[static_cast<std::size_t>(i)] = 0.0;
      for (const RNode& node : slice_nodes[j]) {
        const double s = times[j] + node.r;
        for (int i = lo_sup; i <= hi_sup; ++i) src[static_cast<std::size_t>(i)] = source_at(s, i);
        const int m = (static_cast<int>(node.taps.size()) - 1) / 2;
        for (int i = out_lo; i <= out_hi; ++i) {
          const int k_lo = std::max(lo_sup, i - m), k_hi = std::min(hi_sup, i + m);
          double acc = 0.0;
          for (int k = k_lo; k <= k_hi; ++k)
            acc += node.taps[static_cast<std::size_t>(i - k + m)] * src[static_cast<std::size_t>(k)];
          conv[static_cast<std::size_t>(i)] += node.weight * acc;
        }
      }
      for (int i = out_lo; i <= out_hi; ++i) {
        if (track_delta) delta = std::max(delta, std::abs(conv[static_cast<std::size_t>(i)] - U[j][static_cast<std::size_t>(i)]));
        U[j][static_cast<std::size_t>(i)] = conv[static_cast<std::size_t>(i)];
      }
      // refresh the slope table on the restricted window (used by earlier slices)
      for (int i = std::max(1, out_lo); i <= std::min(nx - 2, out_hi); ++i)
        Ux[j][static_cast<std::size_t>(i)] =
            (U[j][static_cast<std::size_t>(i) + 1] - U[j][static_cast<std::size_t>(i) - 1]) / (2.0 * h);
    }
    return delta;
  };

  bool converged = false;
  for (int it = 0; it < 30; ++it) {
    if (sweep(lo_r, hi_r, true) < 1e-11) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NonConvergence("solve_zvonkin_potential: fixed point did not reach tolerance");
  sweep(0, nx - 1, false); // full-domain pass with the converged source
  return zvonkin_transform(times, box, U, lambda);
}

double transformed_sde_step_equivalence(const DriftField& b_smooth, const ZvonkinMap& map,
                                        const BrownianPath& path, double x0, double t,
                                        TransformedScheme scheme) {
  if (b_smooth.dim != 1 || path.dim != 1)
    throw ConfigError("transformed_sde_step_equivalence: one-dimensional drift and path only");
  const int node_end = grid_node_index(path.grid, t);
  const auto& nodes = path.grid.nodes;
  double x_direct = x0;
  double y = x0 + map.u(0.0, x0);
  double worst = std::abs(map.gamma_inverse(0.0, y) - x_direct);
  for (int k = 0; k < node_end; ++k) {
    const double dt = nodes[static_cast<std::size_t>(k) + 1] - nodes[static_cast<std::size_t>(k)];
    const double db = path.value(k + 1, 0) - path.value(k, 0);
    const double tk = nodes[static_cast<std::size_t>(k)];
    // direct Euler route on the original equation
    x_direct += b_smooth.eval(tk, vec1(x_direct))[0] * dt + db;
    // transformed route driven by the same increment
    const double xt = map.gamma_inverse(tk, y);
    y += map.lambda * map.u(tk, xt) * dt + (1.0 + map.ux(tk, xt)) * db;
    if (scheme == TransformedScheme::first_order)
      y += 0.5 * map.uxx(tk, xt) * (db * db - dt);
    worst = std::max(worst, std::abs(map.gamma_inverse(nodes[static_cast<std::size_t>(k) + 1], y) - x_direct));
  }
  return worst;
}

} // namespace flowlab
