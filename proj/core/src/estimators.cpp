#include "flowlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "flowlab/errors.hpp"
#include "flowlab/pool.hpp"
#include "flowlab/quadrature.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/special.hpp"

namespace flowlab {

namespace {

// quintic smoothstep: 0 -> 1 with vanishing first and second derivatives at both ends
double smooth5(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double smooth5_prime(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double u = s * (1.0 - s);
  return 30.0 * u * u;
}

// mean / standard error over the unflagged entries of a strided column
MonteCarloEstimate reduce_column(const std::vector<double>& values, const std::vector<char>& bad,
                                 std::size_t stride, std::size_t column, std::uint64_t seed) {
  const std::size_t n_rows = bad.size();
  double sum = 0.0;
  long long n_ok = 0;
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (bad[i]) continue;
    sum += values[i * stride + column];
    ++n_ok;
  }
  if (n_ok == 0) throw NumericalError("monte carlo: every sample was censored by overflow");
  const double mean = sum / static_cast<double>(n_ok);
  double ss = 0.0;
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (bad[i]) continue;
    const double d = values[i * stride + column] - mean;
    ss += d * d;
  }
  MonteCarloEstimate e;
  e.mean = mean;
  e.n = n_ok;
  e.master_seed = seed;
  e.censored = static_cast<long long>(n_rows) - n_ok;
  e.std_error = n_ok > 1 ? std::sqrt(ss / (static_cast<double>(n_ok) * (n_ok - 1.0))) : 0.0;
  return e;
}

// composite Gauss with extra panel edges at the supplied breakpoints
double integrate_with_landmarks(const std::function<double(double)>& f, double a, double b,
                                std::vector<double> marks, int sub_panels, int pts) {
  if (!(b > a)) return 0.0;
  marks.push_back(a);
  marks.push_back(b);
  std::sort(marks.begin(), marks.end());
  double acc = 0.0;
  double lo = a;
  const double tiny = 1e-14 * (b - a);
  for (double m : marks) {
    const double hi = std::min(std::max(m, a), b);
    if (hi > lo + tiny) {
      acc += integrate_panels(f, lo, hi, sub_panels, pts);
      lo = hi;
    }
  }
  if (b > lo + tiny) acc += integrate_panels(f, lo, b, sub_panels, pts);
  return acc;
}

} // namespace

InitialDatum build_counterexample_datum(double p, double eps, double R) {
  if (!(p >= 1.0)) throw ConfigError("datum: p must be >= 1");
  if (!(eps > 0.0) || !(eps < 1.0 / p))
    throw ConfigError("datum: eps must lie in (0, 1/p) for a just-integrable derivative power");
  if (!(R > 0.0)) throw ConfigError("datum: support radius must be positive");
  const double kappa = eps - 1.0 / p + 1.0; // in (0, 1): u01' = x^{kappa-1} is singular at 0
  InitialDatum d;
  d.p_exponent = p;
  d.eps = eps;
  d.support_radius = R;
  d.u01 = [kappa, R](double x) {
    if (x <= 0.0 || x >= 2.0 * R) return 0.0;
    const double core = std::pow(x, kappa) / kappa;
    return x <= R ? core : core * (1.0 - smooth5((x - R) / R));
  };
  d.u01_prime = [kappa, R](double x) {
    if (x <= 0.0 || x >= 2.0 * R) return 0.0;
    if (x <= R) return std::pow(x, kappa - 1.0);
    const double s = (x - R) / R;
    return std::pow(x, kappa - 1.0) * (1.0 - smooth5(s)) -
           std::pow(x, kappa) / kappa * smooth5_prime(s) / R;
  };
  const double w = R / 3.0; // ramp width of the plateau factor
  d.u02 = [R, w](double y) {
    if (y <= -R || y >= 2.0 * R / 3.0) return 0.0;
    if (y < -2.0 * R / 3.0) return smooth5((y + R) / w);
    if (y <= R / 3.0) return 1.0;
    return 1.0 - smooth5((y - R / 3.0) / w);
  };
  d.u02_prime = [R, w](double y) {
    if (y <= -R || y >= 2.0 * R / 3.0) return 0.0;
    if (y < -2.0 * R / 3.0) return smooth5_prime((y + R) / w) / w;
    if (y <= R / 3.0) return 0.0;
    return -smooth5_prime((y - R / 3.0) / w) / w;
  };
  return d;
}

namespace {

// second moments of the plateau factor over a window, integrated exactly per
// polynomial piece (the pieces are quintic, Gauss-6 is exact through degree 11)
struct PlateauMoments {
  double sq{0.0};    // int u02^2
  double dsq{0.0};   // int u02'^2
  double cross{0.0}; // int u02 u02'
};

PlateauMoments plateau_moments(const InitialDatum& datum, double lo, double hi) {
  PlateauMoments m;
  const double R = datum.support_radius;
  const double seg[4] = {-R, -2.0 * R / 3.0, R / 3.0, 2.0 * R / 3.0};
  const GaussRule& gr = gauss_legendre(6);
  for (int s = 0; s < 3; ++s) {
    const double a = std::max(seg[s], lo);
    const double b = std::min(seg[s + 1], hi);
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t q = 0; q < gr.x.size(); ++q) {
      const double y = mid + half * gr.x[q];
      const double wq = half * gr.w[q];
      const double v = datum.u02(y);
      const double dv = datum.u02_prime(y);
      m.sq += wq * v * v;
      m.dsq += wq * dv * dv;
      m.cross += wq * v * dv;
    }
  }
  return m;
}

// windowed y-integral of the chosen gradient functional for general p
double y_integral_general(const InitialDatum& datum, double u1, double du1, double kernel,
                          double lo, double hi, double p, SobolevMode mode, int y_panels) {
  const double R = datum.support_radius;
  const double seg[4] = {-R, -2.0 * R / 3.0, R / 3.0, 2.0 * R / 3.0};
  double acc = 0.0;
  for (int s = 0; s < 3; ++s) {
    const double a = std::max(seg[s], lo);
    const double b = std::min(seg[s + 1], hi);
    if (!(b > a)) continue;
    const int panels = std::max(2, y_panels / 3);
    acc += integrate_panels(
        [&](double y) {
          const double v = datum.u02(y);
          const double dv = datum.u02_prime(y);
          double e1, e2;
          if (mode == SobolevMode::chain_rule) {
            e1 = du1 * v - u1 * dv * kernel;
            e2 = u1 * dv;
          } else {
            e1 = du1 * v;
            e2 = u1 * dv;
          }
          return std::pow(e1 * e1 + e2 * e2, 0.5 * p);
        },
        a, b, panels, 8);
  }
  return acc;
}

} // namespace

std::vector<MonteCarloEstimate> mc_sobolev_norm_sweep(const InitialDatum& datum,
                                                      const DriftField& drift, double t, double p,
                                                      double box_half_width,
                                                      const std::vector<double>& deltas,
                                                      long long n_paths, std::uint64_t master_seed,
                                                      const SobolevOptions& opts) {
  const double R = datum.support_radius;
  if (!(R > 0.0)) throw ConfigError("sobolev: datum has an empty support");
  if (!(p >= 1.0)) throw ConfigError("sobolev: p must be >= 1");
  if (!(box_half_width > 0.0)) throw ConfigError("sobolev: box half-width must be positive");
  if (drift.dim != 2) throw ConfigError("sobolev: a d=2 drift is required");
  if (drift.kind != DriftKind::zero && drift.kind != DriftKind::counterexample_f &&
      drift.kind != DriftKind::counterexample_h)
    throw ConfigError("sobolev: zero or piecewise-power drift required");
  if (!(t >= 0.0) || !(t <= drift.T)) throw ConfigError("sobolev: t must lie in [0, T]");
  if (n_paths < 1) throw ConfigError("sobolev: n_paths must be >= 1");
  if (deltas.empty()) throw ConfigError("sobolev: at least one cutoff is required");
  if (opts.n_steps < 2) throw ConfigError("sobolev: n_steps must be >= 2");
  if (opts.gauss_points < 2) throw ConfigError("sobolev: gauss_points must be >= 2");

  // cutoffs sorted ascending, remembering the caller's order
  const std::size_t nd = deltas.size();
  std::vector<int> order(nd);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return deltas[static_cast<std::size_t>(a)] < deltas[static_cast<std::size_t>(b)]; });
  std::vector<double> ds(nd);
  for (std::size_t i = 0; i < nd; ++i) ds[i] = deltas[static_cast<std::size_t>(order[i])];
  if (!(ds.front() > 0.0)) throw ConfigError("sobolev: cutoffs must be positive");
  for (std::size_t i = 0; i + 1 < nd; ++i)
    if (!(ds[i] < ds[i + 1])) throw ConfigError("sobolev: cutoffs must be distinct");

  // fixed panel edges: the cutoffs, then dyadic growth to the upper limit; the
  // per-path box clip happens node by node so the panel layout never varies
  const double reach = box_half_width + 8.0 * std::sqrt(std::max(t, 0.0));
  const double x_cap = std::min(2.0 * R, opts.x_upper > 0.0 ? opts.x_upper : reach);
  if (!(ds.back() < x_cap)) throw ConfigError("sobolev: cutoffs must lie below the x upper limit");
  std::vector<double> edges(ds.begin(), ds.end());
  while (edges.back() < x_cap) edges.push_back(std::min(edges.back() * 2.0, x_cap));
  const int n_panels = static_cast<int>(edges.size()) - 1;

  const GaussRule& gx = gauss_legendre(opts.gauss_points);
  std::vector<double> node_a, node_w;
  std::vector<int> node_panel;
  for (int j = 0; j < n_panels; ++j) {
    const double mid = 0.5 * (edges[j] + edges[j + 1]);
    const double half = 0.5 * (edges[j + 1] - edges[j]);
    for (std::size_t q = 0; q < gx.x.size(); ++q) {
      node_a.push_back(mid + half * gx.x[q]);
      node_w.push_back(half * gx.w[q]);
      node_panel.push_back(j);
    }
  }

  const TimeProfile profile = profile_from_drift(drift);
  const bool structured = profile.kind != TimeProfile::Kind::none;
  std::optional<double> sp;
  double grading = 1.0;
  if (structured) {
    const double st = profile.singular_time();
    if (st <= t) {
      sp = st;
      grading = 2.0;
    }
  }

  // full-support moments for the initial-coordinate product functional
  const PlateauMoments full = plateau_moments(datum, -R, 2.0 * R / 3.0);

  auto value_at = [&](double a, double kernel, double shift) {
    const double u1 = datum.u01(a);
    const double du1 = datum.u01_prime(a);
    if (u1 == 0.0 && du1 == 0.0) return 0.0;
    const double lo = -box_half_width - shift;
    const double hi = box_half_width - shift;
    if (p == 2.0) {
      if (opts.mode == SobolevMode::chain_rule) {
        const PlateauMoments m = plateau_moments(datum, lo, hi);
        return du1 * du1 * m.sq - 2.0 * du1 * u1 * kernel * m.cross +
               u1 * u1 * (1.0 + kernel * kernel) * m.dsq;
      }
      return (du1 * du1 * full.sq + u1 * u1 * full.dsq) * (2.0 + kernel * kernel);
    }
    if (opts.mode == SobolevMode::chain_rule)
      return y_integral_general(datum, u1, du1, kernel, lo, hi, p, opts.mode, opts.y_panels);
    return y_integral_general(datum, u1, du1, 0.0, -R, 2.0 * R / 3.0, p, opts.mode, opts.y_panels) *
           std::pow(2.0 + kernel * kernel, 0.5 * p);
  };

  // one pass over the x-nodes accumulating per-panel sums; every cutoff is a suffix
  auto compute_one = [&](std::uint64_t path_seed, bool no_path, double* out, char* flag) {
    double b1t = 0.0, b2t = 0.0;
    std::vector<double> seg_w, b1;
    if (!no_path) {
      const TimeGrid grid = make_graded_grid(t, structured ? opts.n_steps : 2, sp, grading);
      const BrownianPath path = sample_brownian(2, grid, path_seed);
      const int n = grid.n();
      b1t = path.value(n, 0);
      b2t = path.value(n, 1);
      if (structured) {
        seg_w.resize(static_cast<std::size_t>(n));
        b1.resize(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
          seg_w[static_cast<std::size_t>(k)] =
              profile.segment_integral(grid.nodes[static_cast<std::size_t>(k)],
                                       grid.nodes[static_cast<std::size_t>(k) + 1]);
          b1[static_cast<std::size_t>(k)] = path.value(k, 0);
        }
      }
    }
    const double a_hi = std::min(x_cap, box_half_width - b1t);
    std::vector<double> panel_sum(static_cast<std::size_t>(n_panels), 0.0);
    for (std::size_t m = 0; m < node_a.size(); ++m) {
      const double a = node_a[m];
      if (a > a_hi) continue;
      double kernel = 0.0, time_int = 0.0;
      for (std::size_t k = 0; k < seg_w.size(); ++k) {
        const double arg = a + b1[k];
        time_int += seg_w[k] * eval_g(arg, drift.alpha);
        kernel += seg_w[k] * eval_g_prime(arg, drift.alpha);
      }
      if (!std::isfinite(kernel) || !std::isfinite(time_int) ||
          std::abs(kernel) > jacobian_overflow_threshold) {
        *flag = 1;
        return;
      }
      panel_sum[static_cast<std::size_t>(node_panel[m])] += node_w[m] * value_at(a, kernel, b2t + time_int);
    }
    double acc = 0.0;
    for (int j = n_panels - 1; j >= 0; --j) {
      acc += panel_sum[static_cast<std::size_t>(j)];
      if (j < static_cast<int>(nd)) out[j] = acc;
    }
    if (!std::isfinite(acc)) *flag = 1;
  };

  std::vector<MonteCarloEstimate> result(nd);
  if (t == 0.0) {
    // the flow is the identity: a single deterministic quadrature
    std::vector<double> vals(nd, 0.0);
    char flag = 0;
    compute_one(0, true, vals.data(), &flag);
    if (flag) throw NumericalError("sobolev: quadrature at t = 0 overflowed");
    for (std::size_t j = 0; j < nd; ++j) {
      MonteCarloEstimate e;
      e.mean = vals[j];
      e.n = n_paths;
      e.master_seed = master_seed;
      result[static_cast<std::size_t>(order[j])] = e;
    }
    return result;
  }

  std::vector<double> values(static_cast<std::size_t>(n_paths) * nd, 0.0);
  std::vector<char> bad(static_cast<std::size_t>(n_paths), 0);
  parallel_for_indexed(static_cast<std::size_t>(n_paths), opts.workers, [&](std::size_t i) {
    compute_one(rng_mix(master_seed, static_cast<std::uint64_t>(i)), false, &values[i * nd], &bad[i]);
  });
  for (std::size_t j = 0; j < nd; ++j)
    result[static_cast<std::size_t>(order[j])] = reduce_column(values, bad, nd, j, master_seed);
  return result;
}

MonteCarloEstimate mc_sobolev_norm(const InitialDatum& datum, const DriftField& drift, double t,
                                   double p, double box_half_width, double delta_cutoff,
                                   long long n_paths, std::uint64_t master_seed,
                                   const SobolevOptions& opts) {
  return mc_sobolev_norm_sweep(datum, drift, t, p, box_half_width, {delta_cutoff}, n_paths,
                               master_seed, opts)
      .front();
}

MonteCarloEstimate mc_inverse_gradient_moment(const DriftField& drift, double r, double R,
                                              long long n_paths, int grid_x, int t_nodes,
                                              std::uint64_t master_seed, int workers) {
  if (!(r >= 1.0)) throw ConfigError("moment: r must be >= 1");
  if (!(R > 0.0)) throw ConfigError("moment: ball radius must be positive");
  if (n_paths < 1) throw ConfigError("moment: n_paths must be >= 1");
  if (grid_x < 2) throw ConfigError("moment: the spatial grid needs at least 2 points per axis");
  if (t_nodes < 2) throw ConfigError("moment: at least two time steps are required");
  const double T = drift.T;
  double sup_b = 0.0;
  for (int k = 0; k <= t_nodes; ++k)
    sup_b = std::max(sup_b, drift.sup_abs(T * k / t_nodes));
  if (!std::isfinite(sup_b))
    throw ConfigError("moment: the drift envelope diverges on [0, T]; a bounded drift is required");

  const int d = drift.dim;
  const double reach = R + sup_b * T + 4.0 * std::sqrt(T);
  std::size_t n_points = 1;
  for (int axis = 0; axis < d; ++axis) n_points *= static_cast<std::size_t>(grid_x);
  const TimeGrid grid = make_graded_grid(T, t_nodes, std::nullopt, 1.0);
  const int n = grid.n();

  std::vector<double> vals(static_cast<std::size_t>(n_paths), 0.0);
  std::vector<char> bad(static_cast<std::size_t>(n_paths), 0);
  parallel_for_indexed(static_cast<std::size_t>(n_paths), workers, [&](std::size_t i) {
    const BrownianPath path = sample_brownian(d, grid, rng_mix(master_seed, static_cast<std::uint64_t>(i)));
    double sup_f = 0.0;
    for (std::size_t wi = 0; wi < n_points; ++wi) {
      Vec x(d);
      std::size_t rem = wi;
      for (int axis = 0; axis < d; ++axis) {
        const std::size_t idx = rem % static_cast<std::size_t>(grid_x);
        rem /= static_cast<std::size_t>(grid_x);
        x[axis] = -reach + 2.0 * reach * static_cast<double>(idx) / (grid_x - 1.0);
      }
      Mat jac = Mat::identity(d);
      if (x.norm() <= R) sup_f = std::max(sup_f, std::sqrt(static_cast<double>(d)));
      for (int k = 0; k < n; ++k) {
        const double tk = grid.nodes[static_cast<std::size_t>(k)];
        const double dt = grid.nodes[static_cast<std::size_t>(k) + 1] - tk;
        const Mat step = Mat::identity(d) + dt * drift.jacobian(tk, x);
        jac = step * jac;
        x += dt * drift.eval(tk, x) + (path.point(k + 1) - path.point(k));
        if (x.norm() <= R) {
          bool over = false;
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
              if (!std::isfinite(jac(a, b)) || std::abs(jac(a, b)) > jacobian_overflow_threshold)
                over = true;
          const double det = jac.det();
          if (over || !std::isfinite(det) || std::abs(det) < 1e-300) {
            bad[i] = 1;
            return;
          }
          sup_f = std::max(sup_f, jac.inverse().frobenius());
        }
      }
    }
    vals[i] = std::pow(sup_f, r);
  });
  return reduce_column(vals, bad, 1, 0, master_seed);
}

double exact_indicator_expectation(double x, double s, double t1, double R, double alpha) {
  if (!(t1 > 0.0) || !(s >= 0.0) || !(s < t1))
    throw ConfigError("indicator: need 0 <= s < t1 with t1 > 0");
  if (!(R > 0.0)) throw ConfigError("indicator: R must be positive");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw ConfigError("indicator: alpha must lie in (0, 1)");
  const double v = t1 - s; // variance of B(t1) - B(s)
  const double sd = std::sqrt(v);
  const double third = R / 3.0;

  // inner z-integral at fixed y = B(s): the substitution m = (x+z)^alpha turns
  // g'(x+z) dz into dm exactly, so only the Gaussian factor remains
  auto inner = [&](double y) {
    const double z_lo = std::max(-third - y, -x);
    const double z_hi = std::min(third - y, 1.0 - x);
    if (!(z_hi > z_lo)) return 0.0;
    const double m_lo = std::pow(std::max(x + z_lo, 0.0), alpha);
    const double m_hi = std::pow(x + z_hi, alpha);
    if (!(m_hi > m_lo)) return 0.0;
    const double inv = 1.0 / alpha;
    std::vector<double> marks;
    for (double k : {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0}) {
      const double z = k * sd;
      if (z > z_lo && z < z_hi && x + z > 0.0) marks.push_back(std::pow(x + z, alpha));
    }
    return integrate_with_landmarks([&](double m) { return gauss_density(std::pow(m, inv) - x, v); },
                                    m_lo, m_hi, std::move(marks), 3, 10);
  };

  if (s == 0.0) return inner(0.0);

  const double ssd = std::sqrt(s);
  const double y_lo = std::max(x - 1.0 - third, -10.0 * ssd);
  const double y_hi = std::min(x + third, 10.0 * ssd);
  if (!(y_hi > y_lo)) return 0.0;
  std::vector<double> marks;
  // window kinks, the sharp entry/exit of the Gaussian core, and the scale of phi_s
  marks.push_back(x - third);
  marks.push_back(x + third - 1.0);
  for (double k : {-4.0, -2.0, -1.0, 1.0, 2.0, 4.0}) {
    marks.push_back(-third + k * sd);
    marks.push_back(third + k * sd);
  }
  for (double k : {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0}) marks.push_back(k * ssd);
  marks.push_back(-third);
  marks.push_back(third);
  return integrate_with_landmarks([&](double y) { return gauss_density(y, s) * inner(y); }, y_lo,
                                  y_hi, std::move(marks), 3, 12);
}

double exact_indicator_expectation_step(double x, double s, double t1, double R) {
  if (!(t1 > 0.0) || !(s >= 0.0) || !(s < t1))
    throw ConfigError("indicator: need 0 <= s < t1 with t1 > 0");
  if (!(R > 0.0)) throw ConfigError("indicator: R must be positive");
  const double v = t1 - s;
  const double sd = std::sqrt(v);
  const double third = R / 3.0;
  if (s == 0.0) {
    const double lo = std::max(-x, -third);
    const double hi = std::min(1.0 - x, third);
    if (!(hi > lo)) return 0.0;
    return norm_cdf(hi / sd) - norm_cdf(lo / sd);
  }
  const double ssd = std::sqrt(s);
  const double z_lo = std::max(-x, -8.5 * sd);
  const double z_hi = std::min(1.0 - x, 8.5 * sd);
  if (!(z_hi > z_lo)) return 0.0;
  std::vector<double> marks = {-third, third};
  for (double k : {-4.0, -2.0, -1.0, 1.0, 2.0, 4.0}) marks.push_back(k * sd);
  return integrate_with_landmarks(
      [&](double z) {
        return gauss_density(z, v) * (norm_cdf((third - z) / ssd) - norm_cdf((-third - z) / ssd));
      },
      z_lo, z_hi, std::move(marks), 4, 12);
}

MonteCarloEstimate mc_indicator_expectation(double x, double s, double t1, double R, double alpha,
                                            long long n, std::uint64_t master_seed, int workers) {
  if (!(t1 > 0.0) || !(s >= 0.0) || !(s < t1))
    throw ConfigError("indicator: need 0 <= s < t1 with t1 > 0");
  if (!(R > 0.0)) throw ConfigError("indicator: R must be positive");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw ConfigError("indicator: alpha must lie in (0, 1)");
  if (n < 1) throw ConfigError("indicator: n must be >= 1");
  const double sd_y = std::sqrt(s);
  const double sd_z = std::sqrt(t1 - s);
  const double third = R / 3.0;

  // fixed-size chunks with serial in-order combination: the estimate is a pure
  // function of (parameters, seed, n), independent of the worker count
  const long long chunk = 65536;
  const std::size_t n_chunks = static_cast<std::size_t>((n + chunk - 1) / chunk);
  struct Part {
    double sum{0.0}, sum_sq{0.0};
    long long bad{0};
  };
  std::vector<Part> parts(n_chunks);
  parallel_for_indexed(n_chunks, workers, [&](std::size_t c) {
    const long long lo = static_cast<long long>(c) * chunk;
    const long long hi = std::min(n, lo + chunk);
    Part pt;
    for (long long i = lo; i < hi; ++i) {
      const NormalPair z = normal_pair(rng_mix(master_seed, static_cast<std::uint64_t>(i)), 0);
      const double ys = sd_y * z.z0;     // B(s)
      const double incr = sd_z * z.z1;   // B(t1) - B(s)
      double val = 0.0;
      if (std::abs(ys + incr) <= third) val = eval_g_prime(x + incr, alpha);
      if (!std::isfinite(val)) {
        ++pt.bad;
        continue;
      }
      pt.sum += val;
      pt.sum_sq += val * val;
    }
    parts[c] = pt;
  });
  double sum = 0.0, sum_sq = 0.0;
  long long bad = 0;
  for (const Part& pt : parts) {
    sum += pt.sum;
    sum_sq += pt.sum_sq;
    bad += pt.bad;
  }
  const long long n_ok = n - bad;
  if (n_ok < 1) throw NumericalError("indicator: every sample was censored");
  MonteCarloEstimate e;
  e.mean = sum / static_cast<double>(n_ok);
  e.n = n_ok;
  e.censored = bad;
  e.master_seed = master_seed;
  if (n_ok > 1) {
    const double var = std::max(0.0, (sum_sq - static_cast<double>(n_ok) * e.mean * e.mean) /
                                         (static_cast<double>(n_ok) - 1.0));
    e.std_error = std::sqrt(var / static_cast<double>(n_ok));
  }
  return e;
}

double incomplete_gamma_shape(double x, double t1, double eps) {
  if (!(x > 0.0) || !(t1 > 0.0)) throw ConfigError("shape: x and t1 must be positive");
  if (!(eps > 0.0) || !(eps < 1.0)) throw ConfigError("shape: eps must lie in (0, 1)");
  return std::pow(x, -2.0 * eps) * upper_incomplete_gamma(eps, x * x / t1);
}

LowerBoundResult lower_bound_consistency(const std::vector<double>& xs, double t1, double alpha,
                                         double eps, double R, long long n_paths,
                                         std::uint64_t master_seed, int n_time, int workers) {
  if (xs.empty()) throw ConfigError("lower bound: xs must be non-empty");
  if (!(R > 0.0)) throw ConfigError("lower bound: R must be positive");
  for (double x : xs)
    if (!(x > 0.0) || !(x < R)) throw ConfigError("lower bound: each x must lie in (0, R)");
  if (n_time < 4) throw ConfigError("lower bound: n_time must be >= 4");
  if (n_paths < 0) throw ConfigError("lower bound: n_paths must be >= 0");

  const DriftField drift = make_counterexample_drift(alpha, eps, t1, t1);
  const TimeProfile profile = profile_from_drift(drift);
  const TimeGrid grid = make_graded_grid(t1, n_time, t1, 4.0);
  const int n = grid.n();
  std::vector<double> seg_w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    seg_w[static_cast<std::size_t>(k)] = profile.segment_integral(
        grid.nodes[static_cast<std::size_t>(k)], grid.nodes[static_cast<std::size_t>(k) + 1]);

  const std::size_t nx = xs.size();
  LowerBoundResult res;
  res.xs = xs;
  res.estimates.assign(nx, 0.0);
  res.std_errors.assign(nx, 0.0);
  res.phis.resize(nx);
  for (std::size_t j = 0; j < nx; ++j) res.phis[j] = incomplete_gamma_shape(xs[j], t1, eps);

  if (n_paths == 0) {
    // deterministic: exact-in-f segment weights against the indicator quadrature
    std::vector<double> table(nx * static_cast<std::size_t>(n));
    parallel_for_indexed(nx * static_cast<std::size_t>(n), workers, [&](std::size_t cell) {
      const std::size_t j = cell / static_cast<std::size_t>(n);
      const std::size_t k = cell % static_cast<std::size_t>(n);
      table[cell] = seg_w[k] * exact_indicator_expectation(xs[j], grid.nodes[k], t1, R, alpha);
    });
    for (std::size_t j = 0; j < nx; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k)
        acc += table[j * static_cast<std::size_t>(n) + k];
      res.estimates[j] = acc;
    }
  } else {
    std::vector<double> values(static_cast<std::size_t>(n_paths) * nx, 0.0);
    std::vector<char> bad(static_cast<std::size_t>(n_paths), 0);
    parallel_for_indexed(static_cast<std::size_t>(n_paths), workers, [&](std::size_t i) {
      const BrownianPath path = sample_brownian(1, grid, rng_mix(master_seed, static_cast<std::uint64_t>(i)));
      const double bt = path.value(n, 0);
      if (std::abs(bt) > R / 3.0) return; // indicator zero: the row stays 0
      for (std::size_t j = 0; j < nx; ++j) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
          acc += seg_w[static_cast<std::size_t>(k)] *
                 eval_g_prime(xs[j] + bt - path.value(k, 0), alpha);
        if (!std::isfinite(acc)) {
          bad[i] = 1;
          return;
        }
        values[i * nx + j] = acc;
      }
    });
    for (std::size_t j = 0; j < nx; ++j) {
      const MonteCarloEstimate e = reduce_column(values, bad, nx, j, master_seed);
      res.estimates[j] = e.mean;
      res.std_errors[j] = e.std_error;
    }
  }

  res.ratio_min = std::numeric_limits<double>::infinity();
  res.ratio_max = 0.0;
  for (std::size_t j = 0; j < nx; ++j) {
    if (!(res.estimates[j] > 0.0))
      throw NumericalError("lower bound: non-positive estimate at x = " + std::to_string(xs[j]));
    const double ratio = res.estimates[j] / res.phis[j];
    res.ratio_min = std::min(res.ratio_min, ratio);
    res.ratio_max = std::max(res.ratio_max, ratio);
  }
  res.c = res.ratio_min;
  return res;
}

} // namespace flowlab
