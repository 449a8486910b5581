#include "flowlab/experiment.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flowlab/csv.hpp"
#include "flowlab/errors.hpp"
#include "flowlab/estimators.hpp"
#include "flowlab/flow.hpp"
#include "flowlab/flow_calculus.hpp"
#include "flowlab/resolvent.hpp"
#include "flowlab/rng.hpp"
#include "flowlab/svg.hpp"
#include "flowlab/version.hpp"

namespace flowlab {

namespace fs = std::filesystem;

DriftField drift_from_config(const Config& cfg) {
  const std::string kind = cfg.get_string("drift.kind", "zero");
  const double T = cfg.get_double("drift.T", 1.0);
  if (kind == "zero")
    return make_zero_drift(static_cast<int>(cfg.get_int("drift.dim", 2)), T);
  if (kind == "constant") {
    const std::vector<double> v = cfg.get_double_list("drift.value", "0.5,0.25");
    if (v.size() > 3) throw ConfigError("drift.value: at most 3 components");
    Vec c(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) c[static_cast<int>(i)] = v[i];
    return make_constant_drift(c, T);
  }
  if (kind == "smooth_bump")
    return make_smooth_bump_drift(static_cast<int>(cfg.get_int("drift.dim", 2)),
                                  cfg.get_double("drift.amplitude", 1.0), T);
  if (kind == "counterexample_f")
    return make_counterexample_drift(cfg.get_double("drift.alpha", 0.5),
                                     cfg.get_double("drift.eps", 0.05),
                                     cfg.get_double("drift.t1", 0.5 * T), T);
  if (kind == "counterexample_h")
    return make_counterexample_h_drift(cfg.get_double("drift.alpha", 0.5),
                                       cfg.get_double("drift.eps", 0.05), T);
  throw ConfigError("drift.kind: unknown kind '" + kind + "'");
}

namespace {

std::uint64_t resolve_seed(const Config& cfg) {
  if (const char* env = std::getenv("FLOWLAB_SEED")) {
    const std::string raw(env);
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
      throw ConfigError("FLOWLAB_SEED: expected an unsigned integer, got '" + raw + "'");
    }
  }
  return static_cast<std::uint64_t>(cfg.get_int("paths.seed", 12345));
}

// records every file as it is created so a failed run can remove its partial outputs
struct OutputRecorder {
  std::string dir;
  std::vector<std::string> files;

  std::string path_of(const std::string& name) const { return dir + "/" + name; }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    files.push_back(name);
    write_csv(path_of(name), header, rows);
  }
  void svg_lines(const std::string& name, const std::string& title, const std::string& xl,
                 const std::string& yl, const std::vector<PlotSeries>& series, bool log_x = false,
                 bool log_y = false) {
    files.push_back(name);
    write_svg_lines(path_of(name), title, xl, yl, series, log_x, log_y);
  }
  void svg_regions(const std::string& name, const std::string& title, const std::string& xl,
                   const std::string& yl, const std::vector<RegionCell>& cells,
                   const std::vector<PlotSeries>& boundaries,
                   const std::vector<std::pair<std::string, std::string>>& legend) {
    files.push_back(name);
    write_svg_regions(path_of(name), title, xl, yl, cells, boundaries, legend);
  }
  void discard_all() {
    for (const auto& f : files) {
      std::error_code ec;
      fs::remove(path_of(f), ec);
    }
    files.clear();
  }
};

std::string fmt(double v) { return format_double(v); }

void run_classify(const Config& cfg, OutputRecorder& rec) {
  const int res = static_cast<int>(cfg.get_int("classify.resolution", 33));
  if (res < 2) throw ConfigError("classify.resolution: need at least 2 cells per axis");
  const double a_lo = cfg.get_double("classify.alpha_min", 0.02);
  const double a_hi = cfg.get_double("classify.alpha_max", 0.98);
  const double s_lo = cfg.get_double("classify.two_over_q_min", 0.0);
  const double s_hi = cfg.get_double("classify.two_over_q_max", 2.0);
  const int d = static_cast<int>(cfg.get_int("classify.d", 2));
  if (!(a_lo > 0.0) || !(a_hi < 1.0) || !(a_lo < a_hi))
    throw ConfigError("classify.alpha range must satisfy 0 < alpha_min < alpha_max < 1");
  if (!(s_lo >= 0.0) || !(s_lo < s_hi))
    throw ConfigError("classify.two_over_q range must satisfy 0 <= min < max");

  auto color_of = [](RegimeLabel l) -> std::string {
    switch (l) {
      case RegimeLabel::strong_existence: return "#7fcdbb";
      case RegimeLabel::non_existence: return "#fc9272";
      default: return "#ececec";
    }
  };

  std::vector<std::vector<std::string>> rows;
  std::vector<RegionCell> cells;
  const double da = (a_hi - a_lo) / res;
  const double dsq = (s_hi - s_lo) / res;
  for (int i = 0; i < res; ++i) {
    const double alpha = a_lo + (i + 0.5) * da;
    for (int j = 0; j < res; ++j) {
      const double two_over_q = s_lo + (j + 0.5) * dsq;
      const double q = two_over_q == 0.0 ? std::numeric_limits<double>::infinity()
                                         : 2.0 / two_over_q;
      const RegimeClassification c = classify_regime(q, alpha, d);
      rows.push_back({fmt(q), fmt(alpha), fmt(two_over_q), to_string(c.label)});
      cells.push_back({alpha - 0.5 * da, two_over_q - 0.5 * dsq, da, dsq, color_of(c.label)});
    }
  }
  rec.csv("regime_diagram.csv", {"q", "alpha", "two_over_q", "label"}, rows);

  PlotSeries low, high;
  low.color = high.color = "#333333";
  for (int i = 0; i <= 64; ++i) {
    const double alpha = a_lo + (a_hi - a_lo) * i / 64.0;
    if (alpha >= s_lo && alpha <= s_hi) {
      low.x.push_back(alpha);
      low.y.push_back(alpha);
    }
    if (alpha + 1.0 >= s_lo && alpha + 1.0 <= s_hi) {
      high.x.push_back(alpha);
      high.y.push_back(alpha + 1.0);
    }
  }
  rec.svg_regions("regime_diagram.svg", "drift regularity regimes", "alpha", "2/q", cells,
                  {low, high},
                  {{"#7fcdbb", "strong existence"},
                   {"#ececec", "indeterminate"},
                   {"#fc9272", "non-existence"}});
}

TimeGrid grid_for_drift(const DriftField& drift, double t_end, int n_steps, double grading) {
  std::optional<double> sp;
  double gamma = 1.0;
  for (double st : drift.singular_times) {
    if (st <= t_end + 1e-12) {
      sp = std::min(st, t_end);
      gamma = grading;
      break;
    }
  }
  return make_graded_grid(t_end, n_steps, sp, gamma);
}

void run_simulate_flow(const Config& cfg, OutputRecorder& rec, std::uint64_t seed) {
  const DriftField drift = drift_from_config(cfg);
  const double t_end = cfg.get_double("flow.t", drift.T);
  if (!(t_end > 0.0) || t_end > drift.T)
    throw ConfigError("flow.t must lie in (0, drift.T]");
  const int n_steps = static_cast<int>(cfg.get_int("paths.n_steps", 4096));
  const double grading = cfg.get_double("paths.grading", 2.0);
  const std::vector<double> x0v = cfg.get_double_list("flow.x0", "0.25,0");
  if (static_cast<int>(x0v.size()) != drift.dim)
    throw ConfigError("flow.x0: dimension does not match the drift");
  Vec x0(drift.dim);
  for (int i = 0; i < drift.dim; ++i) x0[i] = x0v[static_cast<std::size_t>(i)];

  const TimeGrid grid = grid_for_drift(drift, t_end, n_steps, grading);
  const BrownianPath path = sample_brownian(drift.dim, grid, seed);
  const FlowTrajectory traj = integrate_flow(drift, path, x0);

  std::vector<std::string> header = {"t"};
  for (int j = 0; j < drift.dim; ++j) header.push_back("x_" + std::to_string(j + 1));
  std::vector<std::vector<std::string>> rows;
  std::vector<PlotSeries> series(static_cast<std::size_t>(drift.dim));
  const char* palette[3] = {"#1f77b4", "#d62728", "#2ca02c"};
  for (int j = 0; j < drift.dim; ++j) {
    series[static_cast<std::size_t>(j)].color = palette[j % 3];
    series[static_cast<std::size_t>(j)].label = "x_" + std::to_string(j + 1);
  }
  for (int k = 0; k <= grid.n(); ++k) {
    std::vector<std::string> row = {fmt(grid.nodes[static_cast<std::size_t>(k)])};
    const Vec p = traj.point(k);
    for (int j = 0; j < drift.dim; ++j) {
      row.push_back(fmt(p[j]));
      series[static_cast<std::size_t>(j)].x.push_back(grid.nodes[static_cast<std::size_t>(k)]);
      series[static_cast<std::size_t>(j)].y.push_back(p[j]);
    }
    rows.push_back(std::move(row));
  }
  rec.csv("flow.csv", header, rows);
  rec.svg_lines("flow.svg", "flow trajectory", "t", "X(t)", series);

  if (cfg.get_bool("flow.jacobian", false)) {
    const JacobianPath jac = propagate_jacobian(drift, traj);
    std::vector<std::string> jh = {"t"};
    for (int a = 0; a < drift.dim; ++a)
      for (int b = 0; b < drift.dim; ++b)
        jh.push_back("J_" + std::to_string(a + 1) + std::to_string(b + 1));
    jh.push_back("det");
    jh.push_back("overflow_flag");
    std::vector<std::vector<std::string>> jrows;
    for (int k = 0; k <= grid.n(); ++k) {
      const Mat& J = jac.matrices[static_cast<std::size_t>(k)];
      std::vector<std::string> row = {fmt(grid.nodes[static_cast<std::size_t>(k)])};
      bool over = false;
      for (int a = 0; a < drift.dim; ++a)
        for (int b = 0; b < drift.dim; ++b) {
          row.push_back(fmt(J(a, b)));
          if (std::abs(J(a, b)) > jacobian_overflow_threshold) over = true;
        }
      row.push_back(fmt(J.det()));
      row.push_back(over ? "1" : "0");
      jrows.push_back(std::move(row));
    }
    rec.csv("jacobian.csv", jh, jrows);
  }
}

struct ResolventFixture {
  GridBox box;
  SeparableSource source;
  std::function<double(double, const Vec&)> source_at; // time-expanded form
  double core;
};

ResolventFixture resolvent_fixture_from(const Config& cfg, int dim_default) {
  ResolventFixture fx;
  const int dim = static_cast<int>(cfg.get_int("resolvent.dim", dim_default));
  if (dim != 1 && dim != 2) throw ConfigError("resolvent.dim must be 1 or 2");
  const double hw = cfg.get_double("grid.half_width", dim == 1 ? 8.0 : 7.5);
  const double h = cfg.get_double("grid.h", dim == 1 ? 0.05 : 0.075);
  if (!(hw > 0.0) || !(h > 0.0) || h >= hw)
    throw ConfigError("grid: need 0 < h < half_width");
  const int n = static_cast<int>(std::lround(2.0 * hw / h)) + 1;
  fx.box = dim == 1 ? make_grid_1d(-hw, hw, n) : make_grid_2d(hw, n);

  const std::string profile = cfg.get_string("resolvent.f_profile", "constant");
  const double wavenumber = cfg.get_double("resolvent.wavenumber", 1.0);
  const double holder_alpha = cfg.get_double("resolvent.holder_alpha", 0.6);
  std::function<double(const Vec&)> spatial;
  if (profile == "constant") {
    spatial = [](const Vec&) { return 1.0; };
  } else if (profile == "fourier") {
    spatial = [wavenumber](const Vec& x) { return std::sin(wavenumber * x[0]); };
  } else if (profile == "holder_bump") {
    if (!(holder_alpha > 0.0) || !(holder_alpha < 1.0))
      throw ConfigError("resolvent.holder_alpha must lie in (0, 1)");
    spatial = [holder_alpha](const Vec& x) {
      return std::max(0.0, 1.0 - std::pow(x.norm(), holder_alpha));
    };
  } else {
    throw ConfigError("resolvent.f_profile: unknown profile '" + profile + "'");
  }
  fx.source.spatial = make_grid_function(fx.box, spatial);

  const double power = cfg.get_double("resolvent.time_power", 0.0);
  if (power < 0.0) throw ConfigError("resolvent.time_power must be >= 0");
  if (power > 0.0) fx.source.time_factor = [power](double s) { return std::pow(s, -power); };
  std::function<double(double)> tf = fx.source.time_factor;
  fx.source_at = [spatial, tf](double s, const Vec& x) {
    return (tf ? tf(s) : 1.0) * spatial(x);
  };

  const double T = cfg.get_double("resolvent.T", 1.0);
  fx.core = cfg.get_double("resolvent.core", std::max(hw / 8.0, hw - 6.0 * std::sqrt(T)));
  return fx;
}

void run_resolvent(const Config& cfg, OutputRecorder& rec) {
  ResolventFixture fx = resolvent_fixture_from(cfg, 1);
  const double lambda = cfg.get_double("resolvent.lambda", 4.0);
  const double T = cfg.get_double("resolvent.T", 1.0);
  const double t = cfg.get_double("resolvent.t", 0.0);
  const double dt = cfg.get_double("resolvent.dt", 0.01);
  if (!(lambda > 0.0)) throw ConfigError("resolvent.lambda must be positive");
  if (!(t >= 0.0) || !(t < T)) throw ConfigError("resolvent.t must lie in [0, T)");
  if (!(dt > 0.0) || t + 2.5 * dt >= T)
    throw ConfigError("resolvent.dt: three slices t, t+dt, t+2dt must fit below T");

  ResolventOptions opts;
  opts.r_panels = static_cast<int>(cfg.get_int("resolvent.r_panels", 24));
  opts.gauss_points = static_cast<int>(cfg.get_int("resolvent.gauss_points", 6));

  const std::vector<double> times = {t, t + dt, t + 2.0 * dt};
  std::vector<GridFunction> slices;
  for (double ts : times) slices.push_back(resolvent_solve(fx.source, lambda, T, ts, opts).U);

  const GridBox& box = fx.box;
  const GridFunction& U0 = slices[0]; // reported value/gradient at the requested t
  const GridFunction& U = slices[1];  // residual is centered at t + dt
  const int dim = box.dim;
  const int nx = box.n[0];
  const int ny = dim == 2 ? box.n[1] : 1;
  auto in_core = [&](int ix, int iy) {
    if (std::abs(box.coord(0, ix)) > fx.core) return false;
    return dim == 1 || std::abs(box.coord(1, iy)) <= fx.core;
  };

  std::vector<std::string> header = {"x"};
  if (dim == 2) header.push_back("y");
  header.push_back("U");
  header.push_back("gradU_x");
  if (dim == 2) header.push_back("gradU_y");
  header.push_back("residual");

  const double hx = box.h(0);
  const double hy = dim == 2 ? box.h(1) : 1.0;
  std::vector<std::vector<std::string>> rows;
  PlotSeries axis_u;
  axis_u.label = "U";
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      std::vector<std::string> row = {fmt(box.coord(0, ix))};
      if (dim == 2) row.push_back(fmt(box.coord(1, iy)));
      row.push_back(fmt(U0.at(ix, iy)));
      const bool interior_x = ix > 0 && ix < nx - 1;
      const bool interior_y = dim == 1 || (iy > 0 && iy < ny - 1);
      const double gx = interior_x ? (U0.at(ix + 1, iy) - U0.at(ix - 1, iy)) / (2.0 * hx) : 0.0;
      row.push_back(fmt(gx));
      if (dim == 2)
        row.push_back(fmt(interior_y ? (U0.at(ix, iy + 1) - U0.at(ix, iy - 1)) / (2.0 * hy) : 0.0));
      double res = 0.0;
      if (interior_x && interior_y && in_core(ix, iy)) {
        const double ut = (slices[2].at(ix, iy) - slices[0].at(ix, iy)) / (2.0 * dt);
        double lap = (U.at(ix + 1, iy) - 2.0 * U.at(ix, iy) + U.at(ix - 1, iy)) / (hx * hx);
        if (dim == 2)
          lap += (U.at(ix, iy + 1) - 2.0 * U.at(ix, iy) + U.at(ix, iy - 1)) / (hy * hy);
        Vec x(dim);
        x[0] = box.coord(0, ix);
        if (dim == 2) x[1] = box.coord(1, iy);
        res = ut + 0.5 * lap - lambda * U.at(ix, iy) + fx.source_at(times[1], x);
      }
      row.push_back(fmt(res));
      rows.push_back(std::move(row));
      if (dim == 1 || iy == ny / 2) {
        axis_u.x.push_back(box.coord(0, ix));
        axis_u.y.push_back(U0.at(ix, iy));
      }
    }
  }
  rec.csv("resolvent.csv", header, rows);
  rec.svg_lines("resolvent.svg", "resolvent potential", "x", "U", {axis_u});
}

void run_regularity_sweep(const Config& cfg, OutputRecorder& rec) {
  Config local = cfg;
  if (!local.has("resolvent.f_profile")) local.set("resolvent.f_profile", "holder_bump");
  if (!local.has("resolvent.time_power")) local.set("resolvent.time_power", "0.2");
  if (!local.has("resolvent.core")) local.set("resolvent.core", "1.5");
  ResolventFixture fx = resolvent_fixture_from(local, 2);
  const double T = local.get_double("resolvent.T", 1.0);
  const double t = local.get_double("resolvent.t", 0.0);
  const std::vector<double> lambdas = local.get_double_list("sweep.lambdas", "1,4,16,64");
  for (double l : lambdas)
    if (!(l > 0.0)) throw ConfigError("sweep.lambdas must be positive");

  ResolventOptions opts;
  opts.r_panels = static_cast<int>(local.get_int("resolvent.r_panels", 24));
  opts.gauss_points = static_cast<int>(local.get_int("resolvent.gauss_points", 6));

  const auto study = gradient_decay_study(fx.source, lambdas, T, t, fx.core, opts);
  std::vector<std::vector<std::string>> rows;
  PlotSeries s;
  s.label = "sup |grad U|";
  for (const auto& [lambda, grad] : study) {
    rows.push_back({fmt(lambda), fmt(grad)});
    s.x.push_back(lambda);
    s.y.push_back(grad);
  }
  rec.csv("gradient_decay.csv", {"lambda", "sup_grad_U"}, rows);
  rec.svg_lines("gradient_decay.svg", "resolvent gradient decay", "lambda", "sup |grad U|", {s},
                true, true);
}

void run_blowup_demo(const Config& cfg, OutputRecorder& rec, std::uint64_t seed) {
  Config local = cfg;
  if (!local.has("drift.kind")) local.set("drift.kind", "counterexample_f");
  if (!local.has("drift.t1")) local.set("drift.t1", "1");
  if (!local.has("drift.T")) local.set("drift.T", "1");
  const DriftField drift = drift_from_config(local);
  if (drift.kind != DriftKind::counterexample_f && drift.kind != DriftKind::counterexample_h &&
      drift.kind != DriftKind::zero)
    throw ConfigError("blowup demo: zero or piecewise-power drift required");

  const TimeProfile profile = profile_from_drift(drift);
  const double default_t =
      profile.kind == TimeProfile::Kind::blowup_at_t1 ? drift.t1 : drift.T;
  const double t = local.get_double("blowup.t", default_t);

  const double p = local.get_double("datum.p", 2.0);
  const double eps_datum = local.get_double("datum.eps", drift.eps);
  const double integral_scale =
      profile.kind == TimeProfile::Kind::none ? 5.0 : profile.total_integral_bound();
  const double R = local.get_double("datum.R", 1.6 * integral_scale);
  const InitialDatum datum = build_counterexample_datum(p, eps_datum, R);

  const std::vector<double> deltas = local.get_double_list("blowup.deltas", "0.04,0.02,0.01");
  const double box = local.get_double("blowup.box_half_width", R);
  const long long n_paths = local.get_int("mc.n_paths", 200);

  SobolevOptions opts;
  opts.n_steps = static_cast<int>(local.get_int("paths.n_steps", 2048));
  opts.workers = static_cast<int>(local.get_int("mc.workers", 0));
  opts.x_upper = local.get_double("sobolev.x_upper", R / 8.0);
  const std::string mode = local.get_string("sobolev.mode", "chain_rule");
  if (mode == "chain_rule")
    opts.mode = SobolevMode::chain_rule;
  else if (mode == "product_frobenius")
    opts.mode = SobolevMode::product_frobenius;
  else
    throw ConfigError("sobolev.mode: unknown mode '" + mode + "'");

  const auto sweep = mc_sobolev_norm_sweep(datum, drift, t, p, box, deltas, n_paths, seed, opts);
  std::vector<std::vector<std::string>> rows;
  PlotSeries s;
  s.label = "E int |grad u|^p";
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    rows.push_back({fmt(deltas[i]), fmt(sweep[i].mean), fmt(sweep[i].std_error),
                    std::to_string(sweep[i].n), std::to_string(sweep[i].censored)});
    s.x.push_back(deltas[i]);
    s.y.push_back(sweep[i].mean);
  }
  rec.csv("blowup.csv", {"delta", "mean", "std_error", "n", "censored"}, rows);
  rec.svg_lines("blowup.svg", "cutoff blow-up of the gradient norm", "delta",
                "E int |grad u|^p", {s}, true, true);
}

void run_moment_study(const Config& cfg, OutputRecorder& rec, std::uint64_t seed) {
  Config local = cfg;
  if (!local.has("drift.kind")) local.set("drift.kind", "smooth_bump");
  if (!local.has("drift.amplitude")) local.set("drift.amplitude", "0.5");
  const DriftField drift = drift_from_config(local);
  const double r = local.get_double("moment.r", 2.0);
  const double R = local.get_double("moment.R", 2.0);
  const long long n_paths = local.get_int("mc.n_paths", 200);
  const int workers = static_cast<int>(local.get_int("mc.workers", 0));

  // levels are grid_x:t_nodes pairs
  std::vector<std::pair<int, int>> levels;
  {
    const std::string raw = local.get_string("moment.levels", "17:16,33:32");
    std::string item;
    std::istringstream in(raw);
    while (std::getline(in, item, ',')) {
      const std::size_t colon = item.find(':');
      if (colon == std::string::npos)
        throw ConfigError("moment.levels: expected grid_x:t_nodes pairs");
      try {
        levels.emplace_back(std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1)));
      } catch (const std::exception&) {
        throw ConfigError("moment.levels: expected grid_x:t_nodes pairs, got '" + item + "'");
      }
    }
    if (levels.empty()) throw ConfigError("moment.levels: at least one level required");
  }

  std::vector<std::vector<std::string>> rows;
  PlotSeries s;
  s.label = "E sup ||grad X^{-1}||^r";
  int index = 0;
  for (const auto& [grid_x, t_nodes] : levels) {
    const MonteCarloEstimate e =
        mc_inverse_gradient_moment(drift, r, R, n_paths, grid_x, t_nodes, seed, workers);
    rows.push_back({std::to_string(grid_x), std::to_string(t_nodes), fmt(e.mean),
                    fmt(e.std_error), std::to_string(e.n), std::to_string(e.censored)});
    s.x.push_back(++index);
    s.y.push_back(e.mean);
  }
  rec.csv("moment.csv", {"grid_x", "t_nodes", "mean", "std_error", "n", "censored"}, rows);
  rec.svg_lines("moment.svg", "inverse-gradient moment by refinement level", "level",
                "E sup ||grad X^{-1}||^r", {s});
}

void run_oracle_check(const Config& cfg, OutputRecorder& rec, std::uint64_t seed) {
  const std::string raw = cfg.get_string(
      "oracle.tuples",
      "0.3:0.5:1:10:0.5;0.2:0.3:1:10:0.6;0.5:0.7:1:10:0.6;0.1:0.25:1:8:0.7;0.8:0.5:1:12:0.7");
  const long long n = cfg.get_int("mc.n", 100000);
  const int workers = static_cast<int>(cfg.get_int("mc.workers", 0));

  std::vector<std::array<double, 5>> tuples;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ';')) {
    std::array<double, 5> tup{};
    std::string field;
    std::istringstream fin(item);
    int got = 0;
    while (std::getline(fin, field, ':')) {
      if (got >= 5) throw ConfigError("oracle.tuples: expected x:s:t1:R:alpha");
      try {
        tup[static_cast<std::size_t>(got++)] = std::stod(field);
      } catch (const std::exception&) {
        throw ConfigError("oracle.tuples: expected numbers in x:s:t1:R:alpha, got '" + field + "'");
      }
    }
    if (got != 5) throw ConfigError("oracle.tuples: expected x:s:t1:R:alpha");
    tuples.push_back(tup);
  }
  if (tuples.empty()) throw ConfigError("oracle.tuples: at least one tuple required");

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto [x, s, t1, R, alpha] = tuples[i];
    const double quad = exact_indicator_expectation(x, s, t1, R, alpha);
    const MonteCarloEstimate mc =
        mc_indicator_expectation(x, s, t1, R, alpha, n, rng_mix(seed, i), workers);
    rows.push_back({fmt(x), fmt(s), fmt(t1), fmt(R), fmt(alpha), fmt(quad), fmt(mc.mean),
                    fmt(mc.std_error), std::to_string(mc.n), std::to_string(mc.censored),
                    fmt(std::abs(mc.mean - quad)), fmt(3.0 * mc.std_error)});
  }
  rec.csv("oracle.csv",
          {"x", "s", "t1", "R", "alpha", "quadrature", "mc_mean", "mc_std_error", "n", "censored",
           "abs_diff", "three_se"},
          rows);
}

} // namespace

std::vector<std::string> emit_regime_diagram(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  OutputRecorder rec;
  rec.dir = out_dir;
  try {
    run_classify(cfg, rec);
  } catch (...) {
    rec.discard_all();
    throw;
  }
  return rec.files;
}

void write_manifest(const RunManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("manifest: cannot open '" + path + "' for writing");
  char hash_buf[32];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(m.config_hash));
  out << "config_hash = " << hash_buf << '\n';
  out << "version = " << m.version_tag << '\n';
  out << "seed = " << m.master_seed << '\n';
  out << "wall_ms = " << format_double(m.wall_ms) << '\n';
  for (const auto& f : m.outputs) out << "output = " << f << '\n';
  if (!out) throw ConfigError("manifest: write to '" + path + "' failed");
}

RunManifest run_experiment(const Config& cfg, const std::string& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  RunManifest m;
  m.config_hash = cfg.hash();
  m.version_tag = version_string;
  m.master_seed = resolve_seed(cfg);
  const std::string kind = cfg.get_string("experiment.kind");

  OutputRecorder rec;
  rec.dir = out_dir;
  try {
    if (kind == "classify")
      run_classify(cfg, rec);
    else if (kind == "simulate-flow")
      run_simulate_flow(cfg, rec, m.master_seed);
    else if (kind == "resolvent")
      run_resolvent(cfg, rec);
    else if (kind == "regularity-sweep")
      run_regularity_sweep(cfg, rec);
    else if (kind == "blowup-demo")
      run_blowup_demo(cfg, rec, m.master_seed);
    else if (kind == "moment-study")
      run_moment_study(cfg, rec, m.master_seed);
    else if (kind == "oracle-check")
      run_oracle_check(cfg, rec, m.master_seed);
    else
      throw ConfigError("experiment.kind: unknown kind '" + kind + "'");
  } catch (...) {
    rec.discard_all();
    throw;
  }

  m.outputs = rec.files;
  m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                  .count();
  write_manifest(m, out_dir + "/manifest.txt");
  return m;
}

} // namespace flowlab
