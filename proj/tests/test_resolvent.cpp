#include "doctest.h"

#include "flowlab/errors.hpp"
#include "flowlab/resolvent.hpp"
#include "flowlab/rng.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace flowlab;

namespace {
// frozen reference: (1 - e^{-2}) / 2
constexpr double kConstU = 0.43233235838169365;
// frozen reference: (1 - e^{-5/2}) / (5/2), the unit-frequency response
constexpr double kSineAmp = 0.36716600055044046;

GridFunction constant_one(const GridBox& box) {
  return make_grid_function(box, [](const Vec&) { return 1.0; });
}
} // namespace

TEST_SUITE("resolvent") {

TEST_CASE("grid boxes expose spacing and coordinates") {
  const GridBox g1 = make_grid_1d(-2.0, 2.0, 401);
  CHECK(g1.h(0) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(g1.coord(0, 200) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g1.node_count() == 401);

  const GridBox g2 = make_grid_2d(7.5, 201);
  CHECK(g2.dim == 2);
  CHECK(g2.h(1) == doctest::Approx(0.075).epsilon(1e-14));
  CHECK(g2.node_count() == 201u * 201u);

  CHECK_THROWS_AS(make_grid_1d(1.0, -1.0, 11), ConfigError);
  CHECK_THROWS_AS(make_grid_2d(0.0, 11), ConfigError);
}

TEST_CASE("heat kernel point values") {
  // (2 pi)^{-1/2} at the 1d origin with unit variance
  CHECK(heat_kernel(1.0, vec1(0.0)) == doctest::Approx(0.39894228040143268).epsilon(1e-15));
  // d=2, r=1/2, |x|=1: (2 pi r)^{-1} e^{-1} = 1/(pi e)
  CHECK(heat_kernel(0.5, vec2(1.0, 0.0)) == doctest::Approx(0.11709966304863832).epsilon(1e-15));
  CHECK_THROWS_AS(heat_kernel(0.0, vec1(0.0)), ConfigError);
  CHECK_THROWS_AS(heat_kernel(-1.0, vec1(0.0)), ConfigError);
}

TEST_CASE("kernel taps: unit sum always, unit raw mass once the grid resolves r") {
  for (double r : {1e-4, 1e-3, 1e-2, 0.1, 1.0}) {
    double raw = 0.0;
    const auto taps = heat_kernel_taps(r, 0.01, &raw);
    REQUIRE(taps.size() % 2 == 1); // symmetric around the center tap
    double sum = 0.0;
    for (double w : taps) sum += w;
    CHECK(std::abs(sum - 1.0) < 1e-14);
    // defect of the h-scaled Riemann mass: tiny whenever r >= h^2
    CHECK(std::abs(raw - 1.0) < 1e-8);
  }
  // below the grid resolution the raw mass degrades and normalization carries it
  double raw = 0.0;
  (void)heat_kernel_taps(1e-5, 0.01, &raw);
  CHECK(raw > 1.2);
  CHECK_THROWS_AS(heat_kernel_taps(0.0, 0.01), ConfigError);
}

TEST_CASE("semigroup preserves constants and flags boundary truncation") {
  const GridBox box = make_grid_2d(8.0, 41);
  GridFunction one = constant_one(box);
  bool warn = false;
  const GridFunction out = semigroup_apply(one, 0.5, &warn);
  CHECK(!warn);
  for (double v : out.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));

  // truncation radius 6 sqrt(r) beyond the half-width trips the flag
  CHECK(!semigroup_boundary_pollution(box, 1.0));
  CHECK(semigroup_boundary_pollution(box, 2.0));
  warn = false;
  (void)semigroup_apply(one, 2.0, &warn);
  CHECK(warn);
}

TEST_CASE("discrete sine is an exact eigenvector away from the boundary") {
  const GridBox box = make_grid_1d(-8.0, 8.0, 1601);
  const GridFunction phi = make_grid_function(box, [](const Vec& x) { return std::sin(x[0]); });
  const double r = 0.25;
  const GridFunction out = semigroup_apply(phi, r);
  // the symbol of the normalized symmetric taps at unit frequency
  const auto taps = heat_kernel_taps(r, box.h(0));
  const int half = static_cast<int>(taps.size()) / 2;
  double mu = 0.0;
  for (int m = -half; m <= half; ++m)
    mu += taps[static_cast<std::size_t>(m + half)] * std::cos(m * box.h(0));
  // interior nodes more than 6 sqrt(r) from the edge see the full stencil
  for (int i = 0; i < 1601; ++i) {
    const double x = box.coord(0, i);
    if (std::abs(x) > 8.0 - 6.0 * std::sqrt(r) - 0.1) continue;
    CHECK(out.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(mu * std::sin(x)).epsilon(1e-12));
  }
  // and the symbol is close to the continuum multiplier e^{-r/2}
  CHECK(mu == doctest::Approx(std::exp(-0.5 * r)).epsilon(1e-6));
}

TEST_CASE("constant source: U matches (1 - e^{-lambda(T-t)}) / lambda") {
  const GridBox box = make_grid_1d(-8.0, 8.0, 1601);
  SeparableSource f{nullptr, constant_one(box)};
  const ResolventResult res = resolvent_solve(f, 2.0, 1.0, 0.0);
  for (double v : res.U.values) CHECK(v == doctest::Approx(kConstU).epsilon(1e-9));
  CHECK(!res.boundary_warning);
  CHECK(res.U.time_label == doctest::Approx(0.0));

  // interior evaluation time shrinks the window
  const ResolventResult mid = resolvent_solve(f, 2.0, 1.0, 0.75);
  const double expect = (1.0 - std::exp(-2.0 * 0.25)) / 2.0;
  CHECK(mid.U.values[800] == doctest::Approx(expect).epsilon(1e-9));

  // at t = T the window is empty
  const ResolventResult top = resolvent_solve(f, 2.0, 1.0, 1.0);
  for (double v : top.U.values) CHECK(v == 0.0);
}

TEST_CASE("sine source: amplitude matches the damped frequency response") {
  const GridBox box = make_grid_1d(-8.0, 8.0, 1601);
  SeparableSource f{nullptr,
                    make_grid_function(box, [](const Vec& x) { return std::sin(x[0]); })};
  const ResolventResult res = resolvent_solve(f, 2.0, 1.0, 0.0);
  for (int i = 0; i < 1601; ++i) {
    const double x = box.coord(0, i);
    if (std::abs(x) > 1.5) continue; // boundary-clean core
    CHECK(res.U.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(kSineAmp * std::sin(x)).epsilon(1e-8));
  }
}

TEST_CASE("backward-equation residual vanishes to discretization order") {
  const GridBox box = make_grid_1d(-8.0, 8.0, 1601);
  SeparableSource f{nullptr, constant_one(box)};
  std::vector<GridFunction> slices;
  std::vector<double> times;
  for (int k = 0; k < 3; ++k) {
    const double t = 0.01 * k;
    slices.push_back(resolvent_solve(f, 2.0, 1.0, t).U);
    times.push_back(t);
  }
  const double r =
      pde_residual(slices, times, [](double, const Vec&) { return 1.0; }, 2.0, 6.0);
  CHECK(r < 1e-3); // measured ~9.2e-6 at h = dt = 0.01
  CHECK_THROWS_AS(
      pde_residual({slices[0]}, {0.0}, [](double, const Vec&) { return 1.0; }, 2.0, 6.0),
      ConfigError);
}

TEST_CASE("multi-lambda solve shares propagator applications without drift") {
  const GridBox box = make_grid_2d(4.0, 81);
  SeparableSource f{nullptr, make_grid_function(box, [](const Vec& x) {
                      return std::exp(-x.norm() * x.norm());
                    })};
  const std::vector<double> lambdas{1.0, 4.0, 16.0};
  const auto multi = resolvent_solve_multi(f, lambdas, 1.0, 0.0);
  REQUIRE(multi.size() == 3);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const ResolventResult single = resolvent_solve(f, lambdas[i], 1.0, 0.0);
    double dev = 0.0;
    for (std::size_t k = 0; k < single.U.values.size(); ++k)
      dev = std::max(dev, std::abs(single.U.values[k] - multi[i].U.values[k]));
    CHECK(dev == 0.0); // identical quadrature path, identical floating result
  }
  CHECK_THROWS_AS(resolvent_solve_multi(f, {}, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(resolvent_solve_multi(f, {-1.0}, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(resolvent_solve_multi(f, {1.0}, 1.0, 2.0), ConfigError);
}

TEST_CASE("a non-finite time factor is rejected, not integrated") {
  const GridBox box = make_grid_1d(-2.0, 2.0, 41);
  SeparableSource f{[](double) { return std::numeric_limits<double>::infinity(); },
                    constant_one(box)};
  CHECK_THROWS_AS(resolvent_solve(f, 1.0, 1.0, 0.0), NumericalError);
}

TEST_CASE("max gradient: exact on affine fields") {
  const GridBox box = make_grid_2d(4.0, 81);
  const GridFunction plane =
      make_grid_function(box, [](const Vec& x) { return 2.0 * x[0] + x[1]; });
  CHECK(max_gradient(plane, 2.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("gradient of the resolvent decays as lambda grows") {
  // singular-in-time source with a Holder spatial bump, coarse 2d fixture
  const GridBox box = make_grid_2d(7.5, 101);
  SeparableSource f{[](double t) { return std::pow(t, -0.2); },
                    make_grid_function(box, [](const Vec& x) {
                      return std::max(0.0, 1.0 - std::pow(x.norm(), 0.6));
                    })};
  const std::vector<double> lambdas{1.0, 4.0, 16.0, 64.0};
  const auto rows = gradient_decay_study(f, lambdas, 1.0, 0.0, 1.5);
  REQUIRE(rows.size() == 4);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].first == lambdas[i]);
    CHECK(rows[i].second > 0.0);
    if (i > 0) CHECK(rows[i].second <= rows[i - 1].second); // monotone decay
    const double lx = std::log(rows[i].first), ly = std::log(rows[i].second);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(rows.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope <= -0.3); // measured -0.42 on this fixture
  CHECK_THROWS_AS(gradient_decay_study(f, {4.0, 1.0}, 1.0, 0.0, 1.5), ConfigError);
}

TEST_CASE("holder seminorm: exact on a power kink, stable across meshes") {
  // |x|^{0.6} with the kink on both lattices: the ratio through zero is 1
  const auto kink = [](const Vec& x) { return std::pow(std::abs(x[0]), 0.6); };
  const double exact = holder_seminorm(make_grid_function(make_grid_1d(-2, 2, 201), kink), 0.6, 0.08);
  CHECK(exact == doctest::Approx(1.0).epsilon(1e-12));

  // off-lattice kink, non-nested meshes, shared separation floor 4 h_coarse:
  // the discrete seminorm is a stable estimate of the same continuum quantity
  const auto off = [](const Vec& x) { return std::pow(std::abs(x[0] - 0.005), 0.6); };
  const double sc = holder_seminorm(make_grid_function(make_grid_1d(-2, 2, 201), off), 0.6, 0.08);
  const double sf = holder_seminorm(make_grid_function(make_grid_1d(-2, 2, 301), off), 0.6, 0.08);
  CHECK(sf / sc == doctest::Approx(1.0).epsilon(0.1));

  CHECK_THROWS_AS(holder_seminorm(make_grid_function(make_grid_1d(-2, 2, 11), kink), 1.5),
                  ConfigError);
}

TEST_CASE("zero drift yields the identity coordinate change") {
  const GridBox box = make_grid_1d(-4.0, 4.0, 201);
  const ZvonkinMap map = solve_zvonkin_potential(make_zero_drift(1, 1.0), 2.0, 1.0, box, 5);
  CHECK(map.sup_gradient == 0.0);
  CHECK(map.u(0.3, 0.7) == 0.0);
  CHECK(map.gamma(0.3, 0.7) == 0.7);
  CHECK(map.gamma_inverse(0.3, 0.7) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("potential solve: frozen magnitudes and slice-count stability") {
  const DriftField b = make_smooth_bump_drift(1, 0.5, 1.0);
  const GridBox box = make_grid_1d(-6.0, 6.0, 601);
  const ZvonkinMap map = solve_zvonkin_potential(b, 50.0, 1.0, box, 21);
  CHECK(map.lambda == 50.0);
  CHECK(map.times.front() == 0.0);
  CHECK(map.times.back() == 1.0);
  double supU = 0.0;
  for (const auto& s : map.U)
    for (double v : s) supU = std::max(supU, std::abs(v));
  // measured 0.009786 at lambda = 50, amplitude 0.5
  CHECK(supU == doctest::Approx(0.009786).epsilon(0.02));
  CHECK(map.sup_gradient == doctest::Approx(0.0174).epsilon(0.05));
  CHECK(map.sup_gradient < 1.0);

  // doubling the slice count moves interpolated values only marginally
  const ZvonkinMap fine = solve_zvonkin_potential(b, 50.0, 1.0, box, 41);
  for (double t : {0.1, 0.5, 0.9})
    for (double x : {-0.7, 0.0, 0.4})
      CHECK(map.u(t, x) == doctest::Approx(fine.u(t, x)).epsilon(1e-3));

  // coordinate-change inversion round-trips
  for (double t : {0.0, 0.37, 1.0})
    for (double y : {-1.2, 0.1, 2.4})
      CHECK(std::abs(map.gamma(t, map.gamma_inverse(t, y)) - y) < 1e-9);
}

TEST_CASE("potential solve rejects malformed requests") {
  const GridBox box = make_grid_1d(-4.0, 4.0, 201);
  const DriftField b = make_smooth_bump_drift(1, 0.5, 1.0);
  CHECK_THROWS_AS(solve_zvonkin_potential(b, -1.0, 1.0, box, 5), ConfigError);
  CHECK_THROWS_AS(solve_zvonkin_potential(b, 2.0, 1.0, box, 1), ConfigError);
  CHECK_THROWS_AS(solve_zvonkin_potential(make_smooth_bump_drift(2, 0.5, 1.0), 2.0, 1.0, box, 5),
                  ConfigError);
  const GridBox box2 = make_grid_2d(4.0, 41);
  CHECK_THROWS_AS(solve_zvonkin_potential(b, 2.0, 1.0, box2, 5), ConfigError);
}

TEST_CASE("transform construction refuses a non-diffeomorphic table") {
  const GridBox box = make_grid_1d(-1.0, 1.0, 21);
  std::vector<double> steep(21);
  for (int i = 0; i < 21; ++i) steep[static_cast<std::size_t>(i)] = -1.5 * box.coord(0, i);
  // d(x + U)/dx = -0.5 < 0: gamma is not invertible
  CHECK_THROWS_AS(zvonkin_transform({0.0, 1.0}, box, {steep, steep}, 2.0), NumericalError);
  CHECK_THROWS_AS(zvonkin_transform({0.0}, box, {steep}, 2.0), ConfigError);
}

TEST_CASE("transformed route tracks the direct route, sharper with the correction") {
  const DriftField b = make_smooth_bump_drift(1, 0.5, 1.0);
  const GridBox box = make_grid_1d(-8.0, 8.0, 1601);
  const ZvonkinMap map = solve_zvonkin_potential(b, 50.0, 1.0, box, 41);
  double euler = 0.0, first = 0.0;
  const int n_seeds = 3;
  for (int i = 0; i < n_seeds; ++i) {
    const TimeGrid g = make_graded_grid(1.0, 1 << 12, {}, 1.0);
    const BrownianPath p = sample_brownian(1, g, rng_mix(3, static_cast<std::uint64_t>(i)));
    euler += transformed_sde_step_equivalence(b, map, p, 0.3, 1.0, TransformedScheme::euler);
    first += transformed_sde_step_equivalence(b, map, p, 0.3, 1.0, TransformedScheme::first_order);
  }
  euler /= n_seeds;
  first /= n_seeds;
  CHECK(first < 1e-3);  // measured ~5e-5
  CHECK(euler < 2e-3);  // measured ~3e-4
  CHECK(first < euler); // the second-order correction pays

  const BrownianPath p2 = sample_brownian(2, make_graded_grid(1.0, 64, {}, 1.0), 1);
  CHECK_THROWS_AS(transformed_sde_step_equivalence(b, map, p2, 0.0, 1.0), ConfigError);
}

} // TEST_SUITE
