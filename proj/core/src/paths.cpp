#include "flowlab/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flowlab/errors.hpp"
#include "flowlab/rng.hpp"

namespace flowlab {

TimeGrid make_graded_grid(double T, int n, std::optional<double> singular_point, double gamma) {
  if (n < 2) throw ConfigError("make_graded_grid: need n >= 2 steps");
  if (!(gamma >= 1.0)) throw ConfigError("make_graded_grid: grading exponent must be >= 1");
  if (!(T > 0.0)) throw ConfigError("make_graded_grid: horizon must be positive");
  TimeGrid grid;
  grid.grading_exponent = gamma;
  grid.singular_point = singular_point;
  grid.nodes.resize(static_cast<std::size_t>(n) + 1);

  const auto toward_right = [gamma](double len, double u) { return len * (1.0 - std::pow(1.0 - u, gamma)); };
  const auto toward_left = [gamma](double len, double u) { return len * std::pow(u, gamma); };

  if (!singular_point || gamma == 1.0) {
    for (int k = 0; k <= n; ++k) grid.nodes[k] = T * static_cast<double>(k) / n;
    grid.nodes.back() = T;
    return grid;
  }
  const double s = *singular_point;
  if (s < 0.0 || s > T) throw ConfigError("make_graded_grid: singular point outside [0, T]");
  if (s >= T) {
    for (int k = 0; k <= n; ++k) grid.nodes[k] = toward_right(T, static_cast<double>(k) / n);
  } else if (s <= 0.0) {
    for (int k = 0; k <= n; ++k) grid.nodes[k] = toward_left(T, static_cast<double>(k) / n);
  } else {
    // proportional split; both halves graded toward the interior singularity
    int m = static_cast<int>(std::lround(n * s / T));
    m = std::clamp(m, 1, n - 1);
    for (int k = 0; k <= m; ++k)
      grid.nodes[k] = toward_right(s, static_cast<double>(k) / m);
    for (int k = 1; k <= n - m; ++k)
      grid.nodes[m + k] = s + toward_left(T - s, static_cast<double>(k) / (n - m));
  }
  grid.nodes.front() = 0.0;
  grid.nodes.back() = T;
  for (int k = 0; k < n; ++k)
    if (!(grid.nodes[k + 1] > grid.nodes[k]))
      throw NumericalError("make_graded_grid: grid nodes collapsed; reduce grading or n");
  return grid;
}

BrownianPath sample_brownian(int d, const TimeGrid& grid, std::uint64_t seed) {
  if (d < 1) throw ConfigError("sample_brownian: dimension must be >= 1");
  BrownianPath path;
  path.grid = grid;
  path.dim = d;
  path.seed = seed;
  const int n = grid.n();
  path.values.assign(static_cast<std::size_t>(n + 1) * d, 0.0);
  const int pairs = (d + 1) / 2;
  for (int k = 0; k < n; ++k) {
    const double sd = std::sqrt(grid.nodes[k + 1] - grid.nodes[k]);
    const std::uint64_t key = rng_mix(seed, static_cast<std::uint64_t>(k));
    for (int p = 0; p < pairs; ++p) {
      const NormalPair z = normal_pair(key, static_cast<std::uint64_t>(p));
      const int j0 = 2 * p, j1 = 2 * p + 1;
      path.values[(k + 1ull) * d + j0] = path.values[k * static_cast<std::size_t>(d) + j0] + sd * z.z0;
      if (j1 < d)
        path.values[(k + 1ull) * d + j1] = path.values[k * static_cast<std::size_t>(d) + j1] + sd * z.z1;
    }
  }
  return path;
}

BrownianPath refine_bridge(const BrownianPath& path, const TimeGrid& finer) {
  constexpr double snap = 1e-12;
  const auto& coarse = path.grid.nodes;
  const auto& fine = finer.nodes;
  // locate every coarse node inside the finer grid
  std::vector<int> anchor(coarse.size(), -1);
  {
    std::size_t j = 0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      while (j < fine.size() && fine[j] < coarse[i] - snap) ++j;
      if (j >= fine.size() || std::abs(fine[j] - coarse[i]) > snap)
        throw ConfigError("refine_bridge: finer grid drops an existing node");
      anchor[i] = static_cast<int>(j);
    }
  }
  BrownianPath out;
  out.grid = finer;
  out.dim = path.dim;
  out.seed = path.seed;
  const int d = path.dim;
  out.values.assign(fine.size() * static_cast<std::size_t>(d), 0.0);
  for (std::size_t i = 0; i < coarse.size(); ++i)
    for (int c = 0; c < d; ++c)
      out.values[static_cast<std::size_t>(anchor[i]) * d + c] = path.value(static_cast<int>(i), c);

  // draws are keyed by (path seed, refinement tag with target size, new-node index)
  const std::uint64_t bridge_key =
      rng_mix(path.seed, 0xB61D6EULL ^ static_cast<std::uint64_t>(finer.n()));
  const int pairs = (d + 1) / 2;
  for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
    int left = anchor[i];
    const int right = anchor[i + 1];
    // sequential insertion left-to-right, conditioning on the last filled node
    // and the fixed right anchor
    for (int m = left + 1; m < right; ++m) {
      const double tl = fine[left], tm = fine[m], tr = fine[right];
      const double frac = (tm - tl) / (tr - tl);
      const double var = (tm - tl) * (tr - tm) / (tr - tl);
      const double sd = std::sqrt(var);
      const std::uint64_t key = rng_mix(bridge_key, static_cast<std::uint64_t>(m));
      for (int p = 0; p < pairs; ++p) {
        const NormalPair z = normal_pair(key, static_cast<std::uint64_t>(p));
        const int j0 = 2 * p, j1 = 2 * p + 1;
        const double mean0 = out.values[static_cast<std::size_t>(left) * d + j0] +
                             frac * (out.values[static_cast<std::size_t>(right) * d + j0] -
                                     out.values[static_cast<std::size_t>(left) * d + j0]);
        out.values[static_cast<std::size_t>(m) * d + j0] = mean0 + sd * z.z0;
        if (j1 < d) {
          const double mean1 = out.values[static_cast<std::size_t>(left) * d + j1] +
                               frac * (out.values[static_cast<std::size_t>(right) * d + j1] -
                                       out.values[static_cast<std::size_t>(left) * d + j1]);
          out.values[static_cast<std::size_t>(m) * d + j1] = mean1 + sd * z.z1;
        }
      }
      left = m;
    }
  }
  return out;
}

double TimeProfile::operator()(double t) const {
  switch (kind) {
    case Kind::none: return 0.0;
    case Kind::blowup_at_t1: return eval_f(t, t1, alpha, eps);
    case Kind::singular_at_origin: return eval_h(t, alpha, eps, T);
  }
  return 0.0;
}

double TimeProfile::segment_integral(double a, double b) const {
  if (b <= a) return 0.0;
  const double s = sigma();
  const double one_minus = 1.0 - s; // positive: eps < (1-alpha)/2
  switch (kind) {
    case Kind::none: return 0.0;
    case Kind::blowup_at_t1: {
      const double lo = std::max(a, 0.0), hi = std::min(b, t1);
      if (hi <= lo) return 0.0;
      return (std::pow(t1 - lo, one_minus) - std::pow(t1 - hi, one_minus)) / one_minus;
    }
    case Kind::singular_at_origin: {
      const double lo = std::max(a, 0.0), hi = std::min(b, T);
      if (hi <= lo) return 0.0;
      return (std::pow(hi, one_minus) - std::pow(lo, one_minus)) / one_minus;
    }
  }
  return 0.0;
}

double TimeProfile::total_integral_bound() const {
  const double beta = 1.0 - sigma();
  const double span = kind == Kind::blowup_at_t1 ? t1 : T;
  return std::pow(span, beta) / beta;
}

TimeProfile profile_from_drift(const DriftField& drift) {
  TimeProfile p;
  p.alpha = drift.alpha;
  p.eps = drift.eps;
  p.T = drift.T;
  if (drift.kind == DriftKind::counterexample_f) {
    p.kind = TimeProfile::Kind::blowup_at_t1;
    p.t1 = drift.t1;
  } else if (drift.kind == DriftKind::counterexample_h) {
    p.kind = TimeProfile::Kind::singular_at_origin;
  }
  return p;
}

double singular_time_integral(const BrownianPath& path, const TimeProfile& profile,
                              const std::function<double(double)>& g_eval, double x, double t) {
  const auto& nodes = path.grid.nodes;
  if (t > nodes.back() + 1e-12) throw ConfigError("singular_time_integral: t beyond grid end");
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    if (nodes[k] >= t) break;
    const double hi = std::min(nodes[k + 1], t);
    const double w = profile.segment_integral(nodes[k], hi);
    if (w != 0.0) total += w * g_eval(x + path.value(static_cast<int>(k), 0));
  }
  return total;
}

} // namespace flowlab
