#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flowlab/config.hpp"
#include "flowlab/errors.hpp"
#include "flowlab/experiment.hpp"
#include "flowlab/version.hpp"

namespace {

// one CLI flag bound to one config key; applied only when the user passed it
struct KeyOpt {
  std::string key;
  std::string value;
  CLI::Option* opt{nullptr};
};

struct Cli {
  std::string config_path;
  std::string out_dir{"out"};
  std::string seed;
  std::vector<std::string> sets;
  std::vector<KeyOpt> keyed;

  void add_common(CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file (key = value lines)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "master seed (overrides paths.seed)");
    sub->add_option("--set", sets, "extra key=value overrides (repeatable)");
  }

  void bind(CLI::App* sub, const std::string& flag, const std::string& key,
            const std::string& desc) {
    keyed.push_back({key, "", nullptr});
    KeyOpt& ko = keyed.back();
    ko.opt = sub->add_option(flag, ko.value, desc);
  }

  void bind_flag(CLI::App* sub, const std::string& flag, const std::string& key,
                 const std::string& desc) {
    keyed.push_back({key, "true", nullptr});
    KeyOpt& ko = keyed.back();
    ko.opt = sub->add_flag(flag, desc);
  }

  void apply(flowlab::Config& cfg) const {
    for (const auto& ko : keyed)
      if (ko.opt->count() > 0) cfg.set(ko.key, ko.value);
    for (const auto& kv : sets) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw flowlab::ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!seed.empty()) cfg.set("paths.seed", seed);
  }
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for stochastic flows with irregular drift"};
  app.set_version_flag("--version", flowlab::version_string);
  app.require_subcommand(1);

  Cli cli;
  // keyed.push_back must never reallocate after bind() hands out pointers
  cli.keyed.reserve(64);

  CLI::App* classify = app.add_subcommand("classify", "regime diagram over (alpha, 2/q)");
  cli.add_common(classify);
  cli.bind(classify, "--resolution", "classify.resolution", "cells per axis");
  cli.bind(classify, "--d", "classify.d", "space dimension");

  CLI::App* flow = app.add_subcommand("simulate-flow", "integrate one characteristic trajectory");
  cli.add_common(flow);
  cli.bind(flow, "--drift", "drift.kind", "zero|constant|smooth_bump|counterexample_f|counterexample_h");
  cli.bind(flow, "--t", "flow.t", "terminal time");
  cli.bind(flow, "--x0", "flow.x0", "start point, comma separated");
  cli.bind(flow, "--n-steps", "paths.n_steps", "time steps");
  cli.bind(flow, "--alpha", "drift.alpha", "spatial power exponent");
  cli.bind(flow, "--eps", "drift.eps", "time profile margin");
  cli.bind(flow, "--t1", "drift.t1", "blow-up time of the f profile");
  cli.bind_flag(flow, "--jacobian", "flow.jacobian", "also write the propagated Jacobian");

  CLI::App* resolvent = app.add_subcommand("resolvent", "heat-semigroup resolvent on a grid");
  cli.add_common(resolvent);
  cli.bind(resolvent, "--lambda", "resolvent.lambda", "resolvent parameter");
  cli.bind(resolvent, "--grid-h", "grid.h", "mesh width");
  cli.bind(resolvent, "--box", "grid.half_width", "box half-width");
  cli.bind(resolvent, "--f-profile", "resolvent.f_profile", "constant|fourier|holder_bump");
  cli.bind(resolvent, "--dim", "resolvent.dim", "grid dimension (1 or 2)");
  cli.bind(resolvent, "--T", "resolvent.T", "terminal time");
  cli.bind(resolvent, "--t", "resolvent.t", "evaluation time");

  CLI::App* sweep = app.add_subcommand("regularity-sweep", "sup |grad U| decay across lambdas");
  cli.add_common(sweep);
  cli.bind(sweep, "--lambdas", "sweep.lambdas", "comma-separated lambda list");
  cli.bind(sweep, "--grid-h", "grid.h", "mesh width");
  cli.bind(sweep, "--box", "grid.half_width", "box half-width");

  CLI::App* blowup = app.add_subcommand("blowup-demo", "cutoff sweep of the gradient norm");
  cli.add_common(blowup);
  cli.bind(blowup, "--n-paths", "mc.n_paths", "Monte Carlo paths");
  cli.bind(blowup, "--deltas", "blowup.deltas", "comma-separated cutoffs");
  cli.bind(blowup, "--R", "datum.R", "datum support radius");
  cli.bind(blowup, "--mode", "sobolev.mode", "chain_rule|product_frobenius");
  cli.bind(blowup, "--workers", "mc.workers", "worker threads (0 = all cores)");

  CLI::App* moment = app.add_subcommand("moment-study", "inverse-gradient moment stability");
  cli.add_common(moment);
  cli.bind(moment, "--r", "moment.r", "moment exponent");
  cli.bind(moment, "--R", "moment.R", "ball radius");
  cli.bind(moment, "--levels", "moment.levels", "grid_x:t_nodes pairs, comma separated");
  cli.bind(moment, "--n-paths", "mc.n_paths", "Monte Carlo paths");
  cli.bind(moment, "--workers", "mc.workers", "worker threads (0 = all cores)");

  CLI::App* oracle = app.add_subcommand("oracle-check", "quadrature vs Monte Carlo agreement");
  cli.add_common(oracle);
  cli.bind(oracle, "--tuples", "oracle.tuples", "x:s:t1:R:alpha tuples, ';' separated");
  cli.bind(oracle, "--n", "mc.n", "Monte Carlo samples per tuple");
  cli.bind(oracle, "--workers", "mc.workers", "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e); // --help / --version
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const char* kinds[] = {"classify",    "simulate-flow",    "resolvent", "regularity-sweep",
                         "blowup-demo", "moment-study",     "oracle-check"};
  CLI::App* subs[] = {classify, flow, resolvent, sweep, blowup, moment, oracle};

  try {
    flowlab::Config cfg;
    if (!cli.config_path.empty()) cfg = flowlab::Config::load(cli.config_path);
    for (int i = 0; i < 7; ++i)
      if (subs[i]->parsed()) cfg.set("experiment.kind", kinds[i]);
    cli.apply(cfg);

    const flowlab::RunManifest m = flowlab::run_experiment(cfg, cli.out_dir);
    std::printf("%s: %zu output(s) in %s (seed %llu, %.1f ms)\n",
                cfg.get_string("experiment.kind").c_str(), m.outputs.size(), cli.out_dir.c_str(),
                static_cast<unsigned long long>(m.master_seed), m.wall_ms);
    for (const auto& f : m.outputs) std::printf("  %s\n", f.c_str());
    return 0;
  } catch (const flowlab::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const flowlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
