#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowlab/config.hpp"
#include "flowlab/regime.hpp"

namespace flowlab {

struct RunManifest {
  std::uint64_t config_hash{0};
  std::string version_tag;
  std::uint64_t master_seed{0};
  double wall_ms{0.0};
  std::vector<std::string> outputs; // file names relative to the output directory
};

// builds the drift described by the drift.* keys (kind, dim, T, alpha, eps,
// t1, value, amplitude)
DriftField drift_from_config(const Config& cfg);

// dispatches on experiment.kind, writes CSV/SVG outputs plus manifest.txt into
// out_dir; partial outputs are removed if the run fails. The FLOWLAB_SEED
// environment variable overrides paths.seed.
RunManifest run_experiment(const Config& cfg, const std::string& out_dir);

void write_manifest(const RunManifest& m, const std::string& path);

// classification grid over (2/q, alpha) with the two threshold curves
std::vector<std::string> emit_regime_diagram(const Config& cfg, const std::string& out_dir);

} // namespace flowlab
