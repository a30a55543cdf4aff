#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frbm/geometry.hpp"
#include "frbm/pde_oracle.hpp"
#include "frbm/rbm_sim.hpp"

namespace frbm {

struct AnalysisOptions {
  std::vector<int> depths;         // empty: 1..N
  int bootstrap = 500;
  std::uint64_t bootstrap_seed = 0x5eed;
  double tail_s = 0.0;             // 0: empirical median of tau
  std::string records;             // records CSV for `analyze`; empty: <out>/records.csv
  std::string monitor;             // word of the monitored cell; "-" disables, "" is the root
};

struct OracleConfig {
  OracleOptions grid;
  SolverKind solver = SolverKind::Direct;
  std::string cell;                // word Q, "" for the root
  std::vector<double> b_sweep{0.4, 0.2, 0.1};
  std::vector<Vec2> probes;        // empty: default probes of D(Q)
  std::uint64_t paths_per_probe = 20000;
  double zeta_radius = 0.05;
};

struct ExperimentConfig {
  std::string mode = "simulate";
  GeometrySpec geometry;
  SimParams sim;
  std::uint64_t n_paths = 10000;
  std::vector<double> b_sweep;     // simulate/analyze over several b; empty: geometry.b only
  AnalysisOptions analysis;
  OracleConfig oracle;
};

inline const std::vector<std::string>& known_modes() {
  static const std::vector<std::string> modes{"geometry", "simulate", "analyze", "oracle", "compare",
                                              "dirichlet-contrast"};
  return modes;
}

// INI-style text: [section] headers, key = value lines, ';' comment lines.
// Sections: run, geometry, sim, analysis, oracle. Unknown sections or keys and
// malformed values throw ValidationError naming the key. Module invariants are
// re-validated.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  bool relax_gap = false;
};

ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {});
ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

// Normalized form: every key, fixed order, shortest round-trip numbers.
std::string serialize_config(const ExperimentConfig& config);

// Re-runs the module validators on a programmatically built config.
void validate(const ExperimentConfig& config);

}  // namespace frbm
