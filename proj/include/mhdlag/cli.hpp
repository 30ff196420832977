#pragma once

// Batch front end: flat config files, scenario presets, the run / check /
// probe / push-forward commands and their artifacts.

#include "mhdlag/diagnostics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mhdlag {

/// Bad command line, missing or unreadable input. Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Grid grid;
  IterationConfig iteration;
  std::string scenario = "small-mode";
  std::uint64_t seed = 1;
  std::string out = "out";
  int cadence = 10;      // snapshot every `cadence` levels, last level always
  int workers = 1;       // command-line only; outputs do not depend on it
  double amplitude = 0.002;
  double pollution = 0.5;          // polluted-divergence: relative size of the div H0 mode
  double surface_amplitude = 0.0;  // h0 = surface_amplitude cos(x + y)
  double eps0 = 5.0;               // continuation threshold
  int probe_n = 12;
  double probe_T0 = 1e-5;
  int probe_levels = 9;
  int probe_trials = 4;
  std::string initial_data;  // snapshot directory replacing the preset

  /// One `key = value` line per key in table order, doubles in shortest
  /// round-trip form.
  std::string canonical() const;
};

struct ConfigKey {
  std::string name;
  std::string doc;
};

/// Every accepted key with a one-line description.
const std::vector<ConfigKey>& config_keys();

/// Parses `key = value` lines; `#` starts a comment. Errors name the source,
/// line and key. Throws ConfigError.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
/// Throws UsageError when the file cannot be read.
RunConfig load_config(const std::string& path);

struct InitialData {
  VectorField u0;
  VectorField H0;
  SurfaceField h0;
};

/// Preset generator for config.scenario, or the snapshot files in
/// config.initial_data (v_*, B_*, h). Missing files throw UsageError.
InitialData make_initial_data(const RunConfig& config);

/// Spatial norms logged for the final level of a run: v and B in W^{l+1},
/// h in W^{l+3/2}.
struct StateNorms {
  double v = 0.0, B = 0.0, h = 0.0;
};
StateNorms state_norms(const VectorField& v, const VectorField& B, const SurfaceField& h, double l);

/// Deposits Lagrangian nodal values at xi + displacement onto the grid nodes
/// with trilinear weights (periodic horizontally, clamped vertically) and
/// divides by the deposited weight. First order; for visualization.
struct PushForward {
  ScalarField field;
  int empty_nodes = 0;  // nodes that received no weight, left at 0
};
PushForward push_forward(const ScalarField& f, const VectorField& displacement);

/// Exit codes.
enum ExitCode : int { exit_ok = 0, exit_diagnostic = 1, exit_usage = 2, exit_noncontraction = 3 };

/// Compatibility of the initial data; JSON report on stdout.
int cmd_check(const RunConfig& config);
/// Solver run with artifacts in config.out. `halvings` retries with T / 2 up
/// to that many times (at most 3) after non-contraction.
int cmd_run(const RunConfig& config, int halvings = 0);
/// Inequality probes, probe.json and probe.csv in config.out. Exit 0 unless
/// the output cannot be written.
int cmd_probe(const RunConfig& config);
/// Pushes every snapshot of a finished run in config.out forward to Eulerian
/// positions under config.out/eulerian.
int cmd_pushfwd(const RunConfig& config);

}  // namespace mhdlag
