#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pabf/integrator.hpp"
#include "pabf/system.hpp"

// Run configuration: a flat `key = value` file with dotted section keys,
// e.g. `dynamics.dt = 5e-4`. Unknown keys are rejected; every error names
// the key and line number. The same serialization is written as the run
// manifest and re-parses to an identical RunSpec.

namespace pabf {

enum class SnapshotSchedule { Geometric, List };

struct RunSpec {
  SystemSpec system = SystemSpec::toy_defaults();

  int n1 = 64, n2 = 64;  // reaction-coordinate grid

  double dt = 5e-4;
  long n_sweeps = 2000;
  int k_sub = 10;        // integration steps per sweep (per bias refresh)
  int M = 16;            // replica count

  int n_min = 50;
  double eps_density = 1e-3;

  double tol = 1e-8;
  int max_iter = 0;      // 0 = 10 * n1 * n2

  BiasMode mode = BiasMode::Pabf;
  std::uint64_t seed = 12345;

  SnapshotSchedule schedule = SnapshotSchedule::Geometric;
  double snapshot_t0 = 0.025;
  double snapshot_growth = 2.0;
  std::vector<double> snapshot_times;  // used when schedule == List

  std::string output_dir = "out";

  double t_end() const { return static_cast<double>(n_sweeps) * k_sub * dt; }

  // Snapshot times resolved against t_end: geometric t0 * growth^j capped
  // at t_end (t_end always included), or the explicit list.
  std::vector<double> resolved_snapshot_times() const;

  void validate() const;  // throws ConfigError naming the offending field
};

// Parses the documented flat key = value format. Full-line comments start
// with '#'. Defaults are filled for missing keys; kind-dependent defaults
// (N, d, box_length) follow system.kind.
RunSpec parse_config(const std::string& text);

// Serializes every key in parseable form.
std::string serialize_config(const RunSpec& spec);

std::string to_string(BiasMode m);
BiasMode bias_mode_from_string(const std::string& name);

}  // namespace pabf
