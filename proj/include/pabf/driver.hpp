#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "pabf/diagnostics.hpp"
#include "pabf/estimator.hpp"
#include "pabf/grid.hpp"
#include "pabf/integrator.hpp"
#include "pabf/projection.hpp"
#include "pabf/run_config.hpp"

// Orchestrates the coupled loop: freeze the bias from the current
// estimator state (projected in PABF mode, raw in ABF mode), advance the
// ensemble k_sub steps depositing every step, and record fields and
// diagnostics at the scheduled snapshot times. The diagnostic projection
// (A, grad A) is computed at snapshots in both modes so the two methods
// are compared through identical statistics.

namespace pabf {

struct SnapshotRecord {
  double t = 0.0;
  VectorFieldd F;           // current mean-force estimate
  ScalarFieldd A;           // projected potential (diagnostic in ABF mode)
  VectorFieldd gradA;       // its discrete gradient
  ScalarFieldd psi;         // unfloored density estimate
  Marginals marg;
  double l2_err = std::numeric_limits<double>::quiet_NaN();  // vs analytic reference
  double flat1 = 0.0, flat2 = 0.0;
  std::int64_t min_count = 0;  // smallest bin count (ramp-phase tracking)
};

struct RunOutput {
  RunSpec spec;
  std::vector<SnapshotRecord> snapshots;
  BiasState final_state;
  // per-sweep flatness trace, for threshold-crossing diagnostics
  std::vector<double> trace_t, trace_flat1, trace_flat2;
  long long total_solver_iterations = 0;
};

RunOutput run(const RunSpec& spec);

// R independent runs with seeds derived from (spec.seed, run index),
// aligned on identical snapshot times. Runs execute on parallel workers
// when `parallel` is set; results are identical either way.
std::vector<RunOutput> run_replicated(const RunSpec& spec, int R, bool parallel = true);

// RunOutput directory layout: meta.txt (re-parseable RunSpec), summary.txt,
// timeseries.csv, flatness_trace.csv, bias_state.csv and one snapNNN/
// directory per snapshot with F.csv, A.csv, gradA.csv, psi.csv,
// marginals.csv. Cross-run variance columns are written as nan for a
// single run.
void write_run_output(const std::filesystem::path& dir, const RunOutput& out);

// Writes run_NNN/ subdirectories plus a set-level timeseries.csv whose
// int_var columns hold the cross-run integrated variances and whose error
// and flatness columns hold run averages.
void write_replicated_output(const std::filesystem::path& dir,
                             const std::vector<RunOutput>& runs);

struct ComparisonRow {
  double t = 0.0;
  double abf_var_F = 0.0, abf_var_F_se = 0.0;
  double abf_var_gradA = 0.0, abf_var_gradA_se = 0.0;
  double pabf_var_F = 0.0, pabf_var_F_se = 0.0;
  double pabf_var_gradA = 0.0, pabf_var_gradA_se = 0.0;
  double abf_var_F_norm = 0.0, pabf_var_gradA_norm = 0.0;  // |.|-norm statistic
  double abf_l2 = 0.0, pabf_l2 = 0.0;                      // run-averaged
  double abf_flat1 = 0.0, abf_flat2 = 0.0, pabf_flat1 = 0.0, pabf_flat2 = 0.0;
};

struct ComparisonResult {
  std::vector<RunOutput> abf_runs, pabf_runs;
  std::vector<ComparisonRow> rows;
};

// Runs R replicated runs in each mode off the same base configuration and
// assembles the joint per-snapshot comparison.
ComparisonResult compare_modes(const RunSpec& spec, int R, bool parallel = true);

void write_comparison(const std::filesystem::path& dir, const ComparisonResult& cmp);

// First simulated time at which both marginal flatness values are at or
// below tau (from the per-sweep trace); +inf if never reached.
double time_to_flatness(const RunOutput& out, double tau);

}  // namespace pabf
