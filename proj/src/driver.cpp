#include "pabf/driver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <string>

#include "pabf/errors.hpp"
#include "pabf/field_io.hpp"
#include "pabf/rng.hpp"

namespace pabf {

namespace {

double neg_log(double x) { return -std::log(std::max(x, 1e-300)); }

std::ofstream open_out(const std::filesystem::path& path)
{
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  return os;
}

std::string snap_dir_name(std::size_t idx)
{
  char buf[16];
  std::snprintf(buf, sizeof buf, "snap%03zu", idx);
  return buf;
}

}  // namespace

RunOutput run(const RunSpec& spec)
{
  spec.validate();

  const RCGrid grid(spec.n1, spec.n2);
  const SystemSpec& sys = spec.system;
  const int max_iter = spec.max_iter > 0 ? spec.max_iter : 10 * spec.n1 * spec.n2;

  RunOutput out;
  out.spec = spec;
  out.final_state = BiasState(grid, spec.n_min, spec.eps_density);

  const bool have_reference = sys.kind == SystemKind::ToySeparable;
  ScalarFieldd A_ref;
  if (have_reference) A_ref = analytic_free_energy(sys, grid);

  Ensemble ens = make_ensemble(sys, spec.M, spec.seed);
  BiasState& bias = out.final_state;

  const std::vector<double> snap_times = spec.resolved_snapshot_times();
  std::size_t snap_idx = 0;

  ScalarFieldd warm_bias(grid), warm_diag(grid);

  for (long sweep = 0; sweep < spec.n_sweeps; ++sweep) {
    // (a) freeze the bias from all deposits so far
    BiasForceView view;
    view.mode = spec.mode;
    try {
      if (spec.mode == BiasMode::Pabf) {
        const VectorFieldd F = force_field(bias);
        const ScalarFieldd psi = density_field(bias, true);
        ProjectionResultd res = project(F, psi, spec.tol, max_iter, &warm_bias);
        out.total_solver_iterations += res.iterations;
        warm_bias = res.A;
        view.field = std::move(res.gradA);
      } else {
        view.field = force_field(bias);
      }
    } catch (const SolverError& e) {
      throw SolverError("sweep " + std::to_string(sweep) + ": " + e.what(), e.residual(),
                        e.iterations());
    }

    // (b) advance under the frozen bias, depositing every step
    try {
      for (int k = 0; k < spec.k_sub; ++k) step(sys, ens, view, spec.dt, &bias);
    } catch (const BlowupError& e) {
      throw BlowupError("sweep " + std::to_string(sweep) + ": " + e.what(), e.replica(),
                        e.step());
    }

    // (c) diagnostics at the sweep boundary
    const ScalarFieldd psi_raw = density_field(bias, false);
    const Marginals marg = marginals(psi_raw);
    const double f1 = flatness(marg.m1), f2 = flatness(marg.m2);
    out.trace_t.push_back(ens.time);
    out.trace_flat1.push_back(f1);
    out.trace_flat2.push_back(f2);

    if (snap_idx < snap_times.size() && ens.time >= snap_times[snap_idx] - 0.5 * spec.dt) {
      while (snap_idx < snap_times.size() && ens.time >= snap_times[snap_idx] - 0.5 * spec.dt)
        ++snap_idx;  // collapse schedule entries crossed within one sweep

      SnapshotRecord rec;
      rec.t = ens.time;
      rec.F = force_field(bias);
      const ScalarFieldd psi_floored = density_field(bias, true);
      try {
        ProjectionResultd res = project(rec.F, psi_floored, spec.tol, max_iter, &warm_diag);
        out.total_solver_iterations += res.iterations;
        warm_diag = res.A;
        rec.A = std::move(res.A);
        rec.gradA = std::move(res.gradA);
      } catch (const SolverError& e) {
        throw SolverError("snapshot at t=" + std::to_string(ens.time) + ": " + e.what(),
                          e.residual(), e.iterations());
      }
      rec.psi = psi_raw;
      rec.marg = marg;
      rec.flat1 = f1;
      rec.flat2 = f2;
      rec.min_count = bias.count.minCoeff();
      if (have_reference) rec.l2_err = l2_error(rec.A, A_ref);
      out.snapshots.push_back(std::move(rec));
    }
  }
  return out;
}

std::vector<RunOutput> run_replicated(const RunSpec& spec, int R, bool parallel)
{
  if (R < 1) throw std::invalid_argument("run_replicated: need at least one run");
  std::vector<RunSpec> specs(R, spec);
  for (int r = 0; r < R; ++r) specs[r].seed = derive_seed(spec.seed, 1000003ULL + r);

  std::vector<RunOutput> outs(R);
  if (parallel && R > 1) {
    std::vector<std::future<RunOutput>> futs;
    futs.reserve(R);
    for (int r = 0; r < R; ++r)
      futs.push_back(std::async(std::launch::async, [&specs, r] { return run(specs[r]); }));
    for (int r = 0; r < R; ++r) outs[r] = futs[r].get();
  } else {
    for (int r = 0; r < R; ++r) outs[r] = run(specs[r]);
  }
  return outs;
}

void write_run_output(const std::filesystem::path& dir, const RunOutput& out)
{
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  open_out(dir / "meta.txt") << serialize_config(out.spec);

  {
    auto os = open_out(dir / "summary.txt");
    os << "total_deposits = " << out.final_state.total_count() << '\n';
    os << "snapshots = " << out.snapshots.size() << '\n';
    os << "solver_iterations = " << out.total_solver_iterations << '\n';
    if (!out.snapshots.empty()) {
      os << "final_l2_error = " << format_double(out.snapshots.back().l2_err) << '\n';
      os << "final_flatness1 = " << format_double(out.snapshots.back().flat1) << '\n';
      os << "final_flatness2 = " << format_double(out.snapshots.back().flat2) << '\n';
    }
  }

  {
    auto os = open_out(dir / "timeseries.csv");
    os << "t,int_var_F,int_var_gradA,l2_error,neg_log_flatness1,neg_log_flatness2\n";
    for (const auto& s : out.snapshots)
      os << format_double(s.t) << ",nan,nan," << format_double(s.l2_err) << ','
         << format_double(neg_log(s.flat1)) << ',' << format_double(neg_log(s.flat2)) << '\n';
  }

  {
    auto os = open_out(dir / "flatness_trace.csv");
    os << "t,flatness1,flatness2\n";
    for (std::size_t k = 0; k < out.trace_t.size(); ++k)
      os << format_double(out.trace_t[k]) << ',' << format_double(out.trace_flat1[k]) << ','
         << format_double(out.trace_flat2[k]) << '\n';
  }

  {
    auto os = open_out(dir / "bias_state.csv");
    save_bias_state(os, out.final_state);
  }

  for (std::size_t k = 0; k < out.snapshots.size(); ++k) {
    const auto& s = out.snapshots[k];
    const fs::path sdir = dir / snap_dir_name(k);
    fs::create_directories(sdir);
    write_field(sdir / "F.csv", s.F);
    write_field(sdir / "A.csv", s.A);
    write_field(sdir / "gradA.csv", s.gradA);
    write_field(sdir / "psi.csv", s.psi);
    write_marginals(sdir / "marginals.csv", s.F.grid, s.marg);
  }
}

namespace {

std::string run_dir_name(int r)
{
  char buf[16];
  std::snprintf(buf, sizeof buf, "run_%03d", r);
  return buf;
}

void check_aligned(const std::vector<RunOutput>& runs)
{
  for (const auto& r : runs) {
    if (r.snapshots.size() != runs.front().snapshots.size())
      throw std::runtime_error("replicated runs are not snapshot-aligned");
    for (std::size_t k = 0; k < r.snapshots.size(); ++k)
      if (r.snapshots[k].t != runs.front().snapshots[k].t)
        throw std::runtime_error("replicated runs disagree on snapshot times");
  }
}

}  // namespace

void write_replicated_output(const std::filesystem::path& dir, const std::vector<RunOutput>& runs)
{
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (std::size_t r = 0; r < runs.size(); ++r)
    write_run_output(dir / run_dir_name(static_cast<int>(r)), runs[r]);

  if (runs.empty()) return;
  check_aligned(runs);

  auto os = open_out(dir / "timeseries.csv");
  os << "t,int_var_F,int_var_gradA,l2_error,neg_log_flatness1,neg_log_flatness2\n";
  const std::size_t n_snap = runs.front().snapshots.size();
  for (std::size_t k = 0; k < n_snap; ++k) {
    std::vector<VectorFieldd> Fs, Gs;
    double l2 = 0.0, f1 = 0.0, f2 = 0.0;
    for (const auto& r : runs) {
      Fs.push_back(r.snapshots[k].F);
      Gs.push_back(r.snapshots[k].gradA);
      l2 += r.snapshots[k].l2_err;
      f1 += r.snapshots[k].flat1;
      f2 += r.snapshots[k].flat2;
    }
    const double R = static_cast<double>(runs.size());
    const double var_F = runs.size() > 1 ? integrated_variance(Fs)
                                         : std::numeric_limits<double>::quiet_NaN();
    const double var_G = runs.size() > 1 ? integrated_variance(Gs)
                                         : std::numeric_limits<double>::quiet_NaN();
    os << format_double(runs.front().snapshots[k].t) << ',' << format_double(var_F) << ','
       << format_double(var_G) << ',' << format_double(l2 / R) << ','
       << format_double(neg_log(f1 / R)) << ',' << format_double(neg_log(f2 / R)) << '\n';
  }
}

ComparisonResult compare_modes(const RunSpec& spec, int R, bool parallel)
{
  if (R < 2) throw std::invalid_argument("compare_modes: need at least two runs per mode");

  RunSpec abf_spec = spec;
  abf_spec.mode = BiasMode::Abf;
  RunSpec pabf_spec = spec;
  pabf_spec.mode = BiasMode::Pabf;

  ComparisonResult cmp;
  cmp.abf_runs = run_replicated(abf_spec, R, parallel);
  cmp.pabf_runs = run_replicated(pabf_spec, R, parallel);
  check_aligned(cmp.abf_runs);
  check_aligned(cmp.pabf_runs);

  const std::size_t n_snap = cmp.abf_runs.front().snapshots.size();
  if (cmp.pabf_runs.front().snapshots.size() != n_snap)
    throw std::runtime_error("compare_modes: modes disagree on snapshot count");

  for (std::size_t k = 0; k < n_snap; ++k) {
    ComparisonRow row;
    row.t = cmp.abf_runs.front().snapshots[k].t;

    std::vector<VectorFieldd> aF, aG, pF, pG;
    for (const auto& r : cmp.abf_runs) {
      aF.push_back(r.snapshots[k].F);
      aG.push_back(r.snapshots[k].gradA);
      row.abf_l2 += r.snapshots[k].l2_err;
      row.abf_flat1 += r.snapshots[k].flat1;
      row.abf_flat2 += r.snapshots[k].flat2;
    }
    for (const auto& r : cmp.pabf_runs) {
      pF.push_back(r.snapshots[k].F);
      pG.push_back(r.snapshots[k].gradA);
      row.pabf_l2 += r.snapshots[k].l2_err;
      row.pabf_flat1 += r.snapshots[k].flat1;
      row.pabf_flat2 += r.snapshots[k].flat2;
    }
    const double Rd = static_cast<double>(R);
    row.abf_l2 /= Rd;
    row.pabf_l2 /= Rd;
    row.abf_flat1 /= Rd;
    row.abf_flat2 /= Rd;
    row.pabf_flat1 /= Rd;
    row.pabf_flat2 /= Rd;

    const auto vaF = integrated_variance_jackknife(aF);
    const auto vaG = integrated_variance_jackknife(aG);
    const auto vpF = integrated_variance_jackknife(pF);
    const auto vpG = integrated_variance_jackknife(pG);
    row.abf_var_F = vaF.value;
    row.abf_var_F_se = vaF.stderr_est;
    row.abf_var_gradA = vaG.value;
    row.abf_var_gradA_se = vaG.stderr_est;
    row.pabf_var_F = vpF.value;
    row.pabf_var_F_se = vpF.stderr_est;
    row.pabf_var_gradA = vpG.value;
    row.pabf_var_gradA_se = vpG.stderr_est;
    row.abf_var_F_norm = integrated_variance_norm(aF);
    row.pabf_var_gradA_norm = integrated_variance_norm(pG);
    cmp.rows.push_back(row);
  }
  return cmp;
}

void write_comparison(const std::filesystem::path& dir, const ComparisonResult& cmp)
{
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_replicated_output(dir / "abf", cmp.abf_runs);
  write_replicated_output(dir / "pabf", cmp.pabf_runs);

  auto os = open_out(dir / "comparison.csv");
  os << "t,abf_var_F,abf_var_F_se,abf_var_gradA,abf_var_gradA_se,"
        "pabf_var_F,pabf_var_F_se,pabf_var_gradA,pabf_var_gradA_se,"
        "abf_var_F_norm,pabf_var_gradA_norm,abf_l2_error,pabf_l2_error,"
        "abf_neg_log_flatness1,abf_neg_log_flatness2,pabf_neg_log_flatness1,"
        "pabf_neg_log_flatness2\n";
  for (const auto& r : cmp.rows) {
    os << format_double(r.t) << ',' << format_double(r.abf_var_F) << ','
       << format_double(r.abf_var_F_se) << ',' << format_double(r.abf_var_gradA) << ','
       << format_double(r.abf_var_gradA_se) << ',' << format_double(r.pabf_var_F) << ','
       << format_double(r.pabf_var_F_se) << ',' << format_double(r.pabf_var_gradA) << ','
       << format_double(r.pabf_var_gradA_se) << ',' << format_double(r.abf_var_F_norm) << ','
       << format_double(r.pabf_var_gradA_norm) << ',' << format_double(r.abf_l2) << ','
       << format_double(r.pabf_l2) << ',' << format_double(neg_log(r.abf_flat1)) << ','
       << format_double(neg_log(r.abf_flat2)) << ',' << format_double(neg_log(r.pabf_flat1))
       << ',' << format_double(neg_log(r.pabf_flat2)) << '\n';
  }
}

double time_to_flatness(const RunOutput& out, double tau)
{
  for (std::size_t k = 0; k < out.trace_t.size(); ++k)
    if (out.trace_flat1[k] <= tau && out.trace_flat2[k] <= tau) return out.trace_t[k];
  return std::numeric_limits<double>::infinity();
}

}  // namespace pabf
