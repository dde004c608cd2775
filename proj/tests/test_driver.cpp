#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pabf/driver.hpp"
#include "pabf/field_io.hpp"

using namespace pabf;

namespace {

RunSpec small_toy_spec()
{
  RunSpec spec;
  spec.system = SystemSpec::toy_defaults();
  spec.n1 = spec.n2 = 16;
  spec.M = 8;
  spec.k_sub = 5;
  spec.n_sweeps = 60;
  spec.dt = 1e-3;
  spec.n_min = 20;
  spec.seed = 20240601;
  return spec;
}

}  // namespace

TEST_CASE("zero sweeps produce an empty run")
{
  RunSpec spec = small_toy_spec();
  spec.n_sweeps = 0;
  const RunOutput out = run(spec);
  CHECK(out.snapshots.empty());
  CHECK(out.final_state.total_count() == 0);
  CHECK(force_field(out.final_state).comp1.abs().maxCoeff() == 0.0);
}

TEST_CASE("deposit accounting and snapshot monotonicity")
{
  const RunSpec spec = small_toy_spec();
  const RunOutput out = run(spec);
  CHECK(out.final_state.total_count() ==
        static_cast<std::int64_t>(spec.M) * spec.k_sub * spec.n_sweeps);

  REQUIRE(!out.snapshots.empty());
  double prev = 0.0;
  for (const auto& s : out.snapshots) {
    CHECK(s.t > prev);
    prev = s.t;
  }
  CHECK(out.snapshots.back().t == doctest::Approx(spec.t_end()));
}

TEST_CASE("identical spec and seed give bit-identical outputs")
{
  const RunSpec spec = small_toy_spec();
  const RunOutput a = run(spec);
  const RunOutput b = run(spec);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    CHECK(a.snapshots[k].t == b.snapshots[k].t);
    CHECK((a.snapshots[k].F.comp1 == b.snapshots[k].F.comp1).all());
    CHECK((a.snapshots[k].F.comp2 == b.snapshots[k].F.comp2).all());
    CHECK((a.snapshots[k].A.values == b.snapshots[k].A.values).all());
    CHECK((a.snapshots[k].psi.values == b.snapshots[k].psi.values).all());
  }
  CHECK((a.final_state.count == b.final_state.count).all());
  CHECK((a.final_state.sum1 == b.final_state.sum1).all());
  CHECK((a.final_state.sum2 == b.final_state.sum2).all());
}

TEST_CASE("replicated runs align snapshots and differ across seeds")
{
  RunSpec spec = small_toy_spec();
  spec.n_sweeps = 30;
  const auto runs = run_replicated(spec, 3, /*parallel=*/true);
  REQUIRE(runs.size() == 3);
  for (const auto& r : runs) REQUIRE(r.snapshots.size() == runs[0].snapshots.size());
  for (std::size_t k = 0; k < runs[0].snapshots.size(); ++k) {
    CHECK(runs[1].snapshots[k].t == runs[0].snapshots[k].t);
    CHECK(runs[2].snapshots[k].t == runs[0].snapshots[k].t);
  }
  // independent seeds: the estimator states differ
  CHECK_FALSE((runs[0].final_state.sum1 == runs[1].final_state.sum1).all());

  // replication is itself deterministic, parallel or not
  const auto serial = run_replicated(spec, 3, /*parallel=*/false);
  for (int r = 0; r < 3; ++r)
    CHECK((serial[r].final_state.sum1 == runs[r].final_state.sum1).all());
}

TEST_CASE("ABF and PABF apply the same bias when the estimate is already a gradient")
{
  // craft an estimator state whose force field is a discrete gradient and
  // whose histogram is exactly uniform, then advance one sweep in each mode
  RunSpec spec = small_toy_spec();
  const RCGrid g(spec.n1, spec.n2);

  const ScalarFieldd A = analytic_free_energy(spec.system, g);
  const VectorFieldd gradA = gradient(A);

  BiasState state(g, spec.n_min, spec.eps_density);
  const int per_bin = spec.n_min;  // ramp complete everywhere
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < g.n1(); ++i) {
      state.count(i, j) = per_bin;
      state.sum1(i, j) = gradA.comp1(i, j) * per_bin;
      state.sum2(i, j) = gradA.comp2(i, j) * per_bin;
    }

  const VectorFieldd F = force_field(state);
  CHECK((F.comp1 - gradA.comp1).abs().maxCoeff() <= 1e-12);

  const ScalarFieldd psi = density_field(state, true);
  CHECK(psi.values.maxCoeff() == doctest::Approx(1.0));

  const ProjectionResultd res = project(F, psi, spec.tol);
  CHECK((res.gradA.comp1 - F.comp1).abs().maxCoeff() <= 10.0 * spec.tol);
  CHECK((res.gradA.comp2 - F.comp2).abs().maxCoeff() <= 10.0 * spec.tol);

  // same ensemble, same seed, one sweep under each bias
  auto advance = [&](const VectorFieldd& bias_field, BiasMode mode) {
    Ensemble e = make_ensemble(spec.system, 4, 777);
    BiasForceView view{mode, bias_field};
    for (int k = 0; k < spec.k_sub; ++k) step(spec.system, e, view, spec.dt);
    return e;
  };
  const Ensemble ea = advance(F, BiasMode::Abf);
  const Ensemble ep = advance(res.gradA, BiasMode::Pabf);
  for (int r = 0; r < 4; ++r)
    CHECK((ea.replicas[r].positions - ep.replicas[r].positions).abs().maxCoeff() <=
          100.0 * spec.tol);
}

TEST_CASE("run output directory layout and timeseries header")
{
  namespace fs = std::filesystem;
  RunSpec spec = small_toy_spec();
  spec.n_sweeps = 20;
  const RunOutput out = run(spec);

  const fs::path dir = fs::temp_directory_path() / "pabf_test_run_output";
  fs::remove_all(dir);
  write_run_output(dir, out);

  CHECK(fs::exists(dir / "meta.txt"));
  CHECK(fs::exists(dir / "timeseries.csv"));
  CHECK(fs::exists(dir / "flatness_trace.csv"));
  CHECK(fs::exists(dir / "bias_state.csv"));
  CHECK(fs::exists(dir / "snap000" / "F.csv"));
  CHECK(fs::exists(dir / "snap000" / "A.csv"));
  CHECK(fs::exists(dir / "snap000" / "gradA.csv"));
  CHECK(fs::exists(dir / "snap000" / "psi.csv"));
  CHECK(fs::exists(dir / "snap000" / "marginals.csv"));

  std::ifstream ts(dir / "timeseries.csv");
  std::string header;
  std::getline(ts, header);
  CHECK(header == "t,int_var_F,int_var_gradA,l2_error,neg_log_flatness1,neg_log_flatness2");

  // the manifest re-parses to the same spec
  std::ifstream meta(dir / "meta.txt");
  std::stringstream ss;
  ss << meta.rdbuf();
  const RunSpec back = parse_config(ss.str());
  CHECK(serialize_config(back) == serialize_config(spec));

  // the dumped bias state restores bit-exactly
  std::ifstream bs(dir / "bias_state.csv");
  const BiasState restored = load_bias_state(bs, spec.n_min, spec.eps_density);
  CHECK((restored.count == out.final_state.count).all());
  CHECK((restored.sum1 == out.final_state.sum1).all());

  fs::remove_all(dir);
}

TEST_CASE("depositing only before the snapshot: fields reflect past samples")
{
  // a snapshot taken after n sweeps equals the estimator state rebuilt
  // from exactly those deposits
  RunSpec spec = small_toy_spec();
  spec.n_sweeps = 10;
  spec.schedule = SnapshotSchedule::List;
  spec.snapshot_times = {spec.t_end()};
  const RunOutput out = run(spec);
  REQUIRE(out.snapshots.size() == 1);
  const VectorFieldd F = force_field(out.final_state);
  CHECK((out.snapshots[0].F.comp1 == F.comp1).all());
  CHECK((out.snapshots[0].F.comp2 == F.comp2).all());
}
