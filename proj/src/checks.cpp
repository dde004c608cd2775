#include "pabf/checks.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pabf/driver.hpp"
#include "pabf/estimator.hpp"
#include "pabf/grid.hpp"
#include "pabf/integrator.hpp"
#include "pabf/projection.hpp"
#include "pabf/rng.hpp"
#include "pabf/system.hpp"

namespace pabf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double x)
{
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

ScalarFieldd random_field(const RCGrid& g, std::mt19937_64& eng, double lo = -1.0,
                          double hi = 1.0)
{
  std::uniform_real_distribution<double> u(lo, hi);
  ScalarFieldd f(g);
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < g.n1(); ++i) f.values(i, j) = u(eng);
  return f;
}

VectorFieldd random_vector_field(const RCGrid& g, std::mt19937_64& eng)
{
  VectorFieldd v(g);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < g.n1(); ++i) {
      v.comp1(i, j) = u(eng);
      v.comp2(i, j) = u(eng);
    }
  return v;
}

CheckResult check_adjointness()
{
  std::mt19937_64 eng(make_engine(2024, 1));
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const RCGrid g(5 + trial % 4, 7 + trial % 3);
    const ScalarFieldd f = random_field(g, eng);
    const VectorFieldd v = random_vector_field(g, eng);
    const double lhs = dot(divergence(v), f);
    const double rhs = -dot(v, gradient(f));
    const double scale = std::max(1.0, norm(v) * norm(f));
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return {"operator-adjointness", worst <= 1e-10, "max scaled defect " + fmt(worst)};
}

CheckResult check_gradient_convergence()
{
  auto max_err = [](int n) {
    const RCGrid g(n, n);
    const ScalarFieldd f =
        sample(g, [](double z1, double z2) { return std::sin(kTwoPi * z1) * std::cos(kTwoPi * z2); });
    const VectorFieldd grad = gradient(f);
    double err = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double z1 = g.node1(i), z2 = g.node2(j);
        err = std::max(err, std::abs(grad.comp1(i, j) -
                                     kTwoPi * std::cos(kTwoPi * z1) * std::cos(kTwoPi * z2)));
        err = std::max(err, std::abs(grad.comp2(i, j) +
                                     kTwoPi * std::sin(kTwoPi * z1) * std::sin(kTwoPi * z2)));
      }
    return err;
  };
  const double ratio = max_err(32) / max_err(64);
  const bool ok = ratio >= 3.6 && ratio <= 4.4;
  return {"gradient-second-order", ok, "refinement error ratio " + fmt(ratio)};
}

// Central finite differences of the energy against the analytic forces;
// the per-component denominator is floored at 1 to keep near-zero
// components meaningful.
double force_fd_error(const SystemSpec& s, const Configuration& c, double step)
{
  const Eigen::ArrayXd f = forces(s, c);
  double worst = 0.0;
  Configuration probe = c;
  for (int k = 0; k < s.dof(); ++k) {
    const double saved = probe.positions[k];
    probe.positions[k] = saved + step;
    const double ep = energy(s, probe);
    probe.positions[k] = saved - step;
    const double em = energy(s, probe);
    probe.positions[k] = saved;
    const double fd = -(ep - em) / (2.0 * step);
    worst = std::max(worst, std::abs(fd - f[k]) / std::max(std::abs(f[k]), 1.0));
  }
  return worst;
}

Configuration random_toy_configuration(const SystemSpec& s, std::mt19937_64& eng)
{
  std::uniform_real_distribution<double> u(0.0, s.box_length);
  Configuration c(Eigen::ArrayXd::Zero(s.dof()));
  for (int k = 0; k < s.dof(); ++k) c.positions[k] = u(eng);
  return c;
}

// Jittered lattice with the trimer at its compact bond geometry; resamples
// until no pair sits in the short-range clamp region or within the
// finite-difference window of the Lennard-Jones cutoff.
Configuration random_trimer_configuration(const SystemSpec& s, std::mt19937_64& eng)
{
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  const double rcut = s.lj_rcut_factor * s.lj_sigma;
  const double rmin = s.lj_rmin_factor * s.lj_sigma;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Configuration c = initial_configuration(s);
    const int t0 = s.trimer_indices[0], t1 = s.trimer_indices[1], t2 = s.trimer_indices[2];
    const double r0 = s.r_compact();
    c.positions[2 * t0] = c.positions[2 * t1] - r0;
    c.positions[2 * t0 + 1] = c.positions[2 * t1 + 1];
    c.positions[2 * t2] = c.positions[2 * t1] + r0;
    c.positions[2 * t2 + 1] = c.positions[2 * t1 + 1];
    for (int k = 0; k < s.dof(); ++k) c.positions[k] += jitter(eng);
    wrap_into_box(s, c);

    bool ok = true;
    for (int a = 0; a < s.N && ok; ++a)
      for (int b = a + 1; b < s.N && ok; ++b) {
        double dx = c.positions[2 * a] - c.positions[2 * b];
        double dy = c.positions[2 * a + 1] - c.positions[2 * b + 1];
        dx -= s.box_length * std::round(dx / s.box_length);
        dy -= s.box_length * std::round(dy / s.box_length);
        const double r = std::hypot(dx, dy);
        if (r < rmin + 0.02 || std::abs(r - rcut) < 1e-3) ok = false;
      }
    if (ok) return c;
  }
  throw std::runtime_error("random_trimer_configuration: rejection sampling failed");
}

CheckResult check_forces_fd(SystemKind kind, int n_configs)
{
  SystemSpec s =
      kind == SystemKind::Trimer ? SystemSpec::trimer_defaults() : SystemSpec::toy_defaults();
  std::mt19937_64 eng(make_engine(2024, kind == SystemKind::Trimer ? 3 : 2));
  double worst = 0.0;
  for (int t = 0; t < n_configs; ++t) {
    const Configuration c = kind == SystemKind::Trimer ? random_trimer_configuration(s, eng)
                                                       : random_toy_configuration(s, eng);
    worst = std::max(worst, force_fd_error(s, c, 1e-6));
  }
  return {std::string("forces-vs-fd-") + (kind == SystemKind::Trimer ? "trimer" : "toy"),
          worst <= 1e-5, "max relative error " + fmt(worst) + " over " +
                             std::to_string(n_configs) + " configurations"};
}

CheckResult check_xi_jacobian(int n_configs)
{
  SystemSpec s = SystemSpec::trimer_defaults();
  std::mt19937_64 eng(make_engine(2024, 4));
  const double step = 1e-6;
  double worst = 0.0;
  for (int t = 0; t < n_configs; ++t) {
    Configuration c = random_trimer_configuration(s, eng);
    const XiValue v = xi(s, c);
    for (int k = 0; k < s.dof(); ++k) {
      if (v.jac1[k] == 0.0 && v.jac2[k] == 0.0) continue;
      const double saved = c.positions[k];
      c.positions[k] = saved + step;
      const XiValue vp = xi(s, c);
      c.positions[k] = saved - step;
      const XiValue vm = xi(s, c);
      c.positions[k] = saved;
      const double fd1 = (vp.z[0] - vm.z[0]) / (2.0 * step);
      const double fd2 = (vp.z[1] - vm.z[1]) / (2.0 * step);
      worst = std::max(worst, std::abs(fd1 - v.jac1[k]) / std::max(std::abs(v.jac1[k]), 1.0));
      worst = std::max(worst, std::abs(fd2 - v.jac2[k]) / std::max(std::abs(v.jac2[k]), 1.0));
    }
  }
  return {"xi-jacobian-vs-fd", worst <= 1e-5, "max relative error " + fmt(worst)};
}

CheckResult check_projection_fixtures()
{
  const RCGrid g(48, 48);
  const double tol = 1e-10;
  double worst = 0.0;

  // discrete gradient is recovered exactly (up to the solver tolerance)
  const ScalarFieldd phi = sample(g, [](double z1, double) { return std::sin(kTwoPi * z1); });
  const ProjectionResultd r1 = project(gradient(phi), sample(g, [](double, double) { return 1.0; }), tol);
  worst = std::max(worst, (r1.A.values - (phi.values - phi.values.mean())).abs().maxCoeff());

  // constant field: the harmonic part, projects to zero
  VectorFieldd cf(g);
  cf.comp1.setConstant(0.7);
  cf.comp2.setConstant(-1.3);
  const ProjectionResultd r2 = project(cf, sample(g, [](double, double) { return 1.0; }), tol);
  worst = std::max(worst, r2.A.values.abs().maxCoeff());

  // rotated discrete gradient: divergence-free by commuting stencils
  const ScalarFieldd psi_s =
      sample(g, [](double z1, double z2) { return std::sin(kTwoPi * z1) * std::sin(kTwoPi * z2); });
  const VectorFieldd gpsi = gradient(psi_s);
  const VectorFieldd rot(g, (-gpsi.comp2).eval(), gpsi.comp1);
  const ProjectionResultd r3 = project(rot, sample(g, [](double, double) { return 1.0; }), tol);
  worst = std::max(worst, r3.A.values.abs().maxCoeff());

  return {"projection-fixtures", worst <= 1e-8, "max recovery error " + fmt(worst)};
}

CheckResult check_projection_idempotence()
{
  std::mt19937_64 eng(make_engine(2024, 5));
  const RCGrid g(32, 32);
  const double tol = 1e-9;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    ScalarFieldd A = random_field(g, eng);
    A.values -= A.values.mean();
    const VectorFieldd gA = gradient(A);
    const ScalarFieldd psi = random_field(g, eng, 0.5, 2.0);
    const ProjectionResultd res = project(gA, psi, tol);
    const double scale = std::max(1.0, gA.comp1.abs().maxCoeff());
    worst = std::max(worst,
                     std::max((res.gradA.comp1 - gA.comp1).abs().maxCoeff(),
                              (res.gradA.comp2 - gA.comp2).abs().maxCoeff()) /
                         scale);
  }
  const bool ok = worst <= 10.0 * tol;
  return {"projection-idempotence", ok, "max relative drift " + fmt(worst)};
}

CheckResult check_boltzmann_moment(bool quick)
{
  SystemSpec s = SystemSpec::toy_defaults();
  s.toy_w_amp = 1.0;
  s.toy_b = 0.0;
  s.toy_solvent = false;
  s.beta = 1.0;
  s.N = 2;
  const long steps = quick ? 60000 : 400000;
  const MomentReport rep = sample_boltzmann_check(s, steps, 5e-4, 777, 16);
  std::ostringstream detail;
  detail << "estimate " << rep.estimate << " vs quadrature " << rep.reference << " (s.e. "
         << rep.stderr_est << ")";
  return {"boltzmann-moment", rep.within(3.0), detail.str()};
}

CheckResult check_deposit_conservation()
{
  RunSpec spec;
  spec.system = SystemSpec::toy_defaults();
  spec.n1 = spec.n2 = 8;
  spec.M = 3;
  spec.k_sub = 7;
  spec.n_sweeps = 11;
  spec.dt = 1e-3;
  spec.seed = 99;
  const RunOutput out = run(spec);
  const auto expected = static_cast<std::int64_t>(spec.M) * spec.k_sub * spec.n_sweeps;
  const bool ok = out.final_state.total_count() == expected;
  return {"deposit-conservation", ok,
          std::to_string(out.final_state.total_count()) + " deposits, expected " +
              std::to_string(expected)};
}

CheckResult check_determinism()
{
  RunSpec spec;
  spec.system = SystemSpec::toy_defaults();
  spec.n1 = spec.n2 = 16;
  spec.M = 4;
  spec.k_sub = 5;
  spec.n_sweeps = 40;
  spec.seed = 4242;
  const RunOutput a = run(spec);
  const RunOutput b = run(spec);
  bool ok = a.snapshots.size() == b.snapshots.size();
  if (ok)
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
      ok = ok && a.snapshots[k].t == b.snapshots[k].t;
      ok = ok && (a.snapshots[k].F.comp1 == b.snapshots[k].F.comp1).all();
      ok = ok && (a.snapshots[k].A.values == b.snapshots[k].A.values).all();
    }
  ok = ok && (a.final_state.count == b.final_state.count).all() &&
       (a.final_state.sum1 == b.final_state.sum1).all();
  return {"run-determinism", ok, ok ? "repeated run is bit-identical" : "runs differ"};
}

}  // namespace

std::vector<CheckResult> run_checks(bool quick)
{
  const int n_configs = quick ? 20 : 100;
  std::vector<CheckResult> results;
  results.push_back(check_adjointness());
  results.push_back(check_gradient_convergence());
  results.push_back(check_forces_fd(SystemKind::ToySeparable, n_configs));
  results.push_back(check_forces_fd(SystemKind::Trimer, n_configs));
  results.push_back(check_xi_jacobian(quick ? 5 : 20));
  results.push_back(check_projection_fixtures());
  results.push_back(check_projection_idempotence());
  results.push_back(check_boltzmann_moment(quick));
  results.push_back(check_deposit_conservation());
  results.push_back(check_determinism());
  return results;
}

bool all_passed(const std::vector<CheckResult>& results)
{
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace pabf
