#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pabf/errors.hpp"
#include "pabf/estimator.hpp"
#include "pabf/grid.hpp"
#include "pabf/integrator.hpp"
#include "pabf/system.hpp"
#include "test_helpers.hpp"

using namespace pabf;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SystemSpec flat_toy(int N = 2)
{
  SystemSpec s = SystemSpec::toy_defaults();
  s.N = N;
  s.toy_w_amp = 0.0;
  s.toy_b = 0.0;
  s.toy_solvent = false;
  return s;
}

}  // namespace

TEST_CASE("pure-noise increments have the Brownian variance")
{
  SystemSpec s = flat_toy(2);
  const double dt = 1e-3;
  const int M = 8;
  Ensemble e = make_ensemble(s, M, 31);
  const BiasForceView no_bias{BiasMode::Abf, {}};

  // accumulate squared single-step increments; positions wrap so use
  // minimum-image differences
  const long steps = 20000;
  std::vector<double> sq;
  Eigen::ArrayXd prev0 = e.replicas[0].positions;
  std::vector<Eigen::ArrayXd> prev;
  for (int r = 0; r < M; ++r) prev.push_back(e.replicas[r].positions);
  for (long t = 0; t < steps; ++t) {
    step(s, e, no_bias, dt);
    for (int r = 0; r < M; ++r) {
      for (int k = 0; k < s.dof(); ++k) {
        double dx = e.replicas[r].positions[k] - prev[r][k];
        dx -= s.box_length * std::round(dx / s.box_length);
        sq.push_back(dx * dx);
      }
      prev[r] = e.replicas[r].positions;
    }
  }
  const auto stats = test_helpers::batch_means(sq, 32);
  const double expected = 2.0 * dt / s.beta;
  CHECK(std::abs(stats.mean - expected) <= 3.0 * stats.stderr_est);

  CHECK(e.time == doctest::Approx(steps * dt));
  CHECK(e.steps_taken == steps);
}

TEST_CASE("near-zero temperature: gradient descent into the well")
{
  SystemSpec s = SystemSpec::toy_defaults();
  s.N = 2;
  s.toy_b = 0.0;
  s.toy_solvent = false;
  s.beta = 1e18;  // noise amplitude ~ 1e-9 per step: effectively disabled

  Ensemble e = make_ensemble(s, 1, 7);
  e.replicas[0].positions[0] = 0.25;  // downhill slope toward z = 0
  const BiasForceView no_bias{BiasMode::Abf, {}};

  double prev_pos = 0.25;
  double prev_energy = energy(s, e.replicas[0]);
  for (int t = 0; t < 200; ++t) {
    step(s, e, no_bias, 1e-3);
    const double pos = e.replicas[0].positions[0];
    const double en = energy(s, e.replicas[0]);
    CHECK(pos <= prev_pos + 1e-8);
    CHECK(en <= prev_energy + 1e-12);
    prev_pos = pos;
    prev_energy = en;
  }
  CHECK(e.replicas[0].positions[0] < 0.05);
}

TEST_CASE("fixed seed reproduces the trajectory bit-for-bit")
{
  SystemSpec s = SystemSpec::toy_defaults();
  const BiasForceView no_bias{BiasMode::Abf, {}};

  auto trajectory = [&] {
    Ensemble e = make_ensemble(s, 3, 123456);
    for (int t = 0; t < 500; ++t) step(s, e, no_bias, 5e-4);
    return e;
  };
  const Ensemble a = trajectory();
  const Ensemble b = trajectory();
  for (int r = 0; r < a.size(); ++r)
    CHECK((a.replicas[r].positions == b.replicas[r].positions).all());
}

TEST_CASE("replica streams are independent of ensemble size")
{
  // replica r's draws depend only on (seed, r): the first replica of a
  // 1-replica ensemble and of a 4-replica ensemble move identically
  SystemSpec s = flat_toy(2);
  const BiasForceView no_bias{BiasMode::Abf, {}};
  Ensemble e1 = make_ensemble(s, 1, 99);
  Ensemble e4 = make_ensemble(s, 4, 99);
  for (int t = 0; t < 100; ++t) {
    step(s, e1, no_bias, 1e-3);
    step(s, e4, no_bias, 1e-3);
  }
  CHECK((e1.replicas[0].positions == e4.replicas[0].positions).all());
}

TEST_CASE("integrator blowup reports the replica and step")
{
  SystemSpec s = flat_toy(2);
  Ensemble e = make_ensemble(s, 2, 1);
  BiasForceView bias;
  bias.mode = BiasMode::Abf;
  bias.field = VectorFieldd(RCGrid(4, 4));
  bias.field.comp1.setConstant(1e308);  // absurd bias force
  CHECK_THROWS_AS(step(s, e, bias, 1e300), BlowupError);
}

TEST_CASE("exact mean-force bias flattens the reaction-coordinate histogram")
{
  SystemSpec s = SystemSpec::toy_defaults();
  s.N = 2;
  s.toy_solvent = false;
  s.beta = 2.0;

  // bias field = analytic mean force on a fine grid
  const RCGrid fine(64, 64);
  const ScalarFieldd A = analytic_free_energy(s, fine);
  BiasForceView bias{BiasMode::Pabf, gradient(A)};

  const int M = 32;
  Ensemble e = make_ensemble(s, M, 2718);
  const double dt = 1e-3;
  const long steps = 30000, burn = 6000;

  // per-replica occupancy of coarse bins -> across-replica standard errors
  const RCGrid coarse(8, 8);
  std::vector<Eigen::ArrayXXd> occ(M, Eigen::ArrayXXd::Zero(8, 8));
  for (long t = 0; t < steps; ++t) {
    step(s, e, bias, dt);
    if (t < burn) continue;
    for (int r = 0; r < M; ++r) {
      const XiValue v = xi(s, e.replicas[r]);
      const auto idx = bin_index(coarse, v.z[0], v.z[1]);
      occ[r](idx[0], idx[1]) += 1.0;
    }
  }
  const double kept = static_cast<double>(steps - burn);
  const double p_uniform = 1.0 / 64.0;
  int failures = 0;
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) {
      double mean = 0.0;
      for (int r = 0; r < M; ++r) mean += occ[r](i, j) / kept;
      mean /= M;
      double var = 0.0;
      for (int r = 0; r < M; ++r) {
        const double p = occ[r](i, j) / kept;
        var += (p - mean) * (p - mean);
      }
      var /= (M - 1);
      const double se = std::sqrt(var / M);
      if (std::abs(mean - p_uniform) > 3.0 * se) ++failures;
    }
  // 64 bins at 3 s.e.: allow a small number of marginal exceedances
  CHECK(failures <= 3);
}

TEST_CASE("unbiased moments match quadrature (von Mises)")
{
  SystemSpec s = flat_toy(2);
  s.beta = 1.0;

  // flat potential: uniform marginal, zero mean cosine
  MomentReport flat = sample_boltzmann_check(s, 40000, 1e-3, 5150, 8);
  CHECK(flat.reference == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(flat.within(3.0));

  // cosine well at beta = 1: mean resultant I1(1)/I0(1) ~ 0.4464
  SystemSpec w = s;
  w.toy_w_amp = 1.0;
  MomentReport von_mises = sample_boltzmann_check(w, 120000, 5e-4, 5151, 16);
  CHECK(von_mises.reference == doctest::Approx(0.44639).epsilon(1e-3));
  CHECK(von_mises.within(3.0));

  // confidence width shrinks with the replica budget (~ 1/sqrt(R))
  MomentReport few = sample_boltzmann_check(w, 40000, 1e-3, 5152, 8);
  MomentReport many = sample_boltzmann_check(w, 40000, 1e-3, 5152, 32);
  CHECK(many.stderr_est < few.stderr_est);
}

TEST_CASE("depositing step feeds the estimator every replica every step")
{
  SystemSpec s = SystemSpec::toy_defaults();
  Ensemble e = make_ensemble(s, 5, 10);
  BiasState b(RCGrid(8, 8));
  const BiasForceView no_bias{BiasMode::Abf, {}};
  for (int t = 0; t < 7; ++t) step(s, e, no_bias, 1e-3, &b);
  CHECK(b.total_count() == 5 * 7);
}
