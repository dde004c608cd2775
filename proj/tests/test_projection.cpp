#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "pabf/diagnostics.hpp"
#include "pabf/errors.hpp"
#include "pabf/projection.hpp"
#include "test_helpers.hpp"

using namespace pabf;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ScalarFieldd uniform_psi(const RCGrid& g, double value = 1.0)
{
  ScalarFieldd psi(g);
  psi.values.setConstant(value);
  return psi;
}

}  // namespace

TEST_CASE("project recovers a discrete gradient under uniform density")
{
  const RCGrid g(32, 32);
  const ScalarFieldd phi = sample(g, [](double z1, double z2) {
    return std::sin(kTwoPi * z1) + 0.5 * std::cos(kTwoPi * z2);
  });
  const VectorFieldd F = gradient(phi);
  const double tol = 1e-10;
  const ProjectionResultd res = project(F, uniform_psi(g), tol);

  const GridArray<double> expected = phi.values - phi.values.mean();
  CHECK((res.A.values - expected).abs().maxCoeff() <= 1e-8);
  CHECK(std::abs(res.A.values.mean()) <= 1e-12);
  CHECK(res.residual_div <= tol);
  CHECK(projection_defect(F, uniform_psi(g), res) <= 1e-10);
}

TEST_CASE("constant and rotated-gradient fields project to zero")
{
  const RCGrid g(24, 24);
  VectorFieldd c(g);
  c.comp1.setConstant(2.0);
  c.comp2.setConstant(-0.5);
  const ProjectionResultd rc = project(c, uniform_psi(g), 1e-10);
  CHECK(rc.A.values.abs().maxCoeff() <= 1e-12);
  CHECK(rc.iterations == 0);

  const ScalarFieldd phi =
      sample(g, [](double z1, double z2) { return std::sin(kTwoPi * z1) * std::sin(kTwoPi * z2); });
  const VectorFieldd gphi = gradient(phi);
  const VectorFieldd rot(g, (-gphi.comp2).eval(), gphi.comp1);
  const ProjectionResultd rr = project(rot, uniform_psi(g), 1e-10);
  CHECK(rr.A.values.abs().maxCoeff() <= 1e-10);
}

TEST_CASE("gauge invariance: adding a constant field changes nothing under uniform density")
{
  std::mt19937_64 eng(3);
  const RCGrid g(16, 16);
  const VectorFieldd F = test_helpers::random_vector(g, eng);
  VectorFieldd shifted = F;
  shifted.comp1 += 1.7;
  shifted.comp2 -= 0.9;
  const ProjectionResultd a = project(F, uniform_psi(g), 1e-11);
  const ProjectionResultd b = project(shifted, uniform_psi(g), 1e-11);
  CHECK((a.A.values - b.A.values).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("idempotence: a gradient field is returned unchanged for any valid density")
{
  std::mt19937_64 eng(5);
  const double tol = 1e-9;
  for (int trial = 0; trial < 5; ++trial) {
    const RCGrid g(20, 20);
    ScalarFieldd A = test_helpers::random_scalar(g, eng);
    A.values -= A.values.mean();
    const VectorFieldd gA = gradient(A);
    const ScalarFieldd psi = test_helpers::random_scalar(g, eng, 0.5, 2.0);
    const ProjectionResultd res = project(gA, psi, tol);
    const double scale = std::max(1.0, gA.comp1.abs().maxCoeff());
    CHECK((res.gradA.comp1 - gA.comp1).abs().maxCoeff() / scale <= 10.0 * tol);
    CHECK((res.gradA.comp2 - gA.comp2).abs().maxCoeff() / scale <= 10.0 * tol);
    VectorFieldd psi_gA(g, (psi.values * gA.comp1).eval(), (psi.values * gA.comp2).eval());
    CHECK(projection_defect(gA, psi, res) <= tol * std::max(1.0, norm(divergence(psi_gA))));
  }
}

TEST_CASE("linearity in the projected field for fixed density")
{
  std::mt19937_64 eng(9);
  const RCGrid g(16, 16);
  const ScalarFieldd psi = test_helpers::random_scalar(g, eng, 0.6, 1.8);
  const VectorFieldd F1 = test_helpers::random_vector(g, eng);
  const VectorFieldd F2 = test_helpers::random_vector(g, eng);
  const double a = 1.3, b = -0.7;

  VectorFieldd combo(g, (a * F1.comp1 + b * F2.comp1).eval(), (a * F1.comp2 + b * F2.comp2).eval());
  const ProjectionResultd rc = project(combo, psi, 1e-11);
  const ProjectionResultd r1 = project(F1, psi, 1e-11);
  const ProjectionResultd r2 = project(F2, psi, 1e-11);

  CHECK((rc.A.values - (a * r1.A.values + b * r2.A.values)).abs().maxCoeff() <= 1e-7);
}

TEST_CASE("least-squares optimality under uniform density")
{
  std::mt19937_64 eng(17);
  const RCGrid g(12, 12);
  const VectorFieldd F = test_helpers::random_vector(g, eng);
  const ProjectionResultd res = project(F, uniform_psi(g), 1e-11);

  VectorFieldd dev(g, (res.gradA.comp1 - F.comp1).eval(), (res.gradA.comp2 - F.comp2).eval());
  const double best = dot(dev, dev);
  for (int trial = 0; trial < 100; ++trial) {
    const ScalarFieldd trial_g = test_helpers::random_scalar(g, eng);
    const VectorFieldd gg = gradient(trial_g);
    VectorFieldd d(g, (gg.comp1 - F.comp1).eval(), (gg.comp2 - F.comp2).eval());
    CHECK(best <= dot(d, d) + 1e-9);
  }
}

TEST_CASE("projection defect matches the solver residual contract")
{
  std::mt19937_64 eng(21);
  const RCGrid g(16, 16);
  const VectorFieldd F = test_helpers::random_vector(g, eng);
  const ScalarFieldd psi = test_helpers::random_scalar(g, eng, 0.5, 2.0);
  const double tol = 1e-8;
  const ProjectionResultd res = project(F, psi, tol);

  VectorFieldd psiF(g, (psi.values * F.comp1).eval(), (psi.values * F.comp2).eval());
  const double rhs_norm = norm(divergence(psiF));
  CHECK(projection_defect(F, psi, res) <= tol * rhs_norm);

  // re-projection of the returned gradient: defect bounded by the tolerance
  const ProjectionResultd again = project(res.gradA, psi, tol);
  CHECK(projection_defect(res.gradA, psi, again) <= tol * std::max(rhs_norm, 1.0));
}

TEST_CASE("error paths: invalid density and iteration starvation")
{
  std::mt19937_64 eng(23);
  const RCGrid g(16, 16);
  const VectorFieldd F = test_helpers::random_vector(g, eng);

  ScalarFieldd bad_psi(g);  // zero density violates the floor precondition
  CHECK_THROWS_AS(project(F, bad_psi, 1e-8), std::invalid_argument);

  const ScalarFieldd psi = test_helpers::random_scalar(g, eng, 0.5, 2.0);
  try {
    project(F, psi, 1e-12, 2);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.residual() > 1e-12);
    CHECK(e.iterations() <= 2);
  }
}

TEST_CASE("projection contracts cross-run variance")
{
  std::mt19937_64 eng(31);
  const RCGrid g(16, 16);
  const int R = 8;

  // uniform density: the projector is l2-orthogonal, contraction is exact
  std::vector<VectorFieldd> raw, projected;
  for (int r = 0; r < R; ++r) {
    raw.push_back(test_helpers::random_vector(g, eng));
    projected.push_back(project(raw.back(), uniform_psi(g), 1e-11).gradA);
  }
  CHECK(integrated_variance(projected) <= integrated_variance(raw) * (1.0 + 1e-9));

  // shared smooth non-uniform density: statistical contraction
  const ScalarFieldd psi = sample(g, [](double z1, double z2) {
    return 1.0 + 0.5 * std::sin(kTwoPi * z1) * std::cos(kTwoPi * z2);
  });
  std::vector<VectorFieldd> projected_w;
  for (int r = 0; r < R; ++r) projected_w.push_back(project(raw[r], psi, 1e-11).gradA);
  CHECK(integrated_variance(projected_w) <= integrated_variance(raw));
}
