#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pabf/field_io.hpp"
#include "pabf/grid.hpp"
#include "test_helpers.hpp"

using namespace pabf;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_CASE("grid construction enforces invariants")
{
  CHECK_THROWS_AS(RCGrid(3, 8), std::invalid_argument);
  CHECK_THROWS_AS(RCGrid(8, 3), std::invalid_argument);
  CHECK_THROWS_AS(RCGrid(8, 8, -1.0), std::invalid_argument);
  const RCGrid g(8, 16, 1.0, 2.0);
  CHECK(g.h1() == doctest::Approx(1.0 / 8));
  CHECK(g.h2() == doctest::Approx(2.0 / 16));
  CHECK(g.size() == 128);
}

TEST_CASE("bin_index wraps and bins")
{
  const RCGrid g(8, 8);
  CHECK(bin_index(g, 0.0, 0.0) == std::array<int, 2>{0, 0});
  CHECK(bin_index(g, 1.0, 1.0) == std::array<int, 2>{0, 0});
  // direct evaluation: floor(0.99*8)=7, floor(0.13*8)=1
  CHECK(bin_index(g, 0.99, 0.13) == std::array<int, 2>{7, 1});
  CHECK(bin_index(g, -0.01, 2.27) == std::array<int, 2>{7, 2});
  CHECK_THROWS_AS(bin_index(g, std::nan(""), 0.0), std::invalid_argument);
}

TEST_CASE("integrate: midpoint rule")
{
  const RCGrid g(16, 16);
  ScalarFieldd ones(g);
  ones.values.setConstant(1.0);
  CHECK(integrate(ones) == doctest::Approx(1.0).epsilon(1e-14));

  ScalarFieldd zero(g);
  CHECK(integrate(zero) == 0.0);

  // closed-form: integral of sin^2(2 pi z1) over the unit torus is 1/2,
  // and the midpoint rule is exact for this trigonometric polynomial
  const RCGrid g64(64, 64);
  const ScalarFieldd f = sample(g64, [](double z1, double) {
    const double s = std::sin(kTwoPi * z1);
    return s * s;
  });
  CHECK(std::abs(integrate(f) - 0.5) <= 1e-12);
}

TEST_CASE("gradient: constants, trig accuracy, seam behavior")
{
  const RCGrid g(16, 16);
  ScalarFieldd c(g);
  c.values.setConstant(3.25);
  const VectorFieldd gc = gradient(c);
  CHECK(gc.comp1.abs().maxCoeff() == 0.0);
  CHECK(gc.comp2.abs().maxCoeff() == 0.0);

  auto grad_err = [](int n) {
    const RCGrid gn(n, n);
    const ScalarFieldd f = sample(gn, [](double z1, double) { return std::sin(kTwoPi * z1); });
    const VectorFieldd grad = gradient(f);
    double err = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        err = std::max(err, std::abs(grad.comp1(i, j) - kTwoPi * std::cos(kTwoPi * gn.node1(i))));
    return err;
  };
  const double e64 = grad_err(64), e128 = grad_err(128);
  CHECK(e64 < 0.07);  // C*h^2 at h = 1/64
  const double ratio = e64 / e128;
  CHECK(ratio >= 3.6);
  CHECK(ratio <= 4.4);

  // sawtooth f[i] = i*h: slope 1 everywhere except the two seam nodes,
  // where the periodic stencil sees the jump: (2-n)/2
  const int n = 8;
  const RCGrid gs(n, n);
  ScalarFieldd saw(gs);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) saw.values(i, j) = gs.node1(i);
  const VectorFieldd gsaw = gradient(saw);
  for (int i = 1; i < n - 1; ++i) CHECK(gsaw.comp1(i, 0) == doctest::Approx(1.0));
  CHECK(gsaw.comp1(0, 0) == doctest::Approx((2.0 - n) / 2.0));
  CHECK(gsaw.comp1(n - 1, 0) == doctest::Approx((2.0 - n) / 2.0));
}

TEST_CASE("divergence: constants, Laplacian accuracy, rotated gradient")
{
  const RCGrid g(16, 16);
  VectorFieldd c(g);
  c.comp1.setConstant(1.5);
  c.comp2.setConstant(-2.5);
  CHECK(divergence(c).values.abs().maxCoeff() == 0.0);

  auto lap_err = [](int n) {
    const RCGrid gn(n, n);
    const ScalarFieldd f = sample(gn, [](double z1, double) { return std::sin(kTwoPi * z1); });
    const ScalarFieldd lap = divergence(gradient(f));
    double err = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        err = std::max(err, std::abs(lap.values(i, j) +
                                     kTwoPi * kTwoPi * std::sin(kTwoPi * gn.node1(i))));
    return err;
  };
  const double e64 = lap_err(64), e128 = lap_err(128);
  CHECK(e64 < 0.2);
  CHECK(e64 / e128 >= 3.6);
  CHECK(e64 / e128 <= 4.4);

  // rotated discrete gradient of a smooth potential: centered periodic
  // mixed partials commute, so the discrete divergence vanishes exactly
  const RCGrid g32(32, 32);
  const ScalarFieldd phi =
      sample(g32, [](double z1, double z2) { return std::sin(kTwoPi * z1) * std::sin(kTwoPi * z2); });
  const VectorFieldd gphi = gradient(phi);
  const VectorFieldd rot(g32, (-gphi.comp2).eval(), gphi.comp1);
  CHECK(divergence(rot).values.abs().maxCoeff() <= 1e-12);
}

TEST_CASE("operator properties: adjointness, zero total divergence, linearity")
{
  std::mt19937_64 eng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const RCGrid g(4 + trial % 5, 6 + trial % 4, 1.0, 1.0 + 0.1 * trial);
    const ScalarFieldd f = test_helpers::random_scalar(g, eng);
    const VectorFieldd v = test_helpers::random_vector(g, eng);

    const double lhs = dot(divergence(v), f);
    const double rhs = -dot(v, gradient(f));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, norm(v) * norm(f)));

    CHECK(std::abs(integrate(divergence(v))) <= 1e-12 * std::max(1.0, norm(v)));

    const ScalarFieldd f2 = test_helpers::random_scalar(g, eng);
    ScalarFieldd combo(g);
    combo.values = 2.0 * f.values - 0.5 * f2.values;
    const VectorFieldd lin = gradient(combo);
    const VectorFieldd ga = gradient(f), gb = gradient(f2);
    CHECK((lin.comp1 - (2.0 * ga.comp1 - 0.5 * gb.comp1)).abs().maxCoeff() <= 1e-12);
    CHECK((lin.comp2 - (2.0 * ga.comp2 - 0.5 * gb.comp2)).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("bilinear interpolation is continuous across bin boundaries")
{
  std::mt19937_64 eng(11);
  const RCGrid g(8, 8);
  const VectorFieldd v = test_helpers::random_vector(g, eng);
  const double eps = 1e-13;
  for (int i = 0; i <= 8; ++i) {
    const double edge = i * g.h1();
    const auto left = interpolate(v, edge - eps, 0.37);
    const auto right = interpolate(v, edge + eps, 0.37);
    CHECK(std::abs(left[0] - right[0]) <= 1e-9);
    CHECK(std::abs(left[1] - right[1]) <= 1e-9);
  }
}

TEST_CASE("field CSV round-trip")
{
  std::mt19937_64 eng(13);
  const RCGrid g(5, 7, 1.0, 2.0);
  const ScalarFieldd f = test_helpers::random_scalar(g, eng);

  std::stringstream ss;
  write_field(ss, f);
  const ScalarFieldd back = read_scalar_field(ss);
  CHECK(back.grid == g);
  CHECK((back.values == f.values).all());

  const VectorFieldd v = test_helpers::random_vector(g, eng);
  std::stringstream sv;
  write_field(sv, v);
  const VectorFieldd vback = read_vector_field(sv);
  CHECK(vback.grid == g);
  CHECK((vback.comp1 == v.comp1).all());
  CHECK((vback.comp2 == v.comp2).all());

  std::stringstream bad("i,j,z1,z2,value\n0,0,0,0,1\n");
  CHECK_THROWS(read_scalar_field(bad));
}
