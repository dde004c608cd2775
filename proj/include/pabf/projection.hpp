#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pabf/errors.hpp"
#include "pabf/grid.hpp"

// Projection of a vector field onto a gradient: solve the weighted Poisson
// problem div(psi * grad A) = div(psi * F) on the periodic grid and return
// the mean-zero potential A together with grad A. With the centered
// operators from grid.hpp the system matrix is G^T diag(psi) G up to the
// quadrature weight, hence symmetric positive semidefinite with nullspace
// equal to the constants; conjugate gradients restricted to the mean-zero
// subspace solve it without pinning a node.

namespace pabf {

template <typename Scalar>
struct ProjectionResult {
  ScalarField<Scalar> A;       // mean-zero potential
  VectorField<Scalar> gradA;   // discrete gradient of A
  Scalar residual_div = 0;     // final relative linear residual
  int iterations = 0;
};

using ProjectionResultd = ProjectionResult<double>;

namespace detail {

// y = -div(psi * grad x), the SPD operator on the mean-zero subspace.
template <typename Scalar>
void apply_weighted_laplacian(const RCGrid& g, const GridArray<Scalar>& psi,
                              const GridArray<Scalar>& x, GridArray<Scalar>& y)
{
  const int n1 = g.n1(), n2 = g.n2();
  const Scalar inv2h1 = Scalar(1) / (Scalar(2) * g.h1());
  const Scalar inv2h2 = Scalar(1) / (Scalar(2) * g.h2());
  static thread_local GridArray<Scalar> w1, w2;
  w1.resize(n1, n2);
  w2.resize(n1, n2);
  for (int j = 0; j < n2; ++j) {
    const int jp = (j + 1) % n2, jm = (j + n2 - 1) % n2;
    for (int i = 0; i < n1; ++i) {
      const int ip = (i + 1) % n1, im = (i + n1 - 1) % n1;
      w1(i, j) = psi(i, j) * (x(ip, j) - x(im, j)) * inv2h1;
      w2(i, j) = psi(i, j) * (x(i, jp) - x(i, jm)) * inv2h2;
    }
  }
  for (int j = 0; j < n2; ++j) {
    const int jp = (j + 1) % n2, jm = (j + n2 - 1) % n2;
    for (int i = 0; i < n1; ++i) {
      const int ip = (i + 1) % n1, im = (i + n1 - 1) % n1;
      y(i, j) = -((w1(ip, j) - w1(im, j)) * inv2h1 + (w2(i, jp) - w2(i, jm)) * inv2h2);
    }
  }
}

}  // namespace detail

// Solves for the gradient part of F under density weight psi. psi must be
// strictly positive everywhere (use the estimator's floored density).
// `guess` warm-starts the iteration; pass nullptr for a zero start.
template <typename Scalar>
ProjectionResult<Scalar> project(const VectorField<Scalar>& F, const ScalarField<Scalar>& psi,
                                 Scalar tol = Scalar(1e-8), int max_iter = 0,
                                 const ScalarField<Scalar>* guess = nullptr)
{
  const RCGrid& g = F.grid;
  if (!(psi.grid == g))
    throw std::invalid_argument("project: psi and F live on different grids");
  if (!(psi.values.minCoeff() > Scalar(0)))
    throw std::invalid_argument("project: psi must be strictly positive");
  if (max_iter <= 0) max_iter = 10 * g.n1() * g.n2();

  using Array = GridArray<Scalar>;

  // b = -div(psi * F), projected onto mean zero (it sums to zero already
  // by the telescoping property; the subtraction removes round-off).
  VectorField<Scalar> psiF(g, psi.values * F.comp1, psi.values * F.comp2);
  Array b = -divergence(psiF).values;
  b -= b.mean();

  const Scalar bnorm = std::sqrt((b * b).sum());
  ProjectionResult<Scalar> out;
  out.A = ScalarField<Scalar>(g);

  // right-hand sides that vanish up to stencil round-off (constant or
  // divergence-free inputs) have no gradient part
  const Scalar stencil_scale =
      (Scalar(1) / g.h1() + Scalar(1) / g.h2()) *
      std::sqrt((psiF.comp1 * psiF.comp1 + psiF.comp2 * psiF.comp2).sum());
  const Scalar floor =
      Scalar(64) * std::numeric_limits<Scalar>::epsilon() * std::max(stencil_scale, Scalar(1));
  if (bnorm <= floor) {
    out.gradA = VectorField<Scalar>(g);
    return out;
  }

  Array x = Array::Zero(g.n1(), g.n2());
  if (guess != nullptr && guess->grid == g) {
    x = guess->values;
    x -= x.mean();
  }

  Array Ax(g.n1(), g.n2());
  detail::apply_weighted_laplacian<Scalar>(g, psi.values, x, Ax);
  Array r = b - Ax;
  r -= r.mean();
  Array p = r;
  Array Ap(g.n1(), g.n2());
  Scalar rr = (r * r).sum();

  const Scalar stop = std::max(tol * bnorm, floor);
  int it = 0;
  while (std::sqrt(rr) > stop && it < max_iter) {
    detail::apply_weighted_laplacian<Scalar>(g, psi.values, p, Ap);
    Ap -= Ap.mean();
    const Scalar pAp = (p * Ap).sum();
    if (!(pAp > Scalar(0))) break;  // numerically singular direction
    const Scalar alpha = rr / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    r -= r.mean();
    const Scalar rr_new = (r * r).sum();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    ++it;
  }

  const Scalar rel = std::sqrt(rr) / bnorm;
  if (std::sqrt(rr) > stop)
    throw SolverError("project: conjugate gradients did not converge (relative residual " +
                          std::to_string(static_cast<double>(rel)) + " after " +
                          std::to_string(it) + " iterations)",
                      static_cast<double>(rel), it);

  x -= x.mean();
  out.A.values = x;
  out.gradA = gradient(out.A);
  out.residual_div = rel;
  out.iterations = it;
  return out;
}

// Integrate-norm of div(psi*F - psi*gradA), the divergence of the
// divergence-free remainder; equals the final linear residual up to
// round-off and quadrature scaling.
template <typename Scalar>
Scalar projection_defect(const VectorField<Scalar>& F, const ScalarField<Scalar>& psi,
                         const ProjectionResult<Scalar>& result)
{
  const RCGrid& g = F.grid;
  VectorField<Scalar> rem(g, psi.values * (F.comp1 - result.gradA.comp1),
                          psi.values * (F.comp2 - result.gradA.comp2));
  ScalarField<Scalar> d = divergence(rem);
  return norm(d);
}

}  // namespace pabf
