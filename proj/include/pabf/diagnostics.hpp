#pragma once

#include <Eigen/Core>

#include <vector>

#include "pabf/grid.hpp"

// The quantities behind the comparison figures: integrated cross-run
// variances of the force fields, normalized free-energy L2 error, density
// marginals and their flatness.

namespace pabf {

// Integral over the grid of the per-bin unbiased sample variance across
// runs, component-wise and summed: Var(F1) + Var(F2) per bin. Requires at
// least two runs on a common grid.
double integrated_variance(const std::vector<VectorFieldd>& fields);

// Alternative statistic: per-bin variance of the Euclidean norm,
// E|F|^2 - (E|F|)^2 (unbiased sample form), integrated.
double integrated_variance_norm(const std::vector<VectorFieldd>& fields);

// Leave-one-out jackknife standard error of integrated_variance.
struct VarianceEstimate {
  double value = 0.0;
  double stderr_est = 0.0;
};
VarianceEstimate integrated_variance_jackknife(const std::vector<VectorFieldd>& fields);

// Normalized L2 distance between free-energy estimates, gauge-invariant:
// both fields are mean-shifted before comparison. Throws on a constant
// reference.
double l2_error(const ScalarFieldd& A_est, const ScalarFieldd& A_ref);

// m1[i] = h2 * sum_j psi(i,j); m2[j] = h1 * sum_i psi(i,j).
struct Marginals {
  Eigen::ArrayXd m1, m2;
};
Marginals marginals(const ScalarFieldd& psi);

// Population variance of the marginal about its mean; zero iff uniform.
double flatness(const Eigen::ArrayXd& m);

}  // namespace pabf
