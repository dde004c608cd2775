#include "pabf/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace pabf {

namespace {

void require_replicated(const std::vector<VectorFieldd>& fields)
{
  if (fields.size() < 2)
    throw std::invalid_argument("integrated_variance: need at least two runs");
  for (const auto& f : fields)
    if (!(f.grid == fields.front().grid))
      throw std::invalid_argument("integrated_variance: fields on different grids");
}

}  // namespace

double integrated_variance(const std::vector<VectorFieldd>& fields)
{
  require_replicated(fields);
  const auto R = static_cast<double>(fields.size());
  const RCGrid& g = fields.front().grid;

  GridArray<double> mean1 = GridArray<double>::Zero(g.n1(), g.n2());
  GridArray<double> mean2 = mean1;
  for (const auto& f : fields) {
    mean1 += f.comp1;
    mean2 += f.comp2;
  }
  mean1 /= R;
  mean2 /= R;

  GridArray<double> var = GridArray<double>::Zero(g.n1(), g.n2());
  for (const auto& f : fields)
    var += (f.comp1 - mean1).square() + (f.comp2 - mean2).square();
  var /= (R - 1.0);
  return g.cell_area() * var.sum();
}

double integrated_variance_norm(const std::vector<VectorFieldd>& fields)
{
  require_replicated(fields);
  const auto R = static_cast<double>(fields.size());
  const RCGrid& g = fields.front().grid;

  GridArray<double> mean_norm = GridArray<double>::Zero(g.n1(), g.n2());
  std::vector<GridArray<double>> norms;
  norms.reserve(fields.size());
  for (const auto& f : fields) {
    norms.push_back((f.comp1.square() + f.comp2.square()).sqrt());
    mean_norm += norms.back();
  }
  mean_norm /= R;

  GridArray<double> var = GridArray<double>::Zero(g.n1(), g.n2());
  for (const auto& n : norms) var += (n - mean_norm).square();
  var /= (R - 1.0);
  return g.cell_area() * var.sum();
}

VarianceEstimate integrated_variance_jackknife(const std::vector<VectorFieldd>& fields)
{
  require_replicated(fields);
  VarianceEstimate est;
  est.value = integrated_variance(fields);
  const int R = static_cast<int>(fields.size());
  if (R < 3) return est;  // jackknife needs R-1 >= 2 per leave-one-out set

  std::vector<double> loo(R);
  for (int r = 0; r < R; ++r) {
    std::vector<VectorFieldd> rest;
    rest.reserve(R - 1);
    for (int q = 0; q < R; ++q)
      if (q != r) rest.push_back(fields[q]);
    loo[r] = integrated_variance(rest);
  }
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= R;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  est.stderr_est = std::sqrt((R - 1.0) / R * ss);
  return est;
}

double l2_error(const ScalarFieldd& A_est, const ScalarFieldd& A_ref)
{
  if (!(A_est.grid == A_ref.grid))
    throw std::invalid_argument("l2_error: fields on different grids");
  GridArray<double> est = A_est.values - A_est.values.mean();
  GridArray<double> ref = A_ref.values - A_ref.values.mean();
  const double denom = ref.square().sum();
  if (denom <= 0.0)
    throw std::invalid_argument("l2_error: degenerate (constant) reference field");
  return std::sqrt((est - ref).square().sum() / denom);
}

Marginals marginals(const ScalarFieldd& psi)
{
  const RCGrid& g = psi.grid;
  Marginals m;
  m.m1 = psi.values.rowwise().sum() * g.h2();
  m.m2 = psi.values.colwise().sum().transpose() * g.h1();
  return m;
}

double flatness(const Eigen::ArrayXd& m)
{
  const double mean = m.mean();
  return (m - mean).square().mean();
}

}  // namespace pabf
