#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>

#include "pabf/grid.hpp"

// Binned running estimator of the conditional mean force and of the
// reaction-coordinate density. Accumulation is time-cumulative: every
// deposit since t = 0 contributes to the averages.

namespace pabf {

using CountArray = Eigen::Array<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct BiasState {
  RCGrid grid;
  CountArray count;          // deposits per bin
  GridArray<double> sum1, sum2;  // accumulated local-mean-force components
  int n_min = 50;            // linear activation ramp threshold
  double eps_density = 1e-3; // density floor used inside the projection solve

  BiasState() = default;
  explicit BiasState(const RCGrid& g, int n_min_ = 50, double eps = 1e-3)
      : grid(g),
        count(CountArray::Zero(g.n1(), g.n2())),
        sum1(GridArray<double>::Zero(g.n1(), g.n2())),
        sum2(GridArray<double>::Zero(g.n1(), g.n2())),
        n_min(n_min_),
        eps_density(eps)
  {
  }

  std::int64_t total_count() const { return count.sum(); }
};

// Accumulates one local-mean-force sample at reaction-coordinate value z.
void deposit(BiasState& b, const std::array<double, 2>& z, const std::array<double, 2>& f);

// Per bin: ramp(count) * sum / max(count, 1) with ramp(c) = min(c/n_min, 1).
VectorFieldd force_field(const BiasState& b);

// Histogram density estimate. With `floored` the per-bin values are clamped
// from below by eps_density (uniform ellipticity for the weighted Poisson
// solve); reported dumps use the unfloored estimate. All-zero counts give
// the uniform density.
ScalarFieldd density_field(const BiasState& b, bool floored = true);

// Checkpoint as CSV `i,j,count,sum1,sum2`; restores bit-exactly.
void save_bias_state(std::ostream& os, const BiasState& b);
BiasState load_bias_state(std::istream& is, int n_min = 50, double eps_density = 1e-3);

}  // namespace pabf
