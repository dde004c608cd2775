#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pabf/estimator.hpp"
#include "pabf/grid.hpp"
#include "pabf/system.hpp"

// Euler-Maruyama discretization of the biased overdamped dynamics,
// advancing M replicas in lockstep under a shared frozen bias.

namespace pabf {

enum class BiasMode { Abf, Pabf };

// The frozen per-sweep bias: grad A in PABF mode, the raw mean-force
// estimate in ABF mode. An empty field means no bias.
struct BiasForceView {
  BiasMode mode = BiasMode::Pabf;
  VectorFieldd field;

  bool empty() const { return field.comp1.size() == 0; }
};

struct Ensemble {
  std::vector<Configuration> replicas;
  std::vector<std::mt19937_64> engines;  // one stream per replica
  double time = 0.0;
  long steps_taken = 0;

  int size() const { return static_cast<int>(replicas.size()); }
};

// All replicas start from the deterministic initial configuration; replica
// r draws from a stream seeded from (master_seed, r) so serial and
// parallel execution produce identical trajectories.
Ensemble make_ensemble(const SystemSpec& s, int M, std::uint64_t master_seed);

// One Euler-Maruyama step for every replica:
//   X <- wrap(X + (F_phys + F_bias) dt + sqrt(2 dt / beta) G),
// where the bias force is sum_k B_k(xi(X)) grad xi_k(X) with B the
// bilinear interpolation of the bias field at the replica's
// reaction-coordinate value. When deposit_to is non-null, each replica
// deposits (xi, local_mean_force_sample) evaluated at its pre-move
// configuration. Throws BlowupError if a position leaves the finite range.
void step(const SystemSpec& s, Ensemble& e, const BiasForceView& b, double dt,
          BiasState* deposit_to = nullptr);

struct MomentReport {
  double estimate = 0.0;   // time-averaged E[cos(2 pi x_1 / L)]
  double reference = 0.0;  // 1-D quadrature value under the target measure
  double stderr_est = 0.0; // across-replica standard error
  int replicas = 0;
  bool within(double n_sigma) const
  {
    return std::abs(estimate - reference) <= n_sigma * stderr_est;
  }
};

// Unbiased sampling check on the toy system: compares the time average of
// cos(2 pi x_1 / L) with its quadrature value under the Boltzmann measure.
MomentReport sample_boltzmann_check(const SystemSpec& s, long steps, double dt,
                                    std::uint64_t seed, int replicas = 16);

// Quadrature of E[g(z)] under exp(-beta W(z)) dz on [0,1), midpoint rule.
template <typename G>
double toy_axis_average(const SystemSpec& s, G&& g, int n_quad = 4096)
{
  double num = 0.0, den = 0.0;
  for (int k = 0; k < n_quad; ++k) {
    const double z = (k + 0.5) / n_quad;
    const double w = std::exp(-s.beta * toy_w(s, z));
    num += g(z) * w;
    den += w;
  }
  return num / den;
}

}  // namespace pabf
