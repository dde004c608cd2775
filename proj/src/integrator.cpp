#include "pabf/integrator.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pabf/errors.hpp"
#include "pabf/rng.hpp"

namespace pabf {

Ensemble make_ensemble(const SystemSpec& s, int M, std::uint64_t master_seed)
{
  if (M < 1) throw std::invalid_argument("make_ensemble: need at least one replica");
  Ensemble e;
  e.replicas.assign(M, initial_configuration(s));
  e.engines.reserve(M);
  for (int r = 0; r < M; ++r) e.engines.push_back(make_engine(master_seed, r));
  return e;
}

void step(const SystemSpec& s, Ensemble& e, const BiasForceView& b, double dt,
          BiasState* deposit_to)
{
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  const double noise_scale = std::sqrt(2.0 * dt / s.beta);
  const int dof = s.dof();

  static thread_local Eigen::ArrayXd fphys;
  static thread_local XiValue xv;

  for (int r = 0; r < e.size(); ++r) {
    // fresh distribution per replica: draws depend only on the replica's
    // own engine state, keeping serial and parallel sequences identical
    std::normal_distribution<double> gauss(0.0, 1.0);
    Configuration& c = e.replicas[r];
    forces(s, c, fphys);
    xi(s, c, xv);

    if (deposit_to != nullptr)
      deposit(*deposit_to, xv.z, local_mean_force_sample(s, c));

    if (!b.empty()) {
      const auto bias = interpolate(b.field, xv.z[0], xv.z[1]);
      fphys += bias[0] * xv.jac1 + bias[1] * xv.jac2;
    }

    auto& eng = e.engines[r];
    for (int k = 0; k < dof; ++k) {
      const double x = c.positions[k] + fphys[k] * dt + noise_scale * gauss(eng);
      if (!std::isfinite(x))
        throw BlowupError("integrator blowup: non-finite position in replica " +
                              std::to_string(r) + " at step " + std::to_string(e.steps_taken) +
                              " (dt too large?)",
                          r, e.steps_taken);
      c.positions[k] = wrap_periodic(x, s.box_length);
    }
  }
  e.time += dt;
  e.steps_taken += 1;
}

MomentReport sample_boltzmann_check(const SystemSpec& s, long steps, double dt,
                                    std::uint64_t seed, int replicas)
{
  if (s.kind != SystemKind::ToySeparable)
    throw std::invalid_argument("sample_boltzmann_check: toy-separable kind only");

  Ensemble e = make_ensemble(s, replicas, seed);
  const BiasForceView no_bias{BiasMode::Abf, {}};
  const long burn_in = steps / 5;
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<double> acc(replicas, 0.0);
  long kept = 0;
  for (long t = 0; t < steps; ++t) {
    step(s, e, no_bias, dt);
    if (t < burn_in) continue;
    ++kept;
    for (int r = 0; r < replicas; ++r)
      acc[r] += std::cos(two_pi * e.replicas[r].positions[0] / s.box_length);
  }

  MomentReport rep;
  rep.replicas = replicas;
  double mean = 0.0;
  for (int r = 0; r < replicas; ++r) {
    acc[r] /= static_cast<double>(kept);
    mean += acc[r];
  }
  mean /= replicas;
  double var = 0.0;
  for (int r = 0; r < replicas; ++r) var += (acc[r] - mean) * (acc[r] - mean);
  var /= (replicas - 1);

  rep.estimate = mean;
  rep.stderr_est = std::sqrt(var / replicas);
  rep.reference = toy_axis_average(s, [](double z) { return std::cos(2.0 * std::numbers::pi * z); });
  return rep;
}

}  // namespace pabf
