#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>

#include "pabf/grid.hpp"

// Particle systems: potential energy, forces, the 2-D reaction coordinate
// and its derivatives, and the analytically solvable separable system used
// as a free-energy reference.
//
// Two kinds are provided.
//
//  toy-separable: N one-dimensional coordinates on a periodic interval,
//    V(x) = W(x_1/L) + W(x_2/L) + sum_{j>=3} U(x_j), with
//    W(z) = a*(1 - cos(2 pi z)) + b*(1 - cos(4 pi z)) and
//    U(x) = 1 - cos(2 pi x/L). The reaction coordinate is (x_1, x_2)/L,
//    so the free energy is W(z1) + W(z2) + const in closed form.
//
//  trimer: N particles in a 2-D periodic box. Three designated particles
//    form a trimer: the two bonds carry a double-well potential in the
//    bond length with minima at r0 (compact) and r0 + 2w (stretched), the
//    bend angle carries a harmonic potential about pi, and all non-bonded
//    pairs interact through truncated-shifted Lennard-Jones with a
//    quadratic short-range continuation that keeps energies finite and
//    caps the repulsive force at its value on the clamp boundary. The
//    reaction coordinate maps each bond length affinely from
//    [r0, r0+2w] onto [delta, 1-delta], extended linearly and clamped
//    into [0, 1).

namespace pabf {

enum class SystemKind { ToySeparable, Trimer };

struct SystemSpec {
  SystemKind kind = SystemKind::ToySeparable;
  int N = 4;                // particle count (coordinate count for the toy)
  int d = 1;                // physical dimension (1 toy, 2 trimer)
  double box_length = 1.0;
  double beta = 4.0;

  // toy-separable parameters
  double toy_w_amp = 1.0;   // a in W(z)
  double toy_b = 0.3;       // b in W(z), second harmonic
  bool toy_solvent = true;  // apply U to coordinates j >= 3

  // trimer parameters
  double lj_epsilon = 1.0;
  double lj_sigma = 1.0;
  double lj_rcut_factor = 2.5;   // r_cut = factor * sigma
  double lj_rmin_factor = 0.8;   // clamp boundary = factor * sigma
  double dw_height = 5.0;        // D, double-well barrier
  double dw_width = 0.5;         // w, in units of sigma
  double bond_r0 = 0.0;          // 0 means 2^(1/6) * sigma
  double angle_k = 2.0;
  double xi_delta = 0.1;         // bond-length map targets [delta, 1-delta]
  std::array<int, 3> trimer_indices = {0, 1, 2};

  int dof() const { return N * d; }
  double r_compact() const;
  double r_stretched() const;
  // slope dz/dr of the affine bond-length map
  double xi_slope() const { return (1.0 - 2.0 * xi_delta) / (r_stretched() - r_compact()); }

  void validate() const;  // throws std::invalid_argument on bad fields

  static SystemSpec toy_defaults();
  static SystemSpec trimer_defaults();
};

// Particle positions, every coordinate wrapped into [0, box_length).
struct Configuration {
  Eigen::ArrayXd positions;

  Configuration() = default;
  explicit Configuration(Eigen::ArrayXd p) : positions(std::move(p)) {}
};

inline void wrap_into_box(const SystemSpec& s, Configuration& c)
{
  for (Eigen::Index k = 0; k < c.positions.size(); ++k)
    c.positions[k] = wrap_periodic(c.positions[k], s.box_length);
}

// Reaction-coordinate value and its configuration-space derivatives.
struct XiValue {
  std::array<double, 2> z;  // in [0,1)^2
  Eigen::ArrayXd jac1, jac2;  // d z_k / d x, length N*d
};

double energy(const SystemSpec& s, const Configuration& c);

// Exact negative gradient of energy().
Eigen::ArrayXd forces(const SystemSpec& s, const Configuration& c);
void forces(const SystemSpec& s, const Configuration& c, Eigen::ArrayXd& out);

XiValue xi(const SystemSpec& s, const Configuration& c);
void xi(const SystemSpec& s, const Configuration& c, XiValue& out);

// Per-configuration statistic whose conditional average given xi = z is
// the mean force dA/dz.
std::array<double, 2> local_mean_force_sample(const SystemSpec& s, const Configuration& c);

// Closed-form free energy of the toy system on the grid nodes, shifted to
// zero mean. Throws on the trimer kind.
ScalarFieldd analytic_free_energy(const SystemSpec& s, const RCGrid& g);

// One-dimensional ingredients, exposed for oracles and diagnostics.
double toy_w(const SystemSpec& s, double z);        // W(z)
double toy_w_prime(const SystemSpec& s, double z);  // W'(z)

// Deterministic starting configuration (toy: all coordinates zero;
// trimer: square lattice with the trimer in a row at lattice spacing).
Configuration initial_configuration(const SystemSpec& s);

std::string to_string(SystemKind k);
SystemKind system_kind_from_string(const std::string& name);

}  // namespace pabf
