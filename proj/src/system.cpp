#include "pabf/system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace pabf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double min_image(double dx, double L) { return dx - L * std::round(dx / L); }

struct LJParams {
  double eps, sigma, rcut, rmin, shift;
  double e_rmin, de_rmin;  // truncated-shifted energy and slope at the clamp boundary
};

LJParams lj_params(const SystemSpec& s)
{
  LJParams p{};
  p.eps = s.lj_epsilon;
  p.sigma = s.lj_sigma;
  p.rcut = s.lj_rcut_factor * s.lj_sigma;
  p.rmin = s.lj_rmin_factor * s.lj_sigma;
  const auto lj = [&](double r) {
    const double sr6 = std::pow(p.sigma / r, 6);
    return 4.0 * p.eps * sr6 * (sr6 - 1.0);
  };
  p.shift = lj(p.rcut);
  p.e_rmin = lj(p.rmin) - p.shift;
  const double sr6 = std::pow(p.sigma / p.rmin, 6);
  p.de_rmin = 4.0 * p.eps * (-12.0 * sr6 * sr6 + 6.0 * sr6) / p.rmin;
  return p;
}

// Truncated-shifted LJ with a quadratic continuation below rmin whose slope
// vanishes at r = 0, so the repulsive force never exceeds its value at the
// clamp boundary.
inline double lj_energy(const LJParams& p, double r)
{
  if (r >= p.rcut) return 0.0;
  if (r < p.rmin) return p.e_rmin + p.de_rmin * (r * r - p.rmin * p.rmin) / (2.0 * p.rmin);
  const double sr6 = std::pow(p.sigma / r, 6);
  return 4.0 * p.eps * sr6 * (sr6 - 1.0) - p.shift;
}

inline double lj_denergy(const LJParams& p, double r)
{
  if (r >= p.rcut) return 0.0;
  if (r < p.rmin) return p.de_rmin * r / p.rmin;
  const double sr6 = std::pow(p.sigma / r, 6);
  return 4.0 * p.eps * (-12.0 * sr6 * sr6 + 6.0 * sr6) / r;
}

// Double well in the bond length, minima at r0 and r0 + 2w, barrier D.
inline double dw_energy(const SystemSpec& s, double r)
{
  const double w = s.dw_width * s.lj_sigma;
  const double u = (r - s.r_compact() - w) / w;
  const double q = 1.0 - u * u;
  return s.dw_height * q * q;
}

inline double dw_denergy(const SystemSpec& s, double r)
{
  const double w = s.dw_width * s.lj_sigma;
  const double u = (r - s.r_compact() - w) / w;
  return -4.0 * s.dw_height * u * (1.0 - u * u) / w;
}

struct BondGeom {
  double r;        // bond length
  double ux, uy;   // unit vector from second particle toward first
};

BondGeom bond_geometry(const SystemSpec& s, const Configuration& c, int a, int b)
{
  const double dx = min_image(c.positions[2 * a] - c.positions[2 * b], s.box_length);
  const double dy = min_image(c.positions[2 * a + 1] - c.positions[2 * b + 1], s.box_length);
  const double r = std::hypot(dx, dy);
  if (!(r > 0.0))
    throw std::runtime_error("trimer: coincident bonded particles (zero bond length)");
  return {r, dx / r, dy / r};
}

// Bend angle at the middle particle and the energy gradient w.r.t. the
// three particle positions. theta = |signed angle between the two bond
// vectors|; the harmonic rest angle is pi, where the expression is smooth.
struct AngleTerm {
  double energy;
  double g0x, g0y, g1x, g1y, g2x, g2y;  // dE/dposition
};

AngleTerm angle_term(const SystemSpec& s, const Configuration& c)
{
  const int t0 = s.trimer_indices[0], t1 = s.trimer_indices[1], t2 = s.trimer_indices[2];
  const double ax = min_image(c.positions[2 * t0] - c.positions[2 * t1], s.box_length);
  const double ay = min_image(c.positions[2 * t0 + 1] - c.positions[2 * t1 + 1], s.box_length);
  const double bx = min_image(c.positions[2 * t2] - c.positions[2 * t1], s.box_length);
  const double by = min_image(c.positions[2 * t2 + 1] - c.positions[2 * t1 + 1], s.box_length);
  const double a2 = ax * ax + ay * ay;
  const double b2 = bx * bx + by * by;
  if (!(a2 > 0.0) || !(b2 > 0.0))
    throw std::runtime_error("trimer: coincident bonded particles (zero bond length)");

  const double cross = ax * by - ay * bx;
  const double dotab = ax * bx + ay * by;
  const double phi = std::atan2(cross, dotab);  // signed, in (-pi, pi]
  const double theta = std::fabs(phi);
  const double sgn = phi >= 0.0 ? 1.0 : -1.0;

  const double dE = s.angle_k * (theta - kPi);  // dE/dtheta

  // dphi/d(r_a) = (a_y, -a_x)/|a|^2, dphi/d(r_b) = (-b_y, b_x)/|b|^2
  const double f = dE * sgn;
  AngleTerm t{};
  t.energy = 0.5 * s.angle_k * (theta - kPi) * (theta - kPi);
  t.g0x = f * (ay / a2);
  t.g0y = f * (-ax / a2);
  t.g2x = f * (-by / b2);
  t.g2y = f * (bx / b2);
  t.g1x = -(t.g0x + t.g2x);
  t.g1y = -(t.g0y + t.g2y);
  return t;
}

bool is_bonded(const SystemSpec& s, int a, int b)
{
  const int t0 = s.trimer_indices[0], t1 = s.trimer_indices[1], t2 = s.trimer_indices[2];
  return (a == t0 && b == t1) || (a == t1 && b == t0) || (a == t1 && b == t2) ||
         (a == t2 && b == t1);
}

}  // namespace

double SystemSpec::r_compact() const
{
  return bond_r0 > 0.0 ? bond_r0 : std::pow(2.0, 1.0 / 6.0) * lj_sigma;
}

double SystemSpec::r_stretched() const { return r_compact() + 2.0 * dw_width * lj_sigma; }

void SystemSpec::validate() const
{
  if (!(beta > 0.0)) throw std::invalid_argument("SystemSpec: beta must be positive");
  if (!(box_length > 0.0)) throw std::invalid_argument("SystemSpec: box_length must be positive");
  if (kind == SystemKind::ToySeparable) {
    if (d != 1) throw std::invalid_argument("SystemSpec: toy-separable requires d = 1");
    if (N < 2) throw std::invalid_argument("SystemSpec: toy-separable requires N >= 2");
  } else {
    if (d != 2) throw std::invalid_argument("SystemSpec: trimer requires d = 2");
    if (N < 3) throw std::invalid_argument("SystemSpec: trimer requires N >= 3");
    const auto& t = trimer_indices;
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw std::invalid_argument("SystemSpec: trimer indices must be distinct");
    for (int idx : t)
      if (idx < 0 || idx >= N)
        throw std::invalid_argument("SystemSpec: trimer index out of range");
    if (!(lj_epsilon > 0.0) || !(lj_sigma > 0.0) || !(dw_width > 0.0) || !(dw_height > 0.0))
      throw std::invalid_argument("SystemSpec: trimer potential parameters must be positive");
    if (!(xi_delta > 0.0) || !(xi_delta < 0.5))
      throw std::invalid_argument("SystemSpec: xi_delta must lie in (0, 0.5)");
  }
}

SystemSpec SystemSpec::toy_defaults()
{
  SystemSpec s;
  s.kind = SystemKind::ToySeparable;
  s.N = 4;
  s.d = 1;
  s.box_length = 1.0;
  s.beta = 4.0;
  return s;
}

SystemSpec SystemSpec::trimer_defaults()
{
  SystemSpec s;
  s.kind = SystemKind::Trimer;
  s.N = 100;
  s.d = 2;
  s.box_length = 10.0;
  s.beta = 4.0;
  return s;
}

double toy_w(const SystemSpec& s, double z)
{
  return s.toy_w_amp * (1.0 - std::cos(kTwoPi * z)) + s.toy_b * (1.0 - std::cos(2.0 * kTwoPi * z));
}

double toy_w_prime(const SystemSpec& s, double z)
{
  return s.toy_w_amp * kTwoPi * std::sin(kTwoPi * z) +
         s.toy_b * 2.0 * kTwoPi * std::sin(2.0 * kTwoPi * z);
}

double energy(const SystemSpec& s, const Configuration& c)
{
  if (s.kind == SystemKind::ToySeparable) {
    const double L = s.box_length;
    double e = toy_w(s, c.positions[0] / L) + toy_w(s, c.positions[1] / L);
    if (s.toy_solvent)
      for (int j = 2; j < s.N; ++j) e += 1.0 - std::cos(kTwoPi * c.positions[j] / L);
    return e;
  }

  const LJParams lj = lj_params(s);
  const double rcut2 = lj.rcut * lj.rcut;
  double e = 0.0;
  for (int a = 0; a < s.N; ++a) {
    for (int b = a + 1; b < s.N; ++b) {
      if (is_bonded(s, a, b)) continue;
      const double dx = min_image(c.positions[2 * a] - c.positions[2 * b], s.box_length);
      const double dy = min_image(c.positions[2 * a + 1] - c.positions[2 * b + 1], s.box_length);
      const double r2 = dx * dx + dy * dy;
      if (r2 >= rcut2) continue;
      e += lj_energy(lj, std::sqrt(r2));
    }
  }
  const int t0 = s.trimer_indices[0], t1 = s.trimer_indices[1], t2 = s.trimer_indices[2];
  e += dw_energy(s, bond_geometry(s, c, t0, t1).r);
  e += dw_energy(s, bond_geometry(s, c, t2, t1).r);
  e += angle_term(s, c).energy;
  return e;
}

void forces(const SystemSpec& s, const Configuration& c, Eigen::ArrayXd& out)
{
  out.resize(s.dof());
  out.setZero();

  if (s.kind == SystemKind::ToySeparable) {
    const double L = s.box_length;
    out[0] = -toy_w_prime(s, c.positions[0] / L) / L;
    out[1] = -toy_w_prime(s, c.positions[1] / L) / L;
    if (s.toy_solvent)
      for (int j = 2; j < s.N; ++j)
        out[j] = -(kTwoPi / L) * std::sin(kTwoPi * c.positions[j] / L);
    return;
  }

  const LJParams lj = lj_params(s);
  const double rcut2 = lj.rcut * lj.rcut;
  for (int a = 0; a < s.N; ++a) {
    for (int b = a + 1; b < s.N; ++b) {
      if (is_bonded(s, a, b)) continue;
      const double dx = min_image(c.positions[2 * a] - c.positions[2 * b], s.box_length);
      const double dy = min_image(c.positions[2 * a + 1] - c.positions[2 * b + 1], s.box_length);
      const double r2 = dx * dx + dy * dy;
      if (r2 >= rcut2 || r2 < 1e-24) continue;
      const double r = std::sqrt(r2);
      const double f = -lj_denergy(lj, r) / r;  // force along +r_vec on particle a
      out[2 * a] += f * dx;
      out[2 * a + 1] += f * dy;
      out[2 * b] -= f * dx;
      out[2 * b + 1] -= f * dy;
    }
  }

  const int t0 = s.trimer_indices[0], t1 = s.trimer_indices[1], t2 = s.trimer_indices[2];
  for (const auto& [a, b] : {std::pair{t0, t1}, std::pair{t2, t1}}) {
    const BondGeom bg = bond_geometry(s, c, a, b);
    const double f = -dw_denergy(s, bg.r);
    out[2 * a] += f * bg.ux;
    out[2 * a + 1] += f * bg.uy;
    out[2 * b] -= f * bg.ux;
    out[2 * b + 1] -= f * bg.uy;
  }

  const AngleTerm at = angle_term(s, c);
  out[2 * t0] -= at.g0x;
  out[2 * t0 + 1] -= at.g0y;
  out[2 * t1] -= at.g1x;
  out[2 * t1 + 1] -= at.g1y;
  out[2 * t2] -= at.g2x;
  out[2 * t2 + 1] -= at.g2y;
}

Eigen::ArrayXd forces(const SystemSpec& s, const Configuration& c)
{
  Eigen::ArrayXd out;
  forces(s, c, out);
  return out;
}

void xi(const SystemSpec& s, const Configuration& c, XiValue& out)
{
  out.jac1.resize(s.dof());
  out.jac2.resize(s.dof());
  out.jac1.setZero();
  out.jac2.setZero();

  if (s.kind == SystemKind::ToySeparable) {
    const double L = s.box_length;
    out.z = {wrap_periodic(c.positions[0], L) / L, wrap_periodic(c.positions[1], L) / L};
    out.jac1[0] = 1.0 / L;
    out.jac2[1] = 1.0 / L;
    return;
  }

  const int t0 = s.trimer_indices[0], t1 = s.trimer_indices[1], t2 = s.trimer_indices[2];
  const double slope = s.xi_slope();
  constexpr double z_hi = 1.0 - 1e-12;

  const BondGeom b1 = bond_geometry(s, c, t0, t1);
  const BondGeom b2 = bond_geometry(s, c, t2, t1);

  double z1 = s.xi_delta + slope * (b1.r - s.r_compact());
  double z2 = s.xi_delta + slope * (b2.r - s.r_compact());
  out.z = {std::clamp(z1, 0.0, z_hi), std::clamp(z2, 0.0, z_hi)};

  // Jacobians follow the linear extension of the map; only the reported
  // value is clamped into [0,1).
  out.jac1[2 * t0] = slope * b1.ux;
  out.jac1[2 * t0 + 1] = slope * b1.uy;
  out.jac1[2 * t1] = -slope * b1.ux;
  out.jac1[2 * t1 + 1] = -slope * b1.uy;
  out.jac2[2 * t2] = slope * b2.ux;
  out.jac2[2 * t2 + 1] = slope * b2.uy;
  out.jac2[2 * t1] = -slope * b2.ux;
  out.jac2[2 * t1 + 1] = -slope * b2.uy;
}

XiValue xi(const SystemSpec& s, const Configuration& c)
{
  XiValue out;
  xi(s, c, out);
  return out;
}

std::array<double, 2> local_mean_force_sample(const SystemSpec& s, const Configuration& c)
{
  if (s.kind == SystemKind::ToySeparable) {
    const double L = s.box_length;
    return {toy_w_prime(s, c.positions[0] / L), toy_w_prime(s, c.positions[1] / L)};
  }

  // f_k = grad V . w_k - (1/beta) div(w_k) with w_k = grad xi_k / |grad xi_k|^2.
  // For the bond-length map, w_k = (grad r_k) / (2 slope) and
  // div(w_k) = (d-1)/(slope * r_k).
  const Eigen::ArrayXd gradV = -forces(s, c);
  const int t0 = s.trimer_indices[0], t1 = s.trimer_indices[1], t2 = s.trimer_indices[2];
  const double slope = s.xi_slope();

  const BondGeom b1 = bond_geometry(s, c, t0, t1);
  const BondGeom b2 = bond_geometry(s, c, t2, t1);

  const double gv1 = (gradV[2 * t0] - gradV[2 * t1]) * b1.ux +
                     (gradV[2 * t0 + 1] - gradV[2 * t1 + 1]) * b1.uy;
  const double gv2 = (gradV[2 * t2] - gradV[2 * t1]) * b2.ux +
                     (gradV[2 * t2 + 1] - gradV[2 * t1 + 1]) * b2.uy;

  const double dminus1 = static_cast<double>(s.d - 1);
  const double f1 = gv1 / (2.0 * slope) - dminus1 / (s.beta * slope * b1.r);
  const double f2 = gv2 / (2.0 * slope) - dminus1 / (s.beta * slope * b2.r);
  return {f1, f2};
}

ScalarFieldd analytic_free_energy(const SystemSpec& s, const RCGrid& g)
{
  if (s.kind != SystemKind::ToySeparable)
    throw std::invalid_argument("analytic_free_energy: unsupported system kind");
  ScalarFieldd A = sample(g, [&](double z1, double z2) { return toy_w(s, z1) + toy_w(s, z2); });
  A.values -= A.values.mean();
  return A;
}

Configuration initial_configuration(const SystemSpec& s)
{
  Configuration c(Eigen::ArrayXd::Zero(s.dof()));
  if (s.kind == SystemKind::Trimer) {
    const int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(s.N))));
    const double a = s.box_length / m;
    for (int k = 0; k < s.N; ++k) {
      c.positions[2 * k] = (k % m + 0.5) * a;
      c.positions[2 * k + 1] = (k / m + 0.5) * a;
    }
    // trimer starts straight at the compact rest geometry (bonds at r0,
    // bend angle pi), so the reaction coordinate begins inside its range
    const int t0 = s.trimer_indices[0], t1 = s.trimer_indices[1], t2 = s.trimer_indices[2];
    const double r0 = s.r_compact();
    c.positions[2 * t0] = c.positions[2 * t1] - r0;
    c.positions[2 * t0 + 1] = c.positions[2 * t1 + 1];
    c.positions[2 * t2] = c.positions[2 * t1] + r0;
    c.positions[2 * t2 + 1] = c.positions[2 * t1 + 1];
    wrap_into_box(s, c);
  }
  return c;
}

std::string to_string(SystemKind k)
{
  return k == SystemKind::ToySeparable ? "toy-separable" : "trimer";
}

SystemKind system_kind_from_string(const std::string& name)
{
  if (name == "toy-separable") return SystemKind::ToySeparable;
  if (name == "trimer") return SystemKind::Trimer;
  throw std::invalid_argument("unknown system kind: " + name);
}

}  // namespace pabf
