#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

// Periodic 2-D reaction-coordinate grid and the dense fields living on it.
// Layout convention, used everywhere including file dumps: axis-1 is the
// fastest index, i.e. linear index k = i + n1*j. Fields are stored as
// Eigen arrays of shape (n1, n2); Eigen's default column-major storage
// realizes exactly this ordering.

namespace pabf {

template <typename Scalar>
using GridArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Wraps x into [0, L).
inline double wrap_periodic(double x, double L)
{
  double w = std::fmod(x, L);
  if (w < 0.0) w += L;
  if (w >= L) w = 0.0;
  return w;
}

class RCGrid {
public:
  RCGrid() = default;

  RCGrid(int n1, int n2, double L1 = 1.0, double L2 = 1.0)
      : n1_(n1), n2_(n2), L1_(L1), L2_(L2)
  {
    if (n1 < 4 || n2 < 4)
      throw std::invalid_argument("RCGrid: need at least 4 nodes per axis");
    if (!(L1 > 0.0) || !(L2 > 0.0))
      throw std::invalid_argument("RCGrid: axis lengths must be positive");
  }

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double L1() const { return L1_; }
  double L2() const { return L2_; }
  double h1() const { return L1_ / n1_; }
  double h2() const { return L2_ / n2_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(n1_) * n2_; }
  double cell_area() const { return h1() * h2(); }

  // Node (i,j) sits at (i*h1, j*h2); bin (i,j) covers [i*h1,(i+1)*h1) x ...
  double node1(int i) const { return i * h1(); }
  double node2(int j) const { return j * h2(); }

  friend bool operator==(const RCGrid& a, const RCGrid& b)
  {
    return a.n1_ == b.n1_ && a.n2_ == b.n2_ && a.L1_ == b.L1_ && a.L2_ == b.L2_;
  }

private:
  int n1_ = 4, n2_ = 4;
  double L1_ = 1.0, L2_ = 1.0;
};

template <typename Scalar>
struct ScalarField {
  RCGrid grid;
  GridArray<Scalar> values;  // (n1, n2)

  ScalarField() = default;
  explicit ScalarField(const RCGrid& g)
      : grid(g), values(GridArray<Scalar>::Zero(g.n1(), g.n2()))
  {
  }
  ScalarField(const RCGrid& g, GridArray<Scalar> v) : grid(g), values(std::move(v))
  {
    if (values.rows() != g.n1() || values.cols() != g.n2())
      throw std::invalid_argument("ScalarField: value shape does not match grid");
  }
};

template <typename Scalar>
struct VectorField {
  RCGrid grid;
  GridArray<Scalar> comp1, comp2;  // (n1, n2) each

  VectorField() = default;
  explicit VectorField(const RCGrid& g)
      : grid(g),
        comp1(GridArray<Scalar>::Zero(g.n1(), g.n2())),
        comp2(GridArray<Scalar>::Zero(g.n1(), g.n2()))
  {
  }
  VectorField(const RCGrid& g, GridArray<Scalar> c1, GridArray<Scalar> c2)
      : grid(g), comp1(std::move(c1)), comp2(std::move(c2))
  {
    if (comp1.rows() != g.n1() || comp1.cols() != g.n2() || comp2.rows() != g.n1() ||
        comp2.cols() != g.n2())
      throw std::invalid_argument("VectorField: component shape does not match grid");
  }
};

using ScalarFieldd = ScalarField<double>;
using VectorFieldd = VectorField<double>;

// Bin of a (possibly unwrapped) reaction-coordinate value; wraps first.
inline std::array<int, 2> bin_index(const RCGrid& g, double z1, double z2)
{
  if (!std::isfinite(z1) || !std::isfinite(z2))
    throw std::invalid_argument("bin_index: non-finite reaction-coordinate value");
  const double w1 = wrap_periodic(z1, g.L1());
  const double w2 = wrap_periodic(z2, g.L2());
  int i = static_cast<int>(std::floor(w1 / g.h1()));
  int j = static_cast<int>(std::floor(w2 / g.h2()));
  if (i >= g.n1()) i = g.n1() - 1;  // guard round-up at the seam
  if (j >= g.n2()) j = g.n2() - 1;
  return {i, j};
}

// Midpoint quadrature, exact for bin-constant fields.
template <typename Scalar>
Scalar integrate(const ScalarField<Scalar>& f)
{
  return f.grid.cell_area() * f.values.sum();
}

template <typename Scalar>
Scalar mean(const ScalarField<Scalar>& f)
{
  return f.values.mean();
}

// Integrate-weighted inner products.
template <typename Scalar>
Scalar dot(const ScalarField<Scalar>& f, const ScalarField<Scalar>& g)
{
  return f.grid.cell_area() * (f.values * g.values).sum();
}

template <typename Scalar>
Scalar dot(const VectorField<Scalar>& v, const VectorField<Scalar>& w)
{
  return v.grid.cell_area() * ((v.comp1 * w.comp1).sum() + (v.comp2 * w.comp2).sum());
}

template <typename Scalar>
Scalar norm(const ScalarField<Scalar>& f)
{
  using std::sqrt;
  return sqrt(dot(f, f));
}

template <typename Scalar>
Scalar norm(const VectorField<Scalar>& v)
{
  using std::sqrt;
  return sqrt(dot(v, v));
}

// Centered second-order periodic differences. Adjoint-consistent with
// divergence(): <div v, f> = -<v, grad f> exactly (up to round-off).
template <typename Scalar>
VectorField<Scalar> gradient(const ScalarField<Scalar>& f)
{
  const RCGrid& g = f.grid;
  const int n1 = g.n1(), n2 = g.n2();
  const Scalar inv2h1 = Scalar(1) / (Scalar(2) * g.h1());
  const Scalar inv2h2 = Scalar(1) / (Scalar(2) * g.h2());
  VectorField<Scalar> out(g);
  for (int j = 0; j < n2; ++j) {
    const int jp = (j + 1) % n2, jm = (j + n2 - 1) % n2;
    for (int i = 0; i < n1; ++i) {
      const int ip = (i + 1) % n1, im = (i + n1 - 1) % n1;
      out.comp1(i, j) = (f.values(ip, j) - f.values(im, j)) * inv2h1;
      out.comp2(i, j) = (f.values(i, jp) - f.values(i, jm)) * inv2h2;
    }
  }
  return out;
}

template <typename Scalar>
ScalarField<Scalar> divergence(const VectorField<Scalar>& v)
{
  const RCGrid& g = v.grid;
  const int n1 = g.n1(), n2 = g.n2();
  const Scalar inv2h1 = Scalar(1) / (Scalar(2) * g.h1());
  const Scalar inv2h2 = Scalar(1) / (Scalar(2) * g.h2());
  ScalarField<Scalar> out(g);
  for (int j = 0; j < n2; ++j) {
    const int jp = (j + 1) % n2, jm = (j + n2 - 1) % n2;
    for (int i = 0; i < n1; ++i) {
      const int ip = (i + 1) % n1, im = (i + n1 - 1) % n1;
      out.values(i, j) = (v.comp1(ip, j) - v.comp1(im, j)) * inv2h1 +
                         (v.comp2(i, jp) - v.comp2(i, jm)) * inv2h2;
    }
  }
  return out;
}

// Bilinear interpolation of node values with periodic wrap, continuous
// across bin boundaries.
template <typename Scalar>
Scalar interpolate(const ScalarField<Scalar>& f, double z1, double z2)
{
  const RCGrid& g = f.grid;
  const double u = wrap_periodic(z1, g.L1()) / g.h1();
  const double v = wrap_periodic(z2, g.L2()) / g.h2();
  int i0 = static_cast<int>(std::floor(u));
  int j0 = static_cast<int>(std::floor(v));
  if (i0 >= g.n1()) i0 = g.n1() - 1;
  if (j0 >= g.n2()) j0 = g.n2() - 1;
  const double t1 = u - i0, t2 = v - j0;
  const int i1 = (i0 + 1) % g.n1(), j1 = (j0 + 1) % g.n2();
  return static_cast<Scalar>((1.0 - t1) * (1.0 - t2)) * f.values(i0, j0) +
         static_cast<Scalar>(t1 * (1.0 - t2)) * f.values(i1, j0) +
         static_cast<Scalar>((1.0 - t1) * t2) * f.values(i0, j1) +
         static_cast<Scalar>(t1 * t2) * f.values(i1, j1);
}

template <typename Scalar>
std::array<Scalar, 2> interpolate(const VectorField<Scalar>& f, double z1, double z2)
{
  const RCGrid& g = f.grid;
  const double u = wrap_periodic(z1, g.L1()) / g.h1();
  const double v = wrap_periodic(z2, g.L2()) / g.h2();
  int i0 = static_cast<int>(std::floor(u));
  int j0 = static_cast<int>(std::floor(v));
  if (i0 >= g.n1()) i0 = g.n1() - 1;
  if (j0 >= g.n2()) j0 = g.n2() - 1;
  const double t1 = u - i0, t2 = v - j0;
  const int i1 = (i0 + 1) % g.n1(), j1 = (j0 + 1) % g.n2();
  const double w00 = (1.0 - t1) * (1.0 - t2), w10 = t1 * (1.0 - t2);
  const double w01 = (1.0 - t1) * t2, w11 = t1 * t2;
  return {static_cast<Scalar>(w00 * f.comp1(i0, j0) + w10 * f.comp1(i1, j0) +
                              w01 * f.comp1(i0, j1) + w11 * f.comp1(i1, j1)),
          static_cast<Scalar>(w00 * f.comp2(i0, j0) + w10 * f.comp2(i1, j0) +
                              w01 * f.comp2(i0, j1) + w11 * f.comp2(i1, j1))};
}

// Samples a callable (z1, z2) -> value at the grid nodes.
template <typename Scalar = double, typename F>
ScalarField<Scalar> sample(const RCGrid& g, F&& fn)
{
  ScalarField<Scalar> out(g);
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < g.n1(); ++i)
      out.values(i, j) = fn(g.node1(i), g.node2(j));
  return out;
}

template <typename Scalar = double, typename F1, typename F2>
VectorField<Scalar> sample_vector(const RCGrid& g, F1&& fn1, F2&& fn2)
{
  VectorField<Scalar> out(g);
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < g.n1(); ++i) {
      out.comp1(i, j) = fn1(g.node1(i), g.node2(j));
      out.comp2(i, j) = fn2(g.node1(i), g.node2(j));
    }
  return out;
}

template <typename Scalar>
ScalarField<Scalar> mean_shifted(const ScalarField<Scalar>& f)
{
  ScalarField<Scalar> out = f;
  out.values -= f.values.mean();
  return out;
}

}  // namespace pabf
