#pragma once

// Finite-difference, quadrature and interpolation kernels on a uniform
// computational grid.  Everything is written against Eigen::ArrayBase so the
// kernels accept expressions and work for any floating scalar.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <stdexcept>

namespace wbrf {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using Eigen::ArrayXd;
using Eigen::Index;

// How the grid is closed at each end.  A pole end is a reflection point for
// parity ghosts; an open end is a truncated window extrapolated by a polynomial.
enum class EndKind { Pole, Open };

// Reflection behaviour of a field across a pole end.
enum class Parity { Odd, Even };

namespace num {

inline constexpr Index kGhost = 3;

namespace detail {

// Lagrange weights for extrapolating 6 samples at 0..5 to the point -k.
inline constexpr std::array<std::array<double, 6>, 3> kExtrap = {{
    {6, -15, 20, -15, 6, -1},
    {21, -70, 105, -84, 35, -6},
    {56, -210, 336, -280, 120, -21},
}};

}  // namespace detail

// Pads v with kGhost nodes on both sides.
template <typename Derived>
ArrayX<typename Derived::Scalar> extend(const Eigen::ArrayBase<Derived>& v, EndKind left, EndKind right,
                                        Parity parity) {
  using Scalar = typename Derived::Scalar;
  const Index n = v.size();
  if (n < 2 * kGhost + 1) throw std::invalid_argument("extend: too few samples");
  ArrayX<Scalar> e(n + 2 * kGhost);
  e.segment(kGhost, n) = v;
  const Scalar sign = parity == Parity::Odd ? Scalar(-1) : Scalar(1);
  for (Index k = 1; k <= kGhost; ++k) {
    if (left == EndKind::Pole) {
      e(kGhost - k) = sign * v(k);
    } else {
      Scalar acc(0);
      for (Index j = 0; j < 6; ++j) acc += Scalar(detail::kExtrap[k - 1][j]) * v(j);
      e(kGhost - k) = acc;
    }
    if (right == EndKind::Pole) {
      e(kGhost + n - 1 + k) = sign * v(n - 1 - k);
    } else {
      Scalar acc(0);
      for (Index j = 0; j < 6; ++j) acc += Scalar(detail::kExtrap[k - 1][j]) * v(n - 1 - j);
      e(kGhost + n - 1 + k) = acc;
    }
  }
  return e;
}

// Fourth-order centred first derivative in x.
template <typename Derived>
ArrayX<typename Derived::Scalar> dx(const Eigen::ArrayBase<Derived>& v, typename Derived::Scalar h, EndKind left,
                                    EndKind right, Parity parity) {
  using Scalar = typename Derived::Scalar;
  const auto e = extend(v, left, right, parity);
  const Index n = v.size();
  const Index g = kGhost;
  return (e.segment(g - 2, n) - Scalar(8) * e.segment(g - 1, n) + Scalar(8) * e.segment(g + 1, n) -
          e.segment(g + 2, n)) /
         (Scalar(12) * h);
}

// Fourth-order centred second derivative in x.
template <typename Derived>
ArrayX<typename Derived::Scalar> dxx(const Eigen::ArrayBase<Derived>& v, typename Derived::Scalar h, EndKind left,
                                     EndKind right, Parity parity) {
  using Scalar = typename Derived::Scalar;
  const auto e = extend(v, left, right, parity);
  const Index n = v.size();
  const Index g = kGhost;
  return (-e.segment(g - 2, n) + Scalar(16) * e.segment(g - 1, n) - Scalar(30) * e.segment(g, n) +
          Scalar(16) * e.segment(g + 1, n) - e.segment(g + 2, n)) /
         (Scalar(12) * h * h);
}

// Running integral from the first node: out(i) = int_{x_0}^{x_i} v dx.
// Each cell uses the four-point rule h/24 (-v_{i-1} + 13 v_i + 13 v_{i+1} - v_{i+2}).
template <typename Derived>
ArrayX<typename Derived::Scalar> cumulative(const Eigen::ArrayBase<Derived>& v, typename Derived::Scalar h,
                                            EndKind left, EndKind right, Parity parity) {
  using Scalar = typename Derived::Scalar;
  const auto e = extend(v, left, right, parity);
  const Index n = v.size();
  ArrayX<Scalar> out(n);
  out(0) = Scalar(0);
  for (Index i = 0; i + 1 < n; ++i) {
    const Index j = i + kGhost;
    out(i + 1) = out(i) + h / Scalar(24) * (-e(j - 1) + Scalar(13) * e(j) + Scalar(13) * e(j + 1) - e(j + 2));
  }
  return out;
}

// Composite Simpson rule on arbitrary increasing abscissae.  Pairs of
// intervals use the exact quadratic weights; an odd trailing interval is
// handled by the three-point formula anchored on the last three nodes.
template <typename DerivedY, typename DerivedX>
typename DerivedY::Scalar simpson(const Eigen::ArrayBase<DerivedY>& y, const Eigen::ArrayBase<DerivedX>& x) {
  using Scalar = typename DerivedY::Scalar;
  const Index n = y.size();
  if (n != x.size()) throw std::invalid_argument("simpson: size mismatch");
  if (n < 2) return Scalar(0);
  if (n == 2) return (x(1) - x(0)) * (y(0) + y(1)) / Scalar(2);
  auto panel = [&](Index i) {
    const Scalar h0 = x(i + 1) - x(i);
    const Scalar h1 = x(i + 2) - x(i + 1);
    const Scalar hs = h0 + h1;
    return hs / Scalar(6) *
           ((Scalar(2) - h1 / h0) * y(i) + hs * hs / (h0 * h1) * y(i + 1) + (Scalar(2) - h0 / h1) * y(i + 2));
  };
  Scalar acc(0);
  Index i = 0;
  for (; i + 2 < n; i += 2) acc += panel(i);
  if (i + 1 < n) {
    // Last interval [x_{n-2}, x_{n-1}] from the quadratic through the last three nodes.
    const Scalar a = x(n - 3), b = x(n - 2), c = x(n - 1);
    const Scalar h0 = b - a, h1 = c - b;
    const Scalar w0 = -h1 * h1 * h1 / (Scalar(6) * h0 * (h0 + h1));
    const Scalar w1 = h1 * (h1 + Scalar(3) * h0) / (Scalar(6) * h0);
    const Scalar w2 = h1 * (Scalar(2) * h1 + Scalar(3) * h0) / (Scalar(6) * (h0 + h1));
    acc += w0 * y(n - 3) + w1 * y(n - 2) + w2 * y(n - 1);
  }
  return acc;
}

// Gauss-Legendre nodes and weights on [-1, 1] for n points.
struct GaussRule {
  ArrayXd nodes;
  ArrayXd weights;
};
GaussRule gauss_legendre(int n);

// Evaluates the interpolating polynomial through (xs[i], ys[i]) at x.
template <typename Scalar>
Scalar lagrange(const Scalar* xs, const Scalar* ys, int n, Scalar x) {
  Scalar acc(0);
  for (int i = 0; i < n; ++i) {
    Scalar w(1);
    for (int j = 0; j < n; ++j)
      if (j != i) w *= (x - xs[j]) / (xs[i] - xs[j]);
    acc += w * ys[i];
  }
  return acc;
}

// Uniform grid on [-1, 1].
inline ArrayXd uniform_nodes(Index n) {
  ArrayXd x(n);
  const double h = 2.0 / static_cast<double>(n - 1);
  for (Index i = 0; i < n; ++i) x(i) = -1.0 + h * static_cast<double>(i);
  x(n - 1) = 1.0;
  return x;
}

}  // namespace num
}  // namespace wbrf
