#pragma once

#include "wbrf/profile.hpp"

#include <cmath>
#include <functional>

namespace wbrf::testing {

// Samples f(s), g(s) on s = s0 + L (x+1)/2 with a closed grid.
inline MetricProfile sample_profile(Index n, double s0, double L, const std::function<double(double)>& f,
                                    const std::function<double(double)>& g) {
  SpatialGrid grid(n);
  ArrayXd fv(n), gv(n);
  for (Index i = 0; i < n; ++i) {
    const double s = s0 + 0.5 * L * (grid.x()(i) + 1.0);
    fv(i) = f(s);
    gv(i) = g(s);
  }
  fv(0) = 0.0;
  fv(n - 1) = 0.0;
  return MetricProfile(grid, fv, gv, ArrayXd::Constant(n, 0.5 * L));
}

inline ArrayXd sample(const MetricProfile& p, double s0, const std::function<double(double)>& fn) {
  const Index n = p.grid.size();
  ArrayXd out(n);
  for (Index i = 0; i < n; ++i) out(i) = fn(s0 + p.jac(i) * (p.grid.x()(i) + 1.0));
  return out;
}

// The constant-phi example family on [0, pi]: f = sin s, g^2 = a^2 + 2 c (1 - cos s).
struct SineFamily {
  double a2 = 1.0;
  double c = 1.0;
  double f(double s) const { return std::sin(s); }
  double g(double s) const { return std::sqrt(a2 + 2.0 * c * (1.0 - std::cos(s))); }
  double g_s(double s) const { return c * std::sin(s) / g(s); }
  double g_ss(double s) const { return (c * std::cos(s) - g_s(s) * g_s(s)) / g(s); }
  MetricProfile profile(Index n) const {
    return sample_profile(n, 0.0, M_PI, [this](double s) { return f(s); }, [this](double s) { return g(s); });
  }
};

}  // namespace wbrf::testing
