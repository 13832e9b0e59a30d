#include "wbrf/initial_data.hpp"

#include "wbrf/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace wbrf {

namespace num {

GaussRule gauss_legendre(int n) {
  GaussRule r{ArrayXd(n), ArrayXd(n)};
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.nodes(i) = z;
    r.weights(i) = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

}  // namespace num

namespace {

const num::GaussRule& rule8() {
  static const num::GaussRule r = num::gauss_legendre(8);
  return r;
}

template <typename F>
double gauss(F&& fn, double a, double b, int panels) {
  const auto& r = rule8();
  const double w = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * w;
    for (Index k = 0; k < r.nodes.size(); ++k) acc += r.weights(k) * fn(lo + 0.5 * w * (r.nodes(k) + 1.0));
  }
  return 0.5 * w * acc;
}

double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

// cap * int_0^{y/cap} (1 - S(u)) du for y <= cap.
double plateau_rise(double y, double cap) {
  if (y <= 0.0) return 0.0;
  const double u = std::min(y / cap, 1.0);
  return cap * gauss([](double v) { return 1.0 - smooth_step(v); }, 0.0, u, 16);
}

double bump(double z) {
  if (std::abs(z) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - z * z));
}

}  // namespace

double f_shape_value(const FShape& shape, double s) {
  const double L = shape.length;
  const double sm = -0.5 * L;
  switch (shape.kind) {
    case FShapeKind::HalfSine:
      return L / std::numbers::pi * std::sin(std::numbers::pi * (s - sm) / L);
    case FShapeKind::Plateau: {
      const double sigma = std::min(s - sm, 0.5 * L - s);
      return plateau_rise(std::max(sigma, 0.0), shape.cap);
    }
  }
  return 0.0;
}

double phi_value(const SeedParams& params, double s) {
  if (params.phi.kind == PhiKind::Constant) return 1.0 - params.epsilon;
  return 1.0 - params.epsilon * bump((s - params.phi.center) / params.phi.width);
}

double compute_A2(const ArrayXd& f, const ArrayXd& s) {
  if (f.size() != s.size()) throw std::invalid_argument("compute_A2: size mismatch");
  if ((f < 0.0).any()) throw std::invalid_argument("compute_A2: f must be nonnegative");
  return 2.0 * num::simpson(f, s);
}

double shape_A2(const FShape& shape) {
  const double L = shape.length;
  if (shape.kind == FShapeKind::HalfSine) return 4.0 * L * L / (std::numbers::pi * std::numbers::pi);
  const double cap = shape.cap;
  const double rise = gauss([&](double s) { return plateau_rise(s, cap); }, 0.0, cap, 64);
  return 2.0 * (2.0 * rise + (L - 2.0 * cap) * 0.5 * cap);
}

void check_seed(const SeedParams& p) {
  auto fail = [](const std::string& what) { throw ParameterError(what); };
  if (!(p.f_shape.length > 0.0)) fail("f_shape length must be positive");
  if (p.f_shape.kind == FShapeKind::Plateau && !(p.f_shape.cap > 0.0 && 2.0 * p.f_shape.cap < p.f_shape.length))
    fail("plateau cap must satisfy 0 < 2*cap < length");
  if (!(p.alpha > 0.0)) fail("alpha must be positive");
  if (!(p.delta > 0.0)) fail("delta must be positive");
  if (!(p.epsilon >= 0.0 && p.epsilon < 1.0)) fail("epsilon must lie in [0, 1)");
  if (p.phi.kind == PhiKind::Bump && !(p.phi.width > 0.0)) fail("phi bump width must be positive");

  const double A2 = shape_A2(p.f_shape);
  const double a2 = p.alpha * p.alpha;
  const double d2 = p.delta * p.delta;
  std::ostringstream os;
  os.precision(6);
  if (a2 + d2 > 0.5 * A2) {
    os << "alpha^2 + delta^2 <= A^2/2 violated (" << a2 + d2 << " > " << 0.5 * A2 << ")";
    fail(os.str());
  }
  if (p.epsilon > a2 / A2) {
    os << "epsilon <= alpha^2/A^2 violated (" << p.epsilon << " > " << a2 / A2 << ")";
    fail(os.str());
  }
  if (p.epsilon > d2 / A2) {
    os << "epsilon <= delta^2/A^2 violated (" << p.epsilon << " > " << d2 / A2 << ")";
    fail(os.str());
  }
}

std::vector<std::string> seed_warnings(const SeedParams& p) {
  std::vector<std::string> w;
  if (p.epsilon > 0.0 && p.phi.kind == PhiKind::Constant)
    w.emplace_back("constant phi with epsilon > 0: accepted for diagnostics, the family asks for nonconstant phi");
  return w;
}

MetricProfile construct_initial_metric(const SeedParams& params, const SpatialGrid& grid) {
  check_seed(params);
  if (!grid.closed()) throw ParameterError("initial metric needs a grid with two poles");
  const Index n = grid.size();
  const double L = params.f_shape.length;
  const double sm = -0.5 * L;
  ArrayXd s = sm + 0.5 * L * (grid.x() + 1.0);
  s(0) = sm;
  s(n - 1) = -sm;

  ArrayXd f(n), g2(n);
  for (Index i = 0; i < n; ++i) f(i) = f_shape_value(params.f_shape, s(i));
  f(0) = 0.0;
  f(n - 1) = 0.0;

  auto integrand = [&](double z) { return phi_value(params, z) * f_shape_value(params.f_shape, z); };
  g2(0) = params.alpha * params.alpha;
  for (Index i = 0; i + 1 < n; ++i) g2(i + 1) = g2(i) + 2.0 * gauss(integrand, s(i), s(i + 1), 1);

  MetricProfile p(grid, f, g2.sqrt(), ArrayXd::Constant(n, 0.5 * L), 0.0);
  p.validate();
  const auto rep = validate_closeness(p, params.delta);
  if (!rep.all()) {
    static const char* names = "abcde";
    std::string bad;
    for (int k = 0; k < kFlagCount; ++k)
      if (!rep.pass[k]) bad += names[k];
    throw ParameterError("constructed metric fails closeness condition(s) " + bad);
  }
  return p;
}

ClosenessReport validate_closeness(const MetricProfile& profile, double delta) {
  return closeness_report(profile, delta);
}

}  // namespace wbrf
