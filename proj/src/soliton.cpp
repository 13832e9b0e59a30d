#include "wbrf/soliton.hpp"

#include "wbrf/errors.hpp"
#include "wbrf/flow.hpp"

#include <cmath>
#include <stdexcept>

namespace wbrf {

namespace sol {

double implicit_residual(double phi, double r, double chi) {
  const double w = phi - 1.0;
  return std::log(w) + kA * std::log(w + kSqrt2) - (r + chi);
}

double implicit_r(double phi, double chi) {
  const double w = phi - 1.0;
  return std::log(w) + kA * std::log(w + kSqrt2) - chi;
}

double solve_w(double y) {
  if (!std::isfinite(y)) throw SolverError("solve_phi: non-finite r");
  // G(u) = u + a ln(e^u + sqrt2) - y is increasing with slope in (1, 1 + a).
  auto G = [y](double u) { return u + kA * std::log(std::exp(u) + kSqrt2) - y; };
  double hi = y;  // G(y) = a ln(e^y + sqrt2) > 0
  double lo = y - kA * std::log(std::exp(std::min(y, 700.0)) + kSqrt2) - 1.0;
  for (int k = 0; G(lo) > 0.0; ++k) {
    lo -= 1.0 + std::abs(lo);
    if (k > 60) throw SolverError("solve_phi: bracket failure");
  }
  double u = lo + (hi - lo) * 0.5;
  for (int it = 0; it < 200; ++it) {
    const double eu = std::exp(u);
    const double val = u + kA * std::log(eu + kSqrt2) - y;
    if (val > 0.0)
      hi = u;
    else
      lo = u;
    const double der = 1.0 + kA * eu / (eu + kSqrt2);
    double next = u - val / der;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-16 * std::max(1.0, std::abs(u))) {
      u = next;
      break;
    }
    u = next;
    if (hi - lo <= 1e-16 * std::max(1.0, std::abs(u))) break;
  }
  return std::exp(u);
}

double ode1_rhs(double phi) { return phi / kSqrt2 - kA - kB / phi; }

double phi_r_implicit(double w) { return 1.0 / (1.0 / w + kA / (w + kSqrt2)); }

namespace {

double ds_dz(double z) {
  const double z2 = z * z;
  return std::sqrt(kSqrt2 * (1.0 + z2) / (z2 + kSqrt2));
}

double integrate_z(double a, double b) {
  static const num::GaussRule rule = num::gauss_legendre(8);
  const int panels = 1 + static_cast<int>(std::ceil(std::abs(b - a) / 0.25));
  const double w = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * w;
    for (Index k = 0; k < rule.nodes.size(); ++k) acc += rule.weights(k) * ds_dz(lo + 0.5 * w * (rule.nodes(k) + 1.0));
  }
  return 0.5 * w * acc;
}

}  // namespace

double arclength_of_w(double w) { return integrate_z(0.0, std::sqrt(w)); }

double w_of_arclength(double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("w_of_arclength: s must be nonnegative");
  double z = s;
  for (int it = 0; it < 60; ++it) {
    const double dz = (integrate_z(0.0, z) - s) / ds_dz(z);
    z -= dz;
    if (std::abs(dz) <= 1e-16 * (1.0 + z)) break;
  }
  return z * z;
}

}  // namespace sol

ArrayXd solve_phi(const ArrayXd& r, double chi) {
  ArrayXd phi(r.size());
  for (Index i = 0; i < r.size(); ++i) phi(i) = 1.0 + sol::solve_w(r(i) + chi);
  for (Index i = 1; i < r.size(); ++i)
    if (r(i) > r(i - 1) && !(phi(i) >= phi(i - 1))) throw SolverError("solve_phi: monotonicity check failed");
  return phi;
}

SolitonProfile soliton_metric_profile(const ArrayXd& r, double chi) {
  const Index n = r.size();
  for (Index i = 1; i < n; ++i)
    if (!(r(i) > r(i - 1))) throw InvalidProfile("soliton r values must increase");
  SolitonProfile p;
  p.r = r;
  p.chi = chi;
  p.w.resize(n);
  for (Index i = 0; i < n; ++i) p.w(i) = sol::solve_w(r(i) + chi);
  p.phi = 1.0 + p.w;
  p.phi_r.resize(n);
  for (Index i = 0; i < n; ++i) p.phi_r(i) = sol::phi_r_implicit(p.w(i));
  if ((p.phi_r <= 0.0).any()) throw InvalidProfile("soliton phi_r must be positive");
  p.f = p.phi_r.sqrt();
  p.g = p.phi.sqrt();
  p.s.resize(n);
  const ArrayXd z = p.w.sqrt();
  p.s(0) = sol::arclength_of_w(p.w(0));
  for (Index i = 1; i < n; ++i) p.s(i) = p.s(i - 1) + sol::integrate_z(z(i - 1), z(i));
  return p;
}

SolitonProfile make_soliton(double r_min, double r_max, Index n, double chi) {
  ArrayXd r(n);
  const double h = (r_max - r_min) / static_cast<double>(n - 1);
  for (Index i = 0; i < n; ++i) r(i) = r_min + h * static_cast<double>(i);
  r(n - 1) = r_max;
  return soliton_metric_profile(r, chi);
}

namespace {

double uniform_step(const ArrayXd& r) {
  const Index n = r.size();
  const double h = (r(n - 1) - r(0)) / static_cast<double>(n - 1);
  for (Index i = 1; i < n; ++i)
    if (std::abs(r(i) - r(i - 1) - h) > 1e-9 * std::abs(h)) throw InvalidProfile("soliton r grid must be uniform");
  return h;
}

}  // namespace

OdeResiduals ode_residuals(const SolitonProfile& p) {
  OdeResiduals out;
  const Index n = p.r.size();
  for (Index i = 0; i < n; ++i) {
    const double phi = p.phi(i);
    const double pr = p.phi_r(i);
    out.res1_max = std::max(out.res1_max, std::abs(pr - sol::ode1_rhs(phi)));
    // phi_rr / phi_r = d(rhs)/dphi.
    const double ratio = 1.0 / sol::kSqrt2 + sol::kB / (phi * phi);
    out.res2_max = std::max(out.res2_max, std::abs(ratio + pr / phi - sol::kSqrt2 * pr + phi - 2.0));
    out.implicit_max =
        std::max(out.implicit_max, std::abs(std::log(p.w(i)) + sol::kA * std::log(p.w(i) + sol::kSqrt2) - p.r(i) - p.chi));
  }
  if (n >= 33) {
    const double hr = uniform_step(p.r);
    // d/dr on the r grid, with x in [-1, 1] spanning the window.
    const double hx = 2.0 / static_cast<double>(n - 1);
    const double dxdr = hx / hr;
    const ArrayXd pr = num::dx(p.phi, hx, EndKind::Open, EndKind::Open, Parity::Even) * dxdr;
    const ArrayXd prr = num::dxx(p.phi, hx, EndKind::Open, EndKind::Open, Parity::Even) * dxdr * dxdr;
    for (Index i = 0; i < n; ++i) {
      const double phi = p.phi(i);
      out.res1_fd_max = std::max(out.res1_fd_max, std::abs(pr(i) - sol::ode1_rhs(phi)));
      out.res2_fd_max =
          std::max(out.res2_fd_max, std::abs(prr(i) / pr(i) + pr(i) / phi - sol::kSqrt2 * pr(i) + phi - 2.0));
    }
  }
  return out;
}

SolitonDerivatives soliton_derivatives(const SolitonProfile& p) {
  SolitonDerivatives d;
  const ArrayXd& phi = p.phi;
  d.f_s = 1.0 / sol::kSqrt2 + sol::kB / phi.square();
  d.f_ss = -4.0 * sol::kB * p.f / phi.cube();
  d.g_s = p.f / p.g;
  d.g_ss = d.f_s / p.g - p.f.square() / (p.g * phi);
  return d;
}

SystemResiduals soliton_system_residuals(const SolitonProfile& p, double lambda, Index margin) {
  if (!(lambda < 0.0)) throw std::invalid_argument("soliton_system_residuals: lambda must be negative");
  const Index n = p.r.size();
  const double hr = uniform_step(p.r);
  SystemResiduals out;
  out.lambda = lambda;
  out.scale = -2.0 / lambda;
  const double c = out.scale;
  const double rc = std::sqrt(c);

  const auto d = soliton_derivatives(p);
  // Scaled metric: f, g, s by sqrt(c); first derivatives fixed; second derivatives / sqrt(c).
  const ArrayXd f = rc * p.f, g = rc * p.g;
  const ArrayXd f_s = d.f_s, g_s = d.g_s;
  const ArrayXd f_ss = d.f_ss / rc, g_ss = d.g_ss / rc;

  const double fs_cut = 0.05 * f_s.abs().maxCoeff();
  const Eigen::Array<bool, Eigen::Dynamic, 1> keep = f_s.abs() >= fs_cut;
  out.band = keep.count();
  out.excluded = n - out.band;
  if (out.band == 0) throw BandError("soliton_system_residuals: retained band is empty");

  const ArrayXd fg = f * g;
  const ArrayXd g4 = g.square().square();
  ArrayXd gamma = (f / f_s) * (f_ss / f + 2.0 * f_s * g_s / fg - 2.0 * f.square() / g4 - lambda);
  // d/ds = (2 / f) d/dr on the scaled metric (ds = f dr / 2 scales with f).
  const double hx = 2.0 / static_cast<double>(n - 1);
  const ArrayXd gamma_s = num::dx(gamma, hx, EndKind::Open, EndKind::Open, Parity::Even) * (hx / hr) * 2.0 / f;

  const ArrayXd h1d = gamma_s - (f_ss / f + 2.0 * g_ss / g - lambda);
  const ArrayXd g2d = g_ss / g - (g_s * gamma / g - f_s * g_s / fg - g_s.square() / g.square() - 2.0 * f.square() / g4 +
                                  4.0 / g.square() + lambda);
  for (Index i = margin; i < n - margin; ++i) {
    if (!keep(i)) continue;
    out.h1d_max = std::max(out.h1d_max, std::abs(h1d(i)));
    out.g2d_max = std::max(out.g2d_max, std::abs(g2d(i)));
  }
  out.F_max = (p.f - p.g * d.g_s).abs().maxCoeff();

  const auto win = soliton_window_profile(p);
  const ArrayXd gs_fd = d_ds(win.g, win, 1, Parity::Even);
  out.F_fd_max = (win.f - win.g * gs_fd).segment(margin, n - 2 * margin).abs().maxCoeff();
  return out;
}

MetricProfile soliton_window_profile(const SolitonProfile& p) {
  const Index n = p.r.size();
  const double hr = uniform_step(p.r);
  const double drdx = hr / (2.0 / static_cast<double>(n - 1));
  return MetricProfile(SpatialGrid(n, EndKind::Open, EndKind::Open), p.f, p.g, 0.5 * p.f * drdx, 0.0);
}

MetricProfile soliton_pole_window(double s_max, Index n) {
  if (!(s_max > 0.0)) throw std::invalid_argument("soliton_pole_window: s_max must be positive");
  const SpatialGrid grid(n, EndKind::Pole, EndKind::Open);
  ArrayXd f(n), g(n);
  for (Index i = 0; i < n; ++i) {
    const double w = i == 0 ? 0.0 : sol::w_of_arclength(0.5 * s_max * (grid.x()(i) + 1.0));
    f(i) = i == 0 ? 0.0 : std::sqrt(sol::phi_r_implicit(w));
    g(i) = std::sqrt(1.0 + w);
  }
  return MetricProfile(grid, f, g, ArrayXd::Constant(n, 0.5 * s_max), 0.0);
}

StepCheck soliton_step_check(const SolitonProfile& p, double dt, Index margin) {
  auto next = soliton_window_profile(p);
  // Substeps keep the explicit scheme inside its parabolic bound.
  const double dt_rf = 0.25 * dt;
  const double bound = stable_dt(next, StepControl{});
  const auto m = static_cast<std::int64_t>(std::ceil(dt_rf / bound));
  for (std::int64_t k = 0; k < m; ++k) next = step(next, dt_rf / static_cast<double>(m));
  const ArrayXd predicted = p.phi + dt * (sol::kSqrt2 * p.phi_r - p.phi);
  const Index n = p.r.size();
  StepCheck out;
  out.dt = dt;
  const ArrayXd dev = (next.g.square() - predicted).abs();
  out.max_dev = dev.segment(margin, n - 2 * margin).maxCoeff();
  out.scored = n - 2 * margin;
  out.substeps = m;
  return out;
}

}  // namespace wbrf
