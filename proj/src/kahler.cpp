#include "wbrf/kahler.hpp"

#include "wbrf/errors.hpp"
#include "wbrf/mesh.hpp"

#include <cmath>

namespace wbrf {

namespace {

bool pole_at(const SpatialGrid& G, Index i) {
  return (i == 0 && G.left() == EndKind::Pole) || (i == G.size() - 1 && G.right() == EndKind::Pole);
}

// Second x-derivative at an end node of an even field.
double even_dxx_at(const Eigen::Ref<const ArrayXd>& v, Index i, double h) {
  const Index n = v.size();
  if (i == 0) return (-30.0 * v(0) + 32.0 * v(1) - 2.0 * v(2)) / (12.0 * h * h);
  return (-30.0 * v(n - 1) + 32.0 * v(n - 2) - 2.0 * v(n - 3)) / (12.0 * h * h);
}

double value_at_centre(const SpatialGrid& G, const ArrayXd& v) {
  const Index n = v.size();
  if (n % 2 == 1) return v(n / 2);
  const Index i0 = n / 2 - 2;
  return num::lagrange(G.x().data() + i0, v.data() + i0, 4, 0.0);
}

struct VDerivs {
  ArrayXd v_x, v_xx, v_s, v_ss, v_sss;
};

VDerivs v_derivatives(const SpatialGrid& G, const ArrayXd& v, const ArrayXd& jac) {
  VDerivs d;
  d.v_x = G.dx(v, Parity::Even);
  d.v_xx = G.dxx(v, Parity::Even);
  const ArrayXd ij = jac.inverse();
  const ArrayXd stretch = G.dx(jac, Parity::Even) * ij;
  d.v_s = d.v_x * ij;
  d.v_ss = (d.v_xx - stretch * d.v_x) * ij.square();
  d.v_sss = G.dx(d.v_ss, Parity::Even) * ij;
  return d;
}

}  // namespace

void CalabiState::validate() const {
  const Index n = grid.size();
  if (v.size() != n || jac.size() != n) throw InvalidProfile("Calabi state sizes differ from the grid");
  if (!v.allFinite() || !jac.allFinite()) throw InvalidProfile("non-finite Calabi state");
  if ((v <= 0.0).any()) throw InvalidProfile("v must be positive");
  if ((jac <= 0.0).any()) throw InvalidProfile("jac must be positive");
  if (grid.closed() && v.maxCoeff() == v.minCoeff())
    throw InvalidProfile("constant v cannot close at both poles (u = v_s^2/4 would vanish identically)");
}

ArrayXd CalabiState::u() const {
  const ArrayXd v_s = grid.dx(v, Parity::Even) / jac;
  return 0.25 * v_s.square();
}

CalabiState calabi_from_profile(const MetricProfile& p) {
  CalabiState c(p.grid, p.g.square(), p.jac, p.t);
  c.validate();
  return c;
}

MetricProfile profile_from_calabi(const CalabiState& c) {
  ArrayXd f = 0.5 * c.grid.dx(c.v, Parity::Even) / c.jac;
  const Index n = c.grid.size();
  if (c.grid.left() == EndKind::Pole) f(0) = 0.0;
  if (c.grid.right() == EndKind::Pole) f(n - 1) = 0.0;
  return MetricProfile(c.grid, f, c.v.sqrt(), c.jac, c.t);
}

Eigen::ArrayXXd calabi_rhs(const SpatialGrid& G, const Eigen::ArrayXXd& y) {
  const Index n = G.size();
  const ArrayXd v = y.col(0);
  const ArrayXd jac = y.col(1);
  const auto d = v_derivatives(G, v, jac);
  const ArrayXd iv = v.inverse();

  Eigen::ArrayXXd out(n, 2);
  out.col(0) = 2.0 * d.v_ss + d.v_s.square() * iv - 8.0;
  ArrayXd lam = d.v_sss / d.v_s + d.v_ss * iv - 0.5 * d.v_s.square() * iv.square();
  // At a pole f_s = v_xx / (2 jac^2) is held fixed.
  for (Index i : {Index(0), n - 1})
    if (pole_at(G, i)) lam(i) = even_dxx_at(out.col(0), i, G.h()) / (2.0 * d.v_xx(i));
  out.col(1) = lam * jac;
  return out;
}

CalabiState evolve_calabi_v(const CalabiState& c, double dt) {
  if (dt == 0.0) return c;
  if (!(dt > 0.0)) throw std::invalid_argument("evolve_calabi_v: dt must be nonnegative");
  Eigen::ArrayXXd y(c.grid.size(), 2);
  y.col(0) = c.v;
  y.col(1) = c.jac;
  const Eigen::ArrayXXd z = rk4(y, dt, [&](const Eigen::ArrayXXd& q) { return calabi_rhs(c.grid, q); });
  CalabiState out(c.grid, z.col(0), z.col(1), c.t + dt);
  if (!out.v.allFinite() || (out.v <= 0.0).any() || !out.jac.allFinite() || (out.jac <= 0.0).any()) {
    FlowTrajectory partial;
    partial.snapshots.push_back(profile_from_calabi(c));
    throw BlowThrough("scalar flow: v became non-positive or non-finite at t=" + std::to_string(c.t),
                      std::move(partial));
  }
  return out;
}

namespace {

double calabi_stable_dt(const CalabiState& c, const StepControl& ctl) {
  const double ds = c.grid.h() * c.jac.minCoeff();
  return ctl.cfl * std::min(ds * ds, c.v.minCoeff() / ctl.c_curv);
}

}  // namespace

CalabiState advance_calabi(const CalabiState& c, double dt, const StepControl& ctl) {
  const auto m = static_cast<std::int64_t>(std::ceil(dt / calabi_stable_dt(c, ctl)));
  CalabiState out = c;
  for (std::int64_t k = 0; k < m; ++k) out = evolve_calabi_v(out, dt / static_cast<double>(m));
  out.t = c.t + dt;
  return out;
}

ArrayXd calabi_v_rhs(const CalabiState& c) {
  Eigen::ArrayXXd y(c.grid.size(), 2);
  y.col(0) = c.v;
  y.col(1) = c.jac;
  return calabi_rhs(c.grid, y).col(0);
}

ArrayXd calabi_u_rhs(const CalabiState& c) {
  const auto d = v_derivatives(c.grid, c.v, c.jac);
  const ArrayXd iv = c.v.inverse();
  return 0.5 * d.v_s * d.v_sss + 0.5 * d.v_ss * d.v_s.square() * iv - 0.25 * d.v_s.square().square() * iv.square();
}

namespace {

Index lower_margin(const SpatialGrid& G, Index margin) { return G.left() == EndKind::Open ? margin : 0; }
Index upper_margin(const SpatialGrid& G, Index margin) { return G.right() == EndKind::Open ? margin : 0; }

}  // namespace

ResidualReport u_consistency(const CalabiState& before, const CalabiState& after, Index margin) {
  if (!(before.grid == after.grid)) throw std::invalid_argument("u_consistency: grids differ");
  const double dt = after.t - before.t;
  if (!(dt > 0.0)) throw std::invalid_argument("u_consistency: states must be ordered in time");
  const ArrayXd lhs = (after.u() - before.u()) / dt;
  const ArrayXd rhs = 0.5 * (calabi_u_rhs(before) + calabi_u_rhs(after));
  const Index n = before.grid.size();
  const Index lo = lower_margin(before.grid, margin), hi = n - upper_margin(before.grid, margin);
  ResidualReport r;
  r.residual = (lhs - rhs).segment(lo, hi - lo).abs().maxCoeff();
  r.scored = hi - lo;
  return r;
}

ThetaField theta_field(const MetricProfile& p) {
  const auto d = metric_derivatives(p);
  const Index n = p.grid.size();
  ThetaField out;
  out.theta = p.f / (p.g * d.g_s);
  for (Index i : {Index(0), n - 1})
    if (pole_at(p.grid, i)) out.theta(i) = d.f_s(i) / (p.g(i) * d.g_ss(i));
  const double gmax = d.g_s.maxCoeff();
  out.band = d.g_s >= 0.05 * gmax;
  if (!(gmax > 0.0)) out.band.setConstant(false);
  out.band_size = out.band.count();
  if (out.band_size == 0) throw BandError("theta band is empty (g_s has no positive region)");
  return out;
}

ArrayXd theta_rhs(const MetricProfile& p, const ArrayXd& theta) {
  const auto d = metric_derivatives(p);
  const ArrayXd th_s = d_ds(theta, p, 1, Parity::Even);
  const ArrayXd th_ss = d_ds(theta, p, 2, Parity::Even);
  const ArrayXd g3 = p.g.cube();
  ArrayXd rhs = th_ss + (3.0 * d.f_s / p.f - 2.0 * d.g_s / p.g) * th_s - 2.0 * th_s.square() / theta +
                2.0 * (p.f * d.g_s - 2.0 * d.f_s * p.g) / g3 * (theta.square() - 1.0);
  const Index n = p.grid.size();
  for (Index i : {Index(0), n - 1})
    if (pole_at(p.grid, i))
      rhs(i) = 4.0 * th_ss(i) - 4.0 * d.f_s(i) / (p.g(i) * p.g(i)) * (theta(i) * theta(i) - 1.0);
  return rhs;
}

ResidualReport theta_residual(const MetricProfile& before, const MetricProfile& after, Index margin) {
  if (!(before.grid == after.grid)) throw std::invalid_argument("theta_residual: grids differ");
  const double dt = after.t - before.t;
  if (!(dt > 0.0)) throw std::invalid_argument("theta_residual: states must be ordered in time");
  const auto a = theta_field(before);
  const auto b = theta_field(after);
  const ArrayXd lhs = (b.theta - a.theta) / dt;
  const ArrayXd rhs = 0.5 * (theta_rhs(before, a.theta) + theta_rhs(after, b.theta));
  const Index n = before.grid.size();
  ResidualReport r;
  for (Index i = 0; i < n; ++i) {
    bool ok = true;
    for (Index k = i - margin; k <= i + margin && ok; ++k) ok = k >= 0 && k < n && a.band(k) && b.band(k);
    if (!ok) continue;
    r.residual = std::max(r.residual, std::abs(lhs(i) - rhs(i)));
    ++r.scored;
  }
  if (r.scored == 0) throw BandError("theta residual: no node inside both bands");
  return r;
}

RhoDrift rho_drift(const MetricProfile& p) {
  const auto d = metric_derivatives(p);
  const Index n = p.grid.size();
  RhoDrift out;
  out.integrand = d.g_ss / p.g - d.f_s * d.g_s / (p.f * p.g) + p.f.square() / p.g.square().square();
  ArrayXd J = out.integrand * 2.0 * p.jac / p.f;
  for (Index i : {Index(0), n - 1})
    if (pole_at(p.grid, i)) {
      out.integrand(i) = 0.0;
      J(i) = 0.0;
    }
  const ArrayXd C = p.grid.cumulative(J, Parity::Odd);
  out.drift = 2.0 * (C - value_at_centre(p.grid, C));
  out.drift_max_abs = out.drift.abs().maxCoeff();
  return out;
}

TwinResult twin_run(const MetricProfile& kahler, double t_end, const StepControl& ctl) {
  TwinResult res;
  res.t_end = t_end;

  RunOptions opt;
  opt.stepping = ctl;
  opt.stop.t_end = t_end;
  opt.stop.mu_stop_fraction = 0.0;
  opt.output.record_stride = std::numeric_limits<std::int64_t>::max() / 2;
  FlowRunner full(kahler, opt);
  full.advance();
  const MetricProfile& pf = full.state().profile;
  res.steps_full = full.state().step;
  res.remesh_full = full.state().remesh_count;

  CalabiState c = calabi_from_profile(kahler);
  while (c.t < t_end) {
    double dt = calabi_stable_dt(c, ctl);
    bool landing = false;
    if (c.t + dt >= t_end) {
      dt = t_end - c.t;
      landing = true;
    }
    c = evolve_calabi_v(c, dt);
    if (landing) c.t = t_end;
    ++res.steps_scalar;
    if (ctl.remesh != RemeshMode::Off) {
      const ArrayXd monitor = ctl.remesh == RemeshMode::Graded ? c.v.sqrt().eval() : ArrayXd::Ones(c.v.size()).eval();
      if (mesh_distortion(c.jac, monitor) > ctl.remesh_ratio) {
        auto r = regrid(c.grid, c.jac, monitor, {{&c.v, Parity::Even}});
        c.v = std::move(r.fields[0]);
        c.jac = std::move(r.jac);
        ++res.remesh_scalar;
      }
    }
  }

  const ArrayXd sf = arclength(pf);
  const ArrayXd sc = arclength(MetricProfile(c.grid, ArrayXd::Ones(c.grid.size()), c.v.sqrt(), c.jac));
  const ArrayXd v_at = resample(sc - sc(0), c.v, Parity::Even, sf - sf(0));
  const ArrayXd g2 = pf.g.square();
  res.max_rel_dev = ((v_at - g2).abs() / g2).maxCoeff();
  return res;
}

}  // namespace wbrf
