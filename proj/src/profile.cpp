#include "wbrf/profile.hpp"

#include "wbrf/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace wbrf {

SpatialGrid::SpatialGrid(Index node_count, EndKind left, EndKind right) : left_(left), right_(right) {
  if (node_count < 33) throw std::invalid_argument("SpatialGrid: node_count must be >= 33");
  x_ = num::uniform_nodes(node_count);
  h_ = 2.0 / static_cast<double>(node_count - 1);
}

namespace {

bool is_pole(const SpatialGrid& g, Index i) {
  return (i == 0 && g.left() == EndKind::Pole) || (i == g.size() - 1 && g.right() == EndKind::Pole);
}

}  // namespace

void MetricProfile::validate(bool check_closing) const {
  const Index n = grid.size();
  if (f.size() != n || g.size() != n || jac.size() != n) throw InvalidProfile("array sizes differ from the grid");
  if (!f.allFinite() || !g.allFinite() || !jac.allFinite()) throw InvalidProfile("non-finite sample");
  if ((jac <= 0.0).any()) throw InvalidProfile("jac must be positive");
  if ((g <= 0.0).any()) throw InvalidProfile("g must be positive");
  for (Index i = 0; i < n; ++i) {
    if (is_pole(grid, i)) {
      if (f(i) != 0.0) throw InvalidProfile("f must vanish at pole node " + std::to_string(i));
    } else if (f(i) <= 0.0) {
      throw InvalidProfile("f must be positive at interior node " + std::to_string(i));
    }
  }
  if (check_closing && grid.closed()) {
    const auto sl = one_sided_pole_slopes(*this);
    const double tol = grid.tolerance() * 10.0;
    if (std::abs(sl[0] - 1.0) > tol || std::abs(sl[1] + 1.0) > tol)
      throw InvalidProfile("closing condition f_s = +-1 violated at a pole");
    if (std::abs(sl[2]) > tol || std::abs(sl[3]) > tol)
      throw InvalidProfile("closing condition g_s = 0 violated at a pole");
  }
}

MetricDerivatives metric_derivatives(const MetricProfile& p) {
  const auto& G = p.grid;
  MetricDerivatives d;
  const ArrayXd f_x = G.dx(p.f, Parity::Odd);
  const ArrayXd g_x = G.dx(p.g, Parity::Even);
  d.jac_x = G.dx(p.jac, Parity::Even);
  const ArrayXd ij = p.jac.inverse();
  const ArrayXd stretch = d.jac_x * ij;
  d.f_s = f_x * ij;
  d.g_s = g_x * ij;
  d.f_ss = (G.dxx(p.f, Parity::Odd) - stretch * f_x) * ij.square();
  d.g_ss = (G.dxx(p.g, Parity::Even) - stretch * g_x) * ij.square();
  return d;
}

ArrayXd arclength(const MetricProfile& p) {
  if ((p.jac <= 0.0).any()) throw InvalidProfile("jac must be positive");
  ArrayXd s = p.grid.cumulative(p.jac, Parity::Even);
  const Index n = s.size();
  double s0;
  if (n % 2 == 1) {
    s0 = s(n / 2);
  } else {
    const Index i0 = n / 2 - 2;
    s0 = num::lagrange(p.grid.x().data() + i0, s.data() + i0, 4, 0.0);
  }
  s -= s0;
  return s;
}

ArrayXd d_ds(const ArrayXd& field, const MetricProfile& p, int order, Parity parity) {
  if (order != 1 && order != 2) throw std::invalid_argument("d_ds: order must be 1 or 2");
  const auto& G = p.grid;
  const ArrayXd v_x = G.dx(field, parity);
  const ArrayXd ij = p.jac.inverse();
  if (order == 1) return v_x * ij;
  const ArrayXd jac_x = G.dx(p.jac, Parity::Even);
  return (G.dxx(field, parity) - jac_x * ij * v_x) * ij.square();
}

std::array<double, 4> one_sided_pole_slopes(const MetricProfile& p) {
  const Index n = p.grid.size();
  const double h = p.grid.h();
  auto fwd = [&](const ArrayXd& v, Index i, double jac) { return (-3.0 * v(i) + 4.0 * v(i + 1) - v(i + 2)) / (2.0 * h * jac); };
  auto bwd = [&](const ArrayXd& v, Index i, double jac) { return (3.0 * v(i) - 4.0 * v(i - 1) + v(i - 2)) / (2.0 * h * jac); };
  return {fwd(p.f, 0, p.jac(0)), bwd(p.f, n - 1, p.jac(n - 1)), fwd(p.g, 0, p.jac(0)), bwd(p.g, n - 1, p.jac(n - 1))};
}

CurvatureField compute_curvatures(const MetricProfile& p) {
  const auto& G = p.grid;
  const Index n = G.size();
  if ((p.g <= 0.0).any()) throw InvalidProfile("g must be positive");
  for (Index i = 0; i < n; ++i)
    if (!is_pole(G, i) && p.f(i) <= 0.0) throw InvalidProfile("f must be positive at interior nodes");

  const auto d = metric_derivatives(p);
  const ArrayXd& f = p.f;
  const ArrayXd& g = p.g;
  const ArrayXd g2 = g.square();
  const ArrayXd g4 = g2.square();

  CurvatureField c;
  c.k01 = -d.f_ss / f;
  c.k02 = -d.g_ss / g;
  c.k12 = f.square() / g4 - d.f_s * d.g_s / (f * g);
  c.k23 = (4.0 * g2 - 3.0 * f.square()) / g4 - d.g_s.square() / g2;

  bool any_pole = G.left() == EndKind::Pole || G.right() == EndKind::Pole;
  if (any_pole) {
    const ArrayXd f_sss = d_ds(d.f_ss, p, 1, Parity::Odd);
    for (Index i : {Index(0), n - 1}) {
      if (!is_pole(G, i)) continue;
      c.k01(i) = -f_sss(i) / d.f_s(i);
      c.k12(i) = c.k02(i);
      c.k23(i) = 4.0 / g2(i);
    }
  }
  c.R = c.k01 + 2.0 * c.k02 + 2.0 * c.k12 + c.k23;
  return c;
}

ArrayXd psi_field(const MetricProfile& p, const MetricDerivatives& d) {
  ArrayXd psi = (p.g * d.g_s / p.f).square() - 1.0;
  const Index n = p.grid.size();
  for (Index i : {Index(0), n - 1})
    if (is_pole(p.grid, i)) psi(i) = std::pow(p.g(i) * d.g_ss(i) / d.f_s(i), 2) - 1.0;
  return psi;
}

namespace {

struct Extremum {
  double value;
  Index at;
};

template <typename D>
Extremum min_of(const Eigen::ArrayBase<D>& v) {
  Index i;
  const double m = v.minCoeff(&i);
  return {m, i};
}

ClosenessReport closeness_from(const MetricProfile& p, const MetricDerivatives& d, const ArrayXd& psi, double delta) {
  const Index n = p.grid.size();
  const double tol = p.grid.tolerance();
  ClosenessReport r;

  const auto a = min_of(p.g - p.f);
  r.margin[kFlagA] = a.value;
  r.where[kFlagA] = a.at;

  const auto b = min_of(-psi);
  r.margin[kFlagB] = b.value;
  r.where[kFlagB] = b.at;

  const auto c = min_of(2.0 / std::sqrt(3.0) - d.f_s.abs());
  r.margin[kFlagC] = c.value;
  r.where[kFlagC] = c.at;

  const double threshold = p.g(n - 1) * p.g(n - 1) - 3.0 * p.g(0) * p.g(0);
  r.margin[kFlagD] = threshold - delta * delta;
  r.where[kFlagD] = n - 1;

  const auto e_all = min_of(d.g_s);
  const auto e_int = min_of(d.g_s.segment(1, n - 2));
  r.margin[kFlagE] = e_int.value;
  r.where[kFlagE] = e_int.at + 1;

  for (int k = 0; k < kFlagE; ++k) r.pass[k] = r.margin[k] >= -tol;
  r.pass[kFlagE] = e_all.value >= -tol && e_int.value > 0.0;
  return r;
}

}  // namespace

ClosenessReport closeness_report(const MetricProfile& p, double delta) {
  if (!p.grid.closed()) throw InvalidProfile("closeness conditions need a closed grid");
  const auto d = metric_derivatives(p);
  return closeness_from(p, d, psi_field(p, d), delta);
}

DiagnosticRecord compute_diagnostics(const MetricProfile& p, double delta) {
  if (!p.grid.closed()) throw InvalidProfile("diagnostics need a closed grid");
  const Index n = p.grid.size();
  const auto d = metric_derivatives(p);
  const ArrayXd psi = psi_field(p, d);
  const auto curv = compute_curvatures(p);
  const ArrayXd s = arclength(p);

  DiagnosticRecord r;
  r.t = p.t;
  Index imin;
  r.mu = p.g.minCoeff(&imin);
  r.mu_argmin = imin;
  r.g_minus = p.g(0);
  r.g_plus = p.g(n - 1);
  r.s_minus = s(0);
  r.s_plus = s(n - 1);
  r.threshold = r.g_plus * r.g_plus - 3.0 * r.g_minus * r.g_minus;
  r.rate_g2_minus = 4.0 * p.g(0) * d.g_ss(0) - 8.0;
  r.rate_g2_plus = 4.0 * p.g(n - 1) * d.g_ss(n - 1) - 8.0;
  r.psi_min = psi.minCoeff();
  r.psi_max = psi.maxCoeff();
  ArrayXd F = p.f - p.g * d.g_s;
  F(0) = 0.0;
  F(n - 1) = 0.0;
  r.F_max_abs = F.abs().maxCoeff();
  r.fs_min = d.f_s.minCoeff();
  r.fs_max = d.f_s.maxCoeff();
  r.gs_max_abs = d.g_s.abs().maxCoeff();
  r.sup_curv = std::max({curv.k01.abs().maxCoeff(), curv.k02.abs().maxCoeff(), curv.k12.abs().maxCoeff(),
                         curv.k23.abs().maxCoeff()});
  r.curv_mu2 = (curv.k12.abs() + curv.k23.abs() + curv.k02.abs()).maxCoeff() * r.mu * r.mu;
  r.Q_min = (p.g * d.g_ss - d.g_s.square() - 2.0 * d.f_s.square()).minCoeff();
  r.flags = closeness_from(p, d, psi, delta).pass;
  return r;
}

}  // namespace wbrf
