#include "wbrf/blowup.hpp"

#include "wbrf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wbrf {

MetricProfile parabolic_rescale(const MetricProfile& p, double K, double t_center) {
  if (!(K > 0.0)) throw std::invalid_argument("parabolic_rescale: K must be positive");
  if (K == 1.0 && t_center == 0.0) return p;
  const double r = std::sqrt(K);
  return MetricProfile(p.grid, r * p.f, r * p.g, r * p.jac, K * (p.t - t_center));
}

ArrayXd calabi_coordinate(const MetricProfile& p) {
  const Index n = p.grid.size();
  const bool lp = p.grid.left() == EndKind::Pole;
  const bool rp = p.grid.right() == EndKind::Pole;
  const auto d = metric_derivatives(p);
  const ArrayXd s = arclength(p);
  const double c_lo = d.f_s(0);
  const double c_hi = -d.f_s(n - 1);

  // Regular part of 2 jac / f after removing 2/(c sigma) at each pole.
  ArrayXd J(n), sing = ArrayXd::Zero(n);
  for (Index i = 0; i < n; ++i) {
    double q = 0.0;
    const double sl = s(i) - s(0), sr = s(n - 1) - s(i);
    if (lp) {
      if (i == 0) {
        sing(i) = -std::numeric_limits<double>::infinity();
      } else {
        q -= 1.0 / (c_lo * sl);
        sing(i) += 2.0 / c_lo * std::log(sl);
      }
    }
    if (rp) {
      if (i == n - 1) {
        sing(i) = std::numeric_limits<double>::infinity();
      } else {
        q -= 1.0 / (c_hi * sr);
        sing(i) -= 2.0 / c_hi * std::log(sr);
      }
    }
    const bool at_pole = (lp && i == 0) || (rp && i == n - 1);
    J(i) = at_pole ? 0.0 : 2.0 * p.jac(i) * (1.0 / p.f(i) + q);
  }
  // The regular part vanishes at the poles; recompute the opposite-pole term there.
  if (lp) J(0) = rp ? -2.0 * p.jac(0) / (c_hi * (s(n - 1) - s(0))) : 0.0;
  if (rp) J(n - 1) = lp ? -2.0 * p.jac(n - 1) / (c_lo * (s(n - 1) - s(0))) : 0.0;

  const ArrayXd C = num::cumulative(J, p.grid.h(), EndKind::Open, EndKind::Open, Parity::Even);
  ArrayXd rho = C + sing;
  double centre;
  if (n % 2 == 1) {
    centre = rho(n / 2);
  } else {
    const Index i0 = n / 2 - 2;
    centre = num::lagrange(p.grid.x().data() + i0, rho.data() + i0, 4, 0.0);
  }
  return rho - centre;
}

RescaledFrame make_frame(const MetricProfile& p, double K, double t_center) {
  RescaledFrame fr{K, t_center, parabolic_rescale(p, K, t_center), ArrayXd()};
  const ArrayXd rho = calabi_coordinate(fr.profile);
  const ArrayXd g2 = fr.profile.g.square();
  const Index n = g2.size();
  const double target = 2.0 * g2(0);
  Index i = 1;
  while (i + 1 < n && g2(i + 1) < target) ++i;
  if (i + 1 >= n || !std::isfinite(rho(i + 1)))
    throw ExtractionError("frame never reaches g^2 = 2 mu^2; cannot anchor the Calabi coordinate");
  // Inverse interpolation rho(g^2) on up to four finite nodes.
  Index lo = std::max<Index>(1, i - 1);
  Index hi = std::min<Index>(n - 2, lo + 3);
  lo = std::max<Index>(1, hi - 3);
  const double anchor = num::lagrange(g2.data() + lo, rho.data() + lo, static_cast<int>(hi - lo + 1), target);
  fr.r_window = rho - anchor;
  return fr;
}

std::vector<RescaledFrame> extract_blowup_sequence(const FlowTrajectory& traj, int count) {
  if (count < 3) throw std::invalid_argument("extract_blowup_sequence: count must be at least 3");
  if (!traj.T_est) throw ExtractionError("trajectory has no T estimate");
  const double T = traj.T_est->T;
  std::vector<const MetricProfile*> snaps;
  for (const auto& s : traj.snapshots)
    if (T - s.t > 0.0) snaps.push_back(&s);
  if (snaps.empty()) throw ExtractionError("no snapshot before the estimated singular time");
  const double tau_last = T - snaps.back()->t;

  std::vector<RescaledFrame> out;
  const MetricProfile* prev = nullptr;
  for (int j = count - 1; j >= 0; --j) {
    const double tau = tau_last * std::ldexp(1.0, j);
    const MetricProfile* best = nullptr;
    double err = std::numeric_limits<double>::infinity();
    for (const auto* s : snaps) {
      const double e = std::abs(std::log2((T - s->t) / tau));
      if (e < err) {
        err = e;
        best = s;
      }
    }
    if (err > 0.25 || best == prev)
      throw ExtractionError("no snapshot within a factor 2^(1/4) of T - t = " + std::to_string(tau) +
                            "; rerun with more snapshots per octave or a smaller record stride");
    prev = best;
    const double mu = best->g(0);
    out.push_back(make_frame(*best, 1.0 / (mu * mu), best->t));
  }
  return out;
}

namespace {

struct Fit {
  double chi = 0.0, sigma = 1.0, dist = 0.0;
};

Fit fit_sigma(const ArrayXd& rho, const ArrayXd& g2, double chi) {
  double qmin = std::numeric_limits<double>::infinity(), qmax = -qmin;
  for (Index i = 0; i < rho.size(); ++i) {
    const double q = g2(i) / (1.0 + sol::solve_w(rho(i) + chi));
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
  }
  return {chi, 0.5 * (qmax + qmin), (qmax - qmin) / (qmax + qmin)};
}

}  // namespace

Alignment align_arrays(const ArrayXd& rho, const ArrayXd& g2, const ArrayXd& f2, const SolitonProfile& soliton,
                       double window) {
  const Index n = rho.size();
  if (g2.size() != n || f2.size() != n) throw std::invalid_argument("align_arrays: size mismatch");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::vector<Index> idx;
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(rho(i))) continue;
    lo = std::min(lo, rho(i));
    hi = std::max(hi, rho(i));
    if (std::abs(rho(i)) <= window) idx.push_back(i);
  }
  if (!(lo <= -window && hi >= window) || idx.size() < 16)
    throw AlignmentError("frame covers rho in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                         "] with " + std::to_string(idx.size()) + " nodes; need [-" + std::to_string(window) +
                         ", " + std::to_string(window) + "] with at least 16");
  ArrayXd r(idx.size()), q2(idx.size()), p2(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    r(k) = rho(idx[k]) + soliton.chi;
    q2(k) = g2(idx[k]);
    p2(k) = f2(idx[k]);
  }

  Fit best = fit_sigma(r, q2, -10.0);
  for (int k = 1; k <= 400; ++k) {
    const Fit c = fit_sigma(r, q2, -10.0 + 0.05 * k);
    if (c.dist < best.dist) best = c;
  }
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = best.chi - 0.05, b = best.chi + 0.05;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  Fit f1 = fit_sigma(r, q2, x1), f2v = fit_sigma(r, q2, x2);
  while (b - a > 1e-12) {
    if (f1.dist <= f2v.dist) {
      b = x2;
      x2 = x1;
      f2v = f1;
      x1 = b - phi * (b - a);
      f1 = fit_sigma(r, q2, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2v;
      x2 = a + phi * (b - a);
      f2v = fit_sigma(r, q2, x2);
    }
  }
  for (const Fit& c : {f1, f2v})
    if (c.dist < best.dist) best = c;

  Alignment out;
  out.chi_star = -best.chi;
  out.scale_star = 1.0 / best.sigma;
  out.dist = best.dist;
  out.nodes = static_cast<Index>(idx.size());
  for (Index k = 0; k < r.size(); ++k) {
    const double model = best.sigma * sol::phi_r_implicit(sol::solve_w(r(k) + best.chi));
    out.f2_dist = std::max(out.f2_dist, std::abs(p2(k) / model - 1.0));
  }
  return out;
}

Alignment align_distance(const RescaledFrame& frame, const SolitonProfile& soliton, double window) {
  return align_arrays(frame.r_window, frame.profile.g.square(), frame.profile.f.square(), soliton, window);
}

}  // namespace wbrf
