#pragma once

#include "wbrf/numerics.hpp"

#include <array>
#include <cstdint>

namespace wbrf {

// Uniform computational grid on [-1, 1].  Both ends are poles for a closed
// manifold; soliton windows use open ends.
class SpatialGrid {
 public:
  explicit SpatialGrid(Index node_count, EndKind left = EndKind::Pole, EndKind right = EndKind::Pole);

  Index size() const { return x_.size(); }
  double h() const { return h_; }
  const ArrayXd& x() const { return x_; }
  EndKind left() const { return left_; }
  EndKind right() const { return right_; }
  bool closed() const { return left_ == EndKind::Pole && right_ == EndKind::Pole; }

  // Discretisation tolerance 10 h^2 used by every flag and invariant check.
  double tolerance() const { return 10.0 * h_ * h_; }

  // x-derivative helpers bound to this grid's end conditions.
  template <typename D>
  ArrayXd dx(const Eigen::ArrayBase<D>& v, Parity p) const {
    return num::dx(v, h_, left_, right_, p);
  }
  template <typename D>
  ArrayXd dxx(const Eigen::ArrayBase<D>& v, Parity p) const {
    return num::dxx(v, h_, left_, right_, p);
  }
  template <typename D>
  ArrayXd cumulative(const Eigen::ArrayBase<D>& v, Parity p) const {
    return num::cumulative(v, h_, left_, right_, p);
  }

  friend bool operator==(const SpatialGrid& a, const SpatialGrid& b) {
    return a.size() == b.size() && a.left_ == b.left_ && a.right_ == b.right_;
  }

 private:
  ArrayXd x_;
  double h_;
  EndKind left_, right_;
};

struct MetricProfile {
  SpatialGrid grid;
  ArrayXd f;
  ArrayXd g;
  ArrayXd jac;  // ds/dx
  double t = 0.0;

  MetricProfile(SpatialGrid grid_, ArrayXd f_, ArrayXd g_, ArrayXd jac_, double t_ = 0.0)
      : grid(std::move(grid_)), f(std::move(f_)), g(std::move(g_)), jac(std::move(jac_)), t(t_) {}

  // Throws InvalidProfile on sign, size or pole-value violations.  With
  // check_closing the one-sided pole slopes are compared to (+1, -1) and 0.
  void validate(bool check_closing = false) const;
};

// Arclength derivatives of f and g together with the Jacobian slope.
struct MetricDerivatives {
  ArrayXd f_s, f_ss, g_s, g_ss, jac_x;
};
MetricDerivatives metric_derivatives(const MetricProfile& p);

// s at every node, with s = 0 at x = 0.
ArrayXd arclength(const MetricProfile& p);

// First or second arclength derivative of a field with the given parity.
ArrayXd d_ds(const ArrayXd& field, const MetricProfile& p, int order, Parity parity);

// One-sided (second-order) slopes at the two end nodes: {f_s(-1), f_s(+1), g_s(-1), g_s(+1)}.
std::array<double, 4> one_sided_pole_slopes(const MetricProfile& p);

struct CurvatureField {
  ArrayXd k01, k02, k12, k23, R;
};
CurvatureField compute_curvatures(const MetricProfile& p);

// psi = (g g_s / f)^2 - 1, with the pole limit (g g_ss / f_s)^2 - 1.
ArrayXd psi_field(const MetricProfile& p, const MetricDerivatives& d);

enum Flag { kFlagA = 0, kFlagB, kFlagC, kFlagD, kFlagE, kFlagCount };

// Worst-case margins of the five closeness conditions.  A margin is
// nonnegative when the condition holds exactly; pass allows -tolerance.
//   a: min(g - f)      b: -max psi        c: 2/sqrt3 - max|f_s|
//   d: threshold - delta^2                e: min interior g_s (and no g_s < -tol)
struct ClosenessReport {
  std::array<bool, kFlagCount> pass{};
  std::array<double, kFlagCount> margin{};
  std::array<Index, kFlagCount> where{};
  bool all() const {
    for (bool b : pass)
      if (!b) return false;
    return true;
  }
};

struct DiagnosticRecord {
  double t = 0.0;
  std::int64_t step = 0;
  double dt = 0.0;
  double mu = 0.0;
  Index mu_argmin = 0;
  double g_minus = 0.0, g_plus = 0.0;
  double s_minus = 0.0, s_plus = 0.0;
  double threshold = 0.0;
  double rate_g2_minus = 0.0, rate_g2_plus = 0.0;  // d/dt g^2 at the poles
  double psi_min = 0.0, psi_max = 0.0;
  double F_max_abs = 0.0;
  double fs_min = 0.0, fs_max = 0.0;
  double gs_max_abs = 0.0;
  double sup_curv = 0.0;
  double curv_mu2 = 0.0;  // sup(|k12| + |k23| + |k02|) * mu^2
  double Q_min = 0.0;
  std::array<bool, kFlagCount> flags{};
  std::int64_t remesh_count = 0;
};

ClosenessReport closeness_report(const MetricProfile& p, double delta);
DiagnosticRecord compute_diagnostics(const MetricProfile& p, double delta);

}  // namespace wbrf
