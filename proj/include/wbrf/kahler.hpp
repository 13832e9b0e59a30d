#pragma once

#include "wbrf/flow.hpp"
#include "wbrf/profile.hpp"

#include <cstdint>

namespace wbrf {

// Scalar Kahler flow state: v = g^2 on the computational grid with its own
// Jacobian.  u = f^2 = v_s^2 / 4 is derived.
struct CalabiState {
  SpatialGrid grid;
  ArrayXd v;
  ArrayXd jac;
  double t = 0.0;

  CalabiState(SpatialGrid grid_, ArrayXd v_, ArrayXd jac_, double t_ = 0.0)
      : grid(std::move(grid_)), v(std::move(v_)), jac(std::move(jac_)), t(t_) {}

  // v > 0, jac > 0, finite; on a closed grid v must not be constant.
  void validate() const;
  ArrayXd u() const;
};

CalabiState calabi_from_profile(const MetricProfile& p);
// f = v_s / 2, g = sqrt(v).
MetricProfile profile_from_calabi(const CalabiState& c);

// Right side of v_t = 2 v_ss + v_s^2 / v - 8 and the Jacobian rate, stacked (v, jac).
Eigen::ArrayXXd calabi_rhs(const SpatialGrid& grid, const Eigen::ArrayXXd& y);

// One RK4 step.  dt == 0 returns the input.
CalabiState evolve_calabi_v(const CalabiState& c, double dt);

// RK4 substeps of at most the parabolic bound covering dt.
CalabiState advance_calabi(const CalabiState& c, double dt, const StepControl& ctl = {});

ArrayXd calabi_v_rhs(const CalabiState& c);
// u_t = v_s v_sss / 2 + v_ss v_s^2 / (2 v) - v_s^4 / (4 v^2).
ArrayXd calabi_u_rhs(const CalabiState& c);

// max |(u_after - u_before)/dt - (rhs_before + rhs_after)/2| away from open ends.
struct ResidualReport {
  double residual = 0.0;
  Index scored = 0;
};
ResidualReport u_consistency(const CalabiState& before, const CalabiState& after, Index margin = 8);

// theta = f / (g g_s), with the pole limit f_s / (g g_ss).
struct ThetaField {
  ArrayXd theta;
  Eigen::Array<bool, Eigen::Dynamic, 1> band;  // g_s >= 0.05 max g_s
  Index band_size = 0;
};
ThetaField theta_field(const MetricProfile& p);

// theta_t = theta_ss + (3 f_s/f - 2 g_s/g) theta_s - 2 theta_s^2/theta
//           + 2 (f g_s - 2 f_s g)/g^3 (theta^2 - 1)
ArrayXd theta_rhs(const MetricProfile& p, const ArrayXd& theta);

// Same trapezoidal residual as u_consistency, on the band common to both states.
ResidualReport theta_residual(const MetricProfile& before, const MetricProfile& after, Index margin = 2);

// Integrand g_ss/g - f_s g_s/(f g) + f^2/g^4 (zero at poles) and the drift
// 2 int_{x=0}^{x} integrand d rho, d rho = 2 ds / f.
struct RhoDrift {
  ArrayXd integrand;
  ArrayXd drift;
  double drift_max_abs = 0.0;
};
RhoDrift rho_drift(const MetricProfile& p);

// Full system and scalar flow from the same Kahler data to t_end, compared at
// equal distance from s_-.
struct TwinResult {
  double max_rel_dev = 0.0;
  double t_end = 0.0;
  std::int64_t steps_full = 0;
  std::int64_t steps_scalar = 0;
  std::int64_t remesh_full = 0;
  std::int64_t remesh_scalar = 0;
};
TwinResult twin_run(const MetricProfile& kahler, double t_end, const StepControl& ctl = {});

}  // namespace wbrf
