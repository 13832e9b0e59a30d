#pragma once

#include "wbrf/profile.hpp"

#include <cstdint>

namespace wbrf {

// The U(2)-invariant shrinking Kahler-Ricci soliton on O(-1), in Calabi form
// g^2 = phi(r), f^2 = dphi/dr, ds = f dr / 2, normalised so phi -> 1 as r -> -inf.
// With w = phi - 1 it is given implicitly by
//     ln w + (sqrt2 - 1) ln(w + sqrt2) = r + chi.
namespace sol {

inline constexpr double kSqrt2 = 1.41421356237309504880168872420969808;
inline constexpr double kA = kSqrt2 - 1.0;        // sqrt2 - 1
inline constexpr double kB = 1.0 - 1.0 / kSqrt2;  // 1 - 1/sqrt2

// Left side of the implicit relation minus (r + chi), for phi > 1.
double implicit_residual(double phi, double r, double chi);

// r at which phi is attained (forward evaluation of the implicit relation).
double implicit_r(double phi, double chi);

// w = phi - 1 solving the implicit relation at y = r + chi (Newton in ln w, bracketed).
double solve_w(double y);

// First-order ODE right side phi/sqrt2 - (sqrt2 - 1) - (1 - 1/sqrt2)/phi.
double ode1_rhs(double phi);

// dphi/dr from implicit differentiation, written in w to keep digits near phi = 1.
double phi_r_implicit(double w);

// Arclength from the pole: s = int_0^{sqrt w} sqrt(sqrt2 (1 + v^2) / (v^2 + sqrt2)) dv.
double arclength_of_w(double w);
// Inverse of arclength_of_w.
double w_of_arclength(double s);

}  // namespace sol

ArrayXd solve_phi(const ArrayXd& r, double chi = 0.0);

struct SolitonProfile {
  ArrayXd r;
  ArrayXd phi;
  ArrayXd w;      // phi - 1, carried separately for precision near the pole
  ArrayXd phi_r;  // implicit-function derivative
  double chi = 0.0;
  ArrayXd s, f, g;
};

// Samples the soliton on the given increasing r values.
SolitonProfile soliton_metric_profile(const ArrayXd& r, double chi = 0.0);

// Uniform r grid with n nodes on [r_min, r_max].
SolitonProfile make_soliton(double r_min, double r_max, Index n, double chi = 0.0);

struct OdeResiduals {
  double res1_max = 0.0;     // first-order ODE with implicit phi_r
  double res2_max = 0.0;     // second-order ODE with derivatives supplied by the first
  double res1_fd_max = 0.0;  // same with finite-difference derivatives in r
  double res2_fd_max = 0.0;
  double implicit_max = 0.0;  // implicit relation residual
};
OdeResiduals ode_residuals(const SolitonProfile& p);

// Closed-form arclength derivatives of the soliton metric (unit normalisation).
struct SolitonDerivatives {
  ArrayXd f_s, f_ss, g_s, g_ss;
};
SolitonDerivatives soliton_derivatives(const SolitonProfile& p);

struct SystemResiduals {
  double lambda = -1.0;
  double scale = 2.0;     // metric factor that puts the soliton at this lambda
  double h1d_max = 0.0;   // gamma_s - (f_ss/f + 2 g_ss/g - lambda)
  double g2d_max = 0.0;   // g-equation with gamma recovered from the f-equation
  double F_max = 0.0;     // |f - g g_s| with closed-form derivatives
  double F_fd_max = 0.0;  // same with finite-difference derivatives of the sampled profile
  Index band = 0;         // retained nodes (|f_s| >= 0.05 max|f_s|)
  Index excluded = 0;
};

// Residuals of the soliton system.  The sampled profile has lambda = -2 in
// this normalisation; other lambda values are reached by scaling the metric
// by -2/lambda.  Nodes within `margin` of the window ends are not scored.
SystemResiduals soliton_system_residuals(const SolitonProfile& p, double lambda = -1.0, Index margin = 8);

// The soliton window as an open-ended MetricProfile with x uniform in r.
MetricProfile soliton_window_profile(const SolitonProfile& p);

// The soliton on s in [0, s_max], uniform in s, with the pole as the left end
// and an open right end.
MetricProfile soliton_pole_window(double s_max, Index n);

// One RK4 Ricci flow step of the window against the self-similar prediction
// phi + dt (sqrt2 phi_r - phi).  dt is in the potential-flow time, which runs
// four times faster than Ricci flow time in this normalisation.  The step is
// split into RK4 substeps when dt exceeds the explicit stability bound.
struct StepCheck {
  double max_dev = 0.0;
  double dt = 0.0;
  Index scored = 0;
  std::int64_t substeps = 1;
};
StepCheck soliton_step_check(const SolitonProfile& p, double dt, Index margin = 16);

}  // namespace wbrf
