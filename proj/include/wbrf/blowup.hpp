#pragma once

#include "wbrf/flow.hpp"
#include "wbrf/profile.hpp"
#include "wbrf/soliton.hpp"

#include <vector>

namespace wbrf {

// K G(t_center + t / K): lengths scale by sqrt K, time is recentred and
// stretched by K.  Curvatures divide by K.
MetricProfile parabolic_rescale(const MetricProfile& p, double K, double t_center = 0.0);

// Calabi coordinate with d rho = 2 ds / f, zero at x = 0.  The logarithmic
// singularity at each pole is split off analytically, so pole nodes hold
// -inf / +inf and every other node is finite.
ArrayXd calabi_coordinate(const MetricProfile& p);

struct RescaledFrame {
  double K = 1.0;
  double t_center = 0.0;
  MetricProfile profile;
  ArrayXd r_window;  // rho, anchored at g^2 = 2 g(s_-)^2
};

// Rescales and anchors one profile.  The anchor is the first crossing of
// g^2 = 2 g(s_-)^2 moving away from s_-.
RescaledFrame make_frame(const MetricProfile& p, double K, double t_center);

// Frames at T - t_k = (T - t_last) 2^j, j = 0..count-1, each taken from the
// snapshot nearest in log(T - t) with K = 1 / mu(t_k)^2.  Returned oldest first.
std::vector<RescaledFrame> extract_blowup_sequence(const FlowTrajectory& traj, int count);

struct Alignment {
  double chi_star = 0.0;    // shift that carries the frame onto the soliton
  double scale_star = 1.0;  // factor that carries the frame's g^2 onto the soliton's
  double dist = 0.0;        // relative sup distance of g^2 on the window
  double f2_dist = 0.0;     // same for f^2 at the optimum
  Index nodes = 0;
};

// Fits g^2 ~ sigma phi(rho + chi) on |rho| <= window.  sigma has a closed form
// for fixed chi; chi is found by a 0.05 grid on [-10, 10] refined by golden
// section.  Reports chi_star = -chi and scale_star = 1/sigma.
Alignment align_arrays(const ArrayXd& rho, const ArrayXd& g2, const ArrayXd& f2, const SolitonProfile& soliton,
                       double window = 5.0);
Alignment align_distance(const RescaledFrame& frame, const SolitonProfile& soliton, double window = 5.0);

}  // namespace wbrf
