#pragma once

#include "wbrf/profile.hpp"

#include <string>
#include <vector>

namespace wbrf {

enum class FShapeKind { HalfSine, Plateau };

// f on [s_-, s_+] = [-L/2, L/2].
//   HalfSine: f = L/pi sin(pi (s - s_-) / L)
//   Plateau:  slope 1 - S(sigma/cap) from each pole, where S is the smooth
//             step exp(-1/u) / (exp(-1/u) + exp(-1/(1-u))); f = cap/2 on the middle.
struct FShape {
  FShapeKind kind = FShapeKind::HalfSine;
  double length = 3.141592653589793238462643383279502884;
  double cap = 1.0;  // plateau only
};

enum class PhiKind { Constant, Bump };

// phi = 1 - eps (Constant) or 1 - eps * bump((s - center) / width) (Bump).
struct PhiShape {
  PhiKind kind = PhiKind::Constant;
  double center = 0.0;
  double width = 1.0;
};

struct SeedParams {
  FShape f_shape;
  double alpha = 1.0;
  double delta = 0.5;
  double epsilon = 0.0;
  PhiShape phi;
};

double f_shape_value(const FShape& shape, double s);
double phi_value(const SeedParams& params, double s);

// 2 * integral of f over samples at arbitrary increasing s (composite Simpson).
double compute_A2(const ArrayXd& f, const ArrayXd& s);

// A^2 of the analytic f_shape (Gauss-Legendre, far below grid error).
double shape_A2(const FShape& shape);

// Throws ParameterError naming the first violated inequality.
void check_seed(const SeedParams& params);

// Non-fatal remarks, e.g. constant phi with eps > 0.
std::vector<std::string> seed_warnings(const SeedParams& params);

MetricProfile construct_initial_metric(const SeedParams& params, const SpatialGrid& grid);

ClosenessReport validate_closeness(const MetricProfile& profile, double delta);

}  // namespace wbrf
