#include "helpers.hpp"
#include "wbrf/errors.hpp"
#include "wbrf/initial_data.hpp"

#include <doctest.h>

#include <cmath>

using namespace wbrf;

namespace {

SeedParams example(double eps) {
  SeedParams p;
  p.alpha = 1.0;
  p.delta = 0.5;
  p.epsilon = eps;
  return p;
}

}  // namespace

TEST_SUITE("initial_data") {
  TEST_CASE("A^2 of sin on [0, pi] is 4") {
    const Index n = 201;
    const ArrayXd s = ArrayXd::LinSpaced(n, 0.0, M_PI);
    // Oracle: much finer sampling of the same integrand.
    const ArrayXd sf = ArrayXd::LinSpaced(20001, 0.0, M_PI);
    const double fine = compute_A2(sf.sin(), sf);
    CHECK(compute_A2(s.sin(), s) == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(fine == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(compute_A2(ArrayXd::Zero(n), s) == 0.0);
    CHECK_THROWS(compute_A2(ArrayXd::Constant(n, -1.0), s));
    CHECK(shape_A2(FShape{}) == doctest::Approx(4.0).epsilon(1e-15));
  }

  TEST_CASE("the worked example: g^2 = 1 + 1.9 (1 - cos s)") {
    const auto params = example(0.05);
    SpatialGrid grid(257);
    const auto p = construct_initial_metric(params, grid);
    const double tol = grid.tolerance();
    const ArrayXd s = arclength(p) + M_PI / 2;
    const ArrayXd g2 = 1.0 + 1.9 * (1.0 - s.cos());
    CHECK((p.g.square() - g2).abs().maxCoeff() < 1e-12);
    CHECK(p.g(0) * p.g(0) == doctest::Approx(1.0));
    CHECK(p.g(256) * p.g(256) == doctest::Approx(4.8).epsilon(1e-13));
    const auto d = compute_diagnostics(p, params.delta);
    CHECK(d.threshold == doctest::Approx(1.8).epsilon(1e-12));
    for (bool b : d.flags) CHECK(b);
    CHECK(std::abs(s(256) - s(0) - M_PI) < tol);
    CHECK(seed_warnings(params).size() == 1);
  }

  TEST_CASE("epsilon = 0 gives exactly Kahler data") {
    const auto p = construct_initial_metric(example(0.0), SpatialGrid(257));
    const auto d = compute_diagnostics(p, 0.5);
    CHECK(d.F_max_abs < p.grid.tolerance());
    const auto r = validate_closeness(p, 0.5);
    CHECK(r.all());
    CHECK(std::abs(r.margin[kFlagB]) < p.grid.tolerance());
    CHECK(seed_warnings(example(0.0)).empty());
  }

  TEST_CASE("epsilon = 0.05 closeness margin (b) equals 1 - (1 - eps)^2") {
    const auto p = construct_initial_metric(example(0.05), SpatialGrid(257));
    const auto r = validate_closeness(p, 0.5);
    CHECK(r.all());
    // The pole limit of psi is (g g_ss / f_s)^2 - 1 = phi^2 - 1 as well.
    CHECK(r.margin[kFlagB] == doctest::Approx(1.0 - 0.95 * 0.95).epsilon(1e-5));
    CHECK(r.margin[kFlagD] == doctest::Approx(1.8 - 0.25).epsilon(1e-12));
  }

  TEST_CASE("constraint violations name the inequality") {
    SeedParams p = example(0.0);
    p.alpha = 1.2;
    p.delta = 1.0;
    try {
      construct_initial_metric(p, SpatialGrid(65));
      FAIL("expected rejection");
    } catch (const ParameterError& e) {
      CHECK(std::string(e.what()).find("alpha^2 + delta^2 <= A^2/2") != std::string::npos);
    }
    SeedParams q = example(0.3);
    CHECK_THROWS_WITH_AS(check_seed(q), doctest::Contains("epsilon <= alpha^2/A^2"), ParameterError);
    SeedParams r = example(0.1);
    r.alpha = 1.3;
    CHECK_THROWS_WITH_AS(check_seed(r), doctest::Contains("epsilon <= delta^2/A^2"), ParameterError);
  }

  TEST_CASE("threshold lower bound 2 delta^2 - eps A^2 over a parameter sweep") {
    SpatialGrid grid(129);
    for (double alpha : {0.6, 0.9, 1.1})
      for (double delta : {0.5, 0.8})
        for (double eps : {0.0, 0.02, 0.06}) {
          SeedParams p = example(eps);
          p.alpha = alpha;
          p.delta = delta;
          try {
            check_seed(p);
          } catch (const ParameterError&) {
            continue;
          }
          const auto prof = construct_initial_metric(p, grid);
          const auto d = compute_diagnostics(prof, delta);
          CHECK(d.threshold >= 2 * delta * delta - eps * 4.0 - grid.tolerance());
          for (bool b : d.flags) CHECK(b);
        }
  }

  TEST_CASE("plateau shape and bump phi") {
    SeedParams p;
    p.f_shape = {FShapeKind::Plateau, 4.0, 1.2};
    p.alpha = 0.9;
    p.delta = 0.8;
    p.epsilon = 0.04;
    p.phi = {PhiKind::Bump, 0.0, 1.0};
    const double A2 = shape_A2(p.f_shape);
    // Plateau height cap/2 on a middle band of length L - 2 cap, rise integrals from the two caps.
    CHECK(A2 > 2.0 * 0.6 * (4.0 - 2.4));
    CHECK(A2 < 2.0 * 0.6 * 4.0);
    SpatialGrid grid(257);
    const auto prof = construct_initial_metric(p, grid);
    const auto der = metric_derivatives(prof);
    CHECK(der.f_s.abs().maxCoeff() <= 1.0 + grid.tolerance());
    CHECK(prof.f.maxCoeff() == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(compute_A2(prof.f, arclength(prof)) == doctest::Approx(A2).epsilon(1e-6));
    CHECK(seed_warnings(p).empty());
    CHECK(phi_value(p, 0.0) == doctest::Approx(0.96));
    CHECK(phi_value(p, 1.5) == 1.0);
  }

  TEST_CASE("a hand-built profile with g_s < 0 fails only flag (e)") {
    auto p = construct_initial_metric(example(0.0), SpatialGrid(257));
    // Dent g slightly in the middle: g decreases on part of the interval.
    const ArrayXd x = p.grid.x();
    p.g = p.g * (1.0 - 0.03 * (-(x - 0.2).square() / 0.001).exp());
    const auto r = validate_closeness(p, 0.5);
    CHECK_FALSE(r.pass[kFlagE]);
    CHECK(r.margin[kFlagE] < 0.0);
    CHECK(r.pass[kFlagA]);
    CHECK(r.pass[kFlagD]);
  }
}
