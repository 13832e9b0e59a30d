#include "wbrf/errors.hpp"
#include "wbrf/flow.hpp"
#include "wbrf/initial_data.hpp"

#include <doctest.h>

#include <cmath>

using namespace wbrf;

namespace {

MetricProfile example(double eps, Index n) {
  SeedParams p;
  p.epsilon = eps;
  return construct_initial_metric(p, SpatialGrid(n));
}

std::vector<DiagnosticRecord> synthetic(double slope, int count) {
  std::vector<DiagnosticRecord> out;
  const double T = -1.0 / slope;
  for (int k = 0; k < count; ++k) {
    DiagnosticRecord r;
    r.t = T * (1.0 - std::exp2(-0.25 * k));
    r.mu = std::sqrt(1.0 + slope * r.t);
    r.sup_curv = 1.0 / (2.0 * (T - r.t));
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_SUITE("flow") {
  TEST_CASE("zero step is the identity") {
    const auto p = example(0.05, 65);
    const auto q = step(p, 0.0);
    CHECK((q.f == p.f).all());
    CHECK((q.g == p.g).all());
    CHECK((q.jac == p.jac).all());
    CHECK(q.t == p.t);
  }

  TEST_CASE("pole rate of g^2 at s_- from a small step") {
    for (auto [eps, rate] : {std::pair{0.0, -4.0}, std::pair{0.05, -4.2}}) {
      const auto p = example(eps, 257);
      const double dt = 1e-6;
      const auto q = step(p, dt);
      const double fd = (q.g(0) * q.g(0) - p.g(0) * p.g(0)) / dt;
      CHECK(fd == doctest::Approx(rate).epsilon(1e-4));
      CHECK(compute_diagnostics(p, 0.5).rate_g2_minus == doctest::Approx(rate).epsilon(1e-6));
    }
  }

  TEST_CASE("RK4 is fourth order on a scalar ODE") {
    auto rhs = [](const Eigen::ArrayXXd& y) { return (-y).eval(); };
    double prev = 0.0;
    for (int m : {10, 20, 40}) {
      Eigen::ArrayXXd y = Eigen::ArrayXXd::Ones(1, 1);
      for (int k = 0; k < m; ++k) y = rk4(y, 1.0 / m, rhs);
      const double e = std::abs(y(0, 0) - std::exp(-1.0));
      if (prev > 0.0) CHECK(std::log2(prev / e) > 3.8);
      prev = e;
    }
  }

  TEST_CASE("pole slopes of f stay +-1 during a short run") {
    auto p = example(0.05, 129);
    const auto d0 = metric_derivatives(p);
    StepControl c;
    for (int k = 0; k < 200; ++k) p = step(p, stable_dt(p, c));
    const auto der = metric_derivatives(p);
    MESSAGE("f_s(s_-) initial " << d0.f_s(0) - 1.0 << " final " << der.f_s(0) - 1.0);
    CHECK(std::abs(d0.f_s(0) - 1.0) < p.grid.tolerance());
    CHECK(der.f_s(0) == doctest::Approx(d0.f_s(0)).epsilon(1e-11));
    CHECK(der.f_s(128) == doctest::Approx(d0.f_s(128)).epsilon(1e-11));
    CHECK(std::abs(der.g_s(0)) < 1e-14);
  }

  TEST_CASE("graded remesh preserves the geometry") {
    // f = sin s, g^2 = 1 + 2 (1 - cos s) on a deliberately non-uniform map
    // s(x) = pi/2 (x + 1) + a sin(pi (x + 1)); the map is odd about both poles.
    const Index n = 257;
    const double a = 0.3;
    SpatialGrid grid(n);
    const ArrayXd y = M_PI * (grid.x() + 1.0);
    const ArrayXd s = 0.5 * y + a * y.sin();
    ArrayXd f = s.sin();
    f(0) = 0.0;
    f(n - 1) = 0.0;
    auto g_of = [](const ArrayXd& z) { return (1.0 + 2.0 * (1.0 - z.cos())).sqrt().eval(); };
    MetricProfile p(grid, f, g_of(s), M_PI * (0.5 + a * y.cos()));
    StepControl c;
    c.remesh_ratio = 1.01;
    auto q = p;
    REQUIRE(maybe_remesh(q, c));
    CHECK(mesh_distortion(q.jac, q.g) < 1.0 + 1e-12);
    const ArrayXd s_new = arclength(q) - arclength(q)(0);
    CHECK(s_new(n - 1) == doctest::Approx(M_PI).epsilon(1e-8));
    CHECK(q.f(0) == 0.0);
    CHECK(q.g(0) == p.g(0));
    CHECK(q.g(n - 1) == p.g(n - 1));
    CHECK((q.f - s_new.sin()).abs().maxCoeff() < 1e-7);
    CHECK((q.g - g_of(s_new)).abs().maxCoeff() < 1e-7);
    c.remesh = RemeshMode::Uniform;
    auto u = p;
    REQUIRE(maybe_remesh(u, c));
    CHECK((u.jac - M_PI / 2).abs().maxCoeff() < 1e-8);
  }

  TEST_CASE("estimate_T on exact linear data") {
    const auto a = estimate_T(synthetic(-4.0, 60));
    CHECK(a.T == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(a.slope == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(a.slope_ok);
    const auto b = estimate_T(synthetic(-9.0, 60));
    CHECK(b.T == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    CHECK(b.slope_ok);
    CHECK(b.fit_residual < 1e-10);
    CHECK_THROWS_AS(estimate_T(synthetic(-4.0, 5)), EstimationError);
    auto bad = synthetic(-4.0, 60);
    bad.back().mu = 2.0;
    CHECK_THROWS_AS(estimate_T(bad), EstimationError);
  }

  TEST_CASE("type1 ratio of a shrinking-sphere toy series is 1/2") {
    const auto series = synthetic(-4.0, 60);
    const auto s = type1_ratios(series, 0.25);
    REQUIRE(!s.ratios.empty());
    CHECK(s.ratio_min == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(s.ratio_max == doctest::Approx(0.5).epsilon(1e-9));
    for (auto [t, q] : s.mu2_rate) CHECK(q == doctest::Approx(4.0).epsilon(1e-9));
  }

  TEST_CASE("run refuses data outside the closeness set unless overridden") {
    auto p = example(0.0, 65);
    p.g(32) *= 0.5;
    RunOptions o;
    CHECK_THROWS_AS(FlowRunner(p, o), ParameterError);
  }

  TEST_CASE("short Kahler run stays Kahler and crushes at s_-") {
    RunOptions o;
    o.stop.mu2_stop_fraction = 0.5;
    o.output.record_stride = 5;
    const auto tr = run(example(0.0, 129), o);
    CHECK(tr.reason == StopReason::Mu2Stop);
    REQUIRE(tr.series.size() > 10);
    for (const auto& r : tr.series) {
      CHECK(r.mu_argmin == 0);
      CHECK(r.F_max_abs < 1e-4);
    }
    // mu^2 = 1 - 4t for Kahler data.
    const auto& last = tr.series.back();
    CHECK(last.mu * last.mu == doctest::Approx(1.0 - 4.0 * last.t).epsilon(1e-4));
  }

  TEST_CASE("paused and resumed runs agree bitwise") {
    RunOptions o;
    o.stop.mu2_stop_fraction = 0.8;
    o.output.record_stride = 3;
    const auto p = example(0.05, 65);
    const auto full = run(p, o);

    RunOptions first = o;
    first.stop.max_steps = 17;
    FlowRunner a(p, first);
    CHECK(a.advance() == StopReason::MaxSteps);
    FlowRunner b(a.state(), o);
    b.advance();
    const auto resumed = b.finish();
    REQUIRE(resumed.series.size() == full.series.size());
    for (std::size_t i = 0; i < full.series.size(); ++i) {
      CHECK(resumed.series[i].t == full.series[i].t);
      CHECK(resumed.series[i].mu == full.series[i].mu);
    }
  }
}
