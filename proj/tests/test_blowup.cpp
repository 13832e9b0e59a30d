#include "helpers.hpp"
#include "wbrf/blowup.hpp"
#include "wbrf/errors.hpp"
#include "wbrf/initial_data.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace wbrf;

namespace {

SolitonProfile unit_soliton() { return make_soliton(-1.0, 1.0, 33); }

// rho grid on [-6, 6] with g^2 = sigma phi(rho + chi), f^2 = sigma phi_r(rho + chi).
struct Synthetic {
  ArrayXd rho, g2, f2;
};
Synthetic synthetic(double chi, double sigma, Index n = 601) {
  Synthetic s;
  s.rho = ArrayXd::LinSpaced(n, -6.0, 6.0);
  s.g2.resize(n);
  s.f2.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double w = sol::solve_w(s.rho(i) + chi);
    s.g2(i) = sigma * (1.0 + w);
    s.f2(i) = sigma * sol::phi_r_implicit(w);
  }
  return s;
}

}  // namespace

TEST_SUITE("blowup") {
  TEST_CASE("parabolic rescale by 4 is exact") {
    const auto p = construct_initial_metric(SeedParams{}, SpatialGrid(129));
    const auto q = parabolic_rescale(p, 4.0, 0.0);
    CHECK(((arclength(q) - 2.0 * arclength(p)) == 0.0).all());
    CHECK(((q.g.square() - 4.0 * p.g.square()) == 0.0).all());
    const auto a = compute_curvatures(p);
    const auto b = compute_curvatures(q);
    CHECK(((b.k01 - a.k01 / 4.0) == 0.0).all());
    CHECK(((b.k02 - a.k02 / 4.0) == 0.0).all());
    CHECK(((b.k12 - a.k12 / 4.0) == 0.0).all());
    CHECK(((b.k23 - a.k23 / 4.0) == 0.0).all());
    CHECK(((b.R - a.R / 4.0) == 0.0).all());
    CHECK((psi_field(q, metric_derivatives(q)) == psi_field(p, metric_derivatives(p))).all());
  }

  TEST_CASE("parabolic rescale identity and time convention") {
    auto p = construct_initial_metric(SeedParams{}, SpatialGrid(65));
    p.t = 0.1;
    const auto q = parabolic_rescale(p, 1.0);
    CHECK((q.f == p.f).all());
    CHECK((q.g == p.g).all());
    CHECK(q.t == p.t);
    const auto r = parabolic_rescale(p, 3.0, 0.04);
    CHECK(r.t == doctest::Approx(0.18).epsilon(1e-14));
    CHECK_THROWS_AS(parabolic_rescale(p, 0.0), std::invalid_argument);
  }

  TEST_CASE("rescaling by 1/mu^2 gives unit mu and keeps g g_s / f") {
    const auto p = construct_initial_metric(SeedParams{FShape{}, 1.3, 0.5, 0.0, {}},
                                            SpatialGrid(129));
    const double mu = p.g(0);
    const auto q = parabolic_rescale(p, 1.0 / (mu * mu));
    CHECK(q.g(0) == doctest::Approx(1.0).epsilon(1e-15));
    const auto dp = metric_derivatives(p);
    const auto dq = metric_derivatives(q);
    for (Index i = 1; i < 128; ++i) {
      const double a = p.g(i) * dp.g_s(i) / p.f(i), b = q.g(i) * dq.g_s(i) / q.f(i);
      CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
    }
  }

  TEST_CASE("Calabi coordinate of f = sin s is 2 ln tan(s/2)") {
    testing::SineFamily fam;
    double prev = 0.0;
    for (Index n : {65, 129, 257}) {
      const auto p = fam.profile(n);
      const ArrayXd rho = calabi_coordinate(p);
      CHECK(std::isinf(rho(0)));
      CHECK(rho(0) < 0.0);
      CHECK(std::isinf(rho(n - 1)));
      CHECK(rho(n - 1) > 0.0);
      double err = 0.0;
      for (Index i = 1; i < n - 1; ++i) {
        const double s = 0.5 * M_PI * (p.grid.x()(i) + 1.0);
        err = std::max(err, std::abs(rho(i) - 2.0 * std::log(std::tan(0.5 * s))));
      }
      MESSAGE("n=" << n << " rho error " << err);
      CHECK(err < 1e-5);
      if (prev > 0.0) CHECK(prev / err > 8.0);
      prev = err;
    }
  }

  TEST_CASE("Calabi coordinate recovers the soliton's r up to a shift") {
    const auto win = soliton_pole_window(6.0, 513);
    const ArrayXd rho = calabi_coordinate(win);
    const Index n = 513;
    const double w_ref = win.g(256) * win.g(256) - 1.0;
    const double r_ref = sol::implicit_r(1.0 + w_ref, 0.0);
    double err = 0.0;
    for (Index i = 1; i < n; ++i) {
      const double w = win.g(i) * win.g(i) - 1.0;
      err = std::max(err, std::abs((rho(i) - rho(256)) - (sol::implicit_r(1.0 + w, 0.0) - r_ref)));
    }
    CHECK(err < 1e-6);
  }

  TEST_CASE("anchored soliton frame aligns with zero distance") {
    const auto fr = make_frame(soliton_pole_window(10.0, 2049), 1.0, 0.0);
    const auto a = align_distance(fr, unit_soliton());
    MESSAGE("chi* " << a.chi_star << " scale* " << a.scale_star << " dist " << a.dist);
    // g^2 = 2 sits at r = +0.365077 in the soliton's own coordinate.
    CHECK(a.chi_star == doctest::Approx(-sol::implicit_r(2.0, 0.0)).epsilon(1e-6));
    CHECK(a.scale_star == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(a.dist < 1e-6);
    CHECK(a.f2_dist < 1e-5);
  }

  TEST_CASE("self-alignment recovers shift and scale") {
    const auto s = synthetic(1.3, 2.0);
    const auto a = align_arrays(s.rho, s.g2, s.f2, unit_soliton());
    CHECK(std::abs(a.chi_star + 1.3) <= 1e-6);
    CHECK(std::abs(a.scale_star - 0.5) <= 1e-6);
    CHECK(a.dist <= 1e-8);
    CHECK(a.f2_dist <= 1e-6);
  }

  TEST_CASE("one percent noise gives distance near 0.01") {
    auto s = synthetic(-0.4, 1.0);
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    for (Index i = 0; i < s.g2.size(); ++i) s.g2(i) *= 1.0 + u(rng);
    const auto a = align_arrays(s.rho, s.g2, s.f2, unit_soliton());
    MESSAGE("noisy dist " << a.dist);
    CHECK(a.dist >= 0.005);
    CHECK(a.dist <= 0.02);
  }

  TEST_CASE("distance is invariant under re-gauging the frame") {
    auto s = synthetic(0.2, 1.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.003, 0.003);
    for (Index i = 0; i < s.g2.size(); ++i) s.g2(i) *= 1.0 + u(rng);
    const auto a = align_arrays(s.rho, s.g2, s.f2, unit_soliton(), 4.0);
    const ArrayXd rho2 = s.rho + 0.7;
    const auto b = align_arrays(rho2, 3.0 * s.g2, 3.0 * s.f2, unit_soliton(), 4.0);
    // Shifting rho changes the sampled window, so only approximate agreement.
    CHECK(b.dist == doctest::Approx(a.dist).epsilon(0.3));
    const auto c = align_arrays(s.rho, 3.0 * s.g2, 3.0 * s.f2, unit_soliton(), 4.0);
    CHECK(c.dist == doctest::Approx(a.dist).epsilon(1e-9));
    CHECK(c.scale_star == doctest::Approx(a.scale_star / 3.0).epsilon(1e-9));
  }

  TEST_CASE("insufficient window is an alignment error") {
    const auto s = synthetic(0.0, 1.0);
    const ArrayXd r = s.rho.head(200);
    CHECK_THROWS_AS(align_arrays(r, s.g2.head(200), s.f2.head(200), unit_soliton()), AlignmentError);
  }

  TEST_CASE("self-similar input gives identical frames") {
    const auto base = soliton_pole_window(10.0, 1025);
    const double T = 1.0;
    FlowTrajectory tr;
    for (int j = 0; j <= 40; ++j) {
      const double tau = std::exp2(-0.25 * j);
      auto p = parabolic_rescale(base, tau);
      p.t = T - tau;
      tr.snapshots.push_back(p);
    }
    tr.T_est = TEstimate{T, -4.0, 4.0 * T, 0.0, true, 10};
    const auto frames = extract_blowup_sequence(tr, 5);
    REQUIRE(frames.size() == 5);
    for (std::size_t k = 1; k < frames.size(); ++k) {
      CHECK(frames[k].t_center > frames[k - 1].t_center);
      CHECK((frames[k].profile.g - frames[0].profile.g).abs().maxCoeff() < 1e-13);
      CHECK((frames[k].r_window - frames[0].r_window).tail(1024).abs().maxCoeff() < 1e-9);
      CHECK(align_distance(frames[k], unit_soliton()).dist < 1e-6);
    }
  }

  TEST_CASE("too few snapshots is an extraction error") {
    const auto base = soliton_pole_window(10.0, 257);
    FlowTrajectory tr;
    for (double tau : {1.0, 0.5}) {
      auto p = parabolic_rescale(base, tau);
      p.t = 1.0 - tau;
      tr.snapshots.push_back(p);
    }
    tr.T_est = TEstimate{1.0, -4.0, 4.0, 0.0, true, 10};
    CHECK_THROWS_AS(extract_blowup_sequence(tr, 5), ExtractionError);
    tr.T_est.reset();
    CHECK_THROWS_AS(extract_blowup_sequence(tr, 3), ExtractionError);
  }

  TEST_CASE("frames of a Kahler run stay Kahler") {
    RunOptions opt;
    opt.stop.mu_stop_fraction = 0.05;
    const auto tr = run(construct_initial_metric(SeedParams{}, SpatialGrid(129)), opt);
    const auto frames = extract_blowup_sequence(tr, 5);
    for (const auto& fr : frames) {
      const ArrayXd psi = psi_field(fr.profile, metric_derivatives(fr.profile));
      CHECK(psi.abs().maxCoeff() < fr.profile.grid.tolerance());
      CHECK(fr.profile.g(0) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}
