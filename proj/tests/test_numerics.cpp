#include "wbrf/numerics.hpp"

#include <doctest.h>

#include <cmath>

using namespace wbrf;

TEST_SUITE("numerics") {
  TEST_CASE("centred derivatives are fourth order on an open window") {
    double prev = 0.0;
    for (Index n : {65, 129, 257}) {
      const ArrayXd x = num::uniform_nodes(n);
      const double h = 2.0 / (n - 1);
      const ArrayXd v = (1.3 * x).sin();
      const ArrayXd d1 = num::dx(v, h, EndKind::Open, EndKind::Open, Parity::Even);
      const ArrayXd d2 = num::dxx(v, h, EndKind::Open, EndKind::Open, Parity::Even);
      const double e1 = (d1 - 1.3 * (1.3 * x).cos()).abs().maxCoeff();
      const double e2 = (d2 + 1.69 * v).abs().maxCoeff();
      CHECK(e1 < 1e-5);
      CHECK(e2 < 1e-3);
      if (prev > 0.0) CHECK(std::log2(prev / e1) > 3.5);
      prev = e1;
    }
  }

  TEST_CASE("parity ghosts reproduce odd and even functions") {
    const Index n = 41;
    const ArrayXd x = num::uniform_nodes(n);
    const double h = 2.0 / (n - 1);
    // sin(pi (x+1)) is odd about both ends; cos(pi (x+1)) is even.
    const ArrayXd odd = (M_PI * (x + 1.0)).sin();
    const ArrayXd even = (M_PI * (x + 1.0)).cos();
    const auto eo = num::extend(odd, EndKind::Pole, EndKind::Pole, Parity::Odd);
    const auto ee = num::extend(even, EndKind::Pole, EndKind::Pole, Parity::Even);
    for (Index k = 1; k <= num::kGhost; ++k) {
      CHECK(eo(num::kGhost - k) == doctest::Approx(std::sin(M_PI * (-k * h))).epsilon(1e-12));
      CHECK(ee(num::kGhost - k) == doctest::Approx(std::cos(M_PI * (-k * h))).epsilon(1e-12));
    }
  }

  TEST_CASE("open-end extrapolation is exact for quintics") {
    const Index n = 40;
    const ArrayXd x = num::uniform_nodes(n);
    const double h = 2.0 / (n - 1);
    auto p = [](double z) { return 1.0 + z - 2.0 * z * z + 0.5 * std::pow(z, 5); };
    ArrayXd v(n);
    for (Index i = 0; i < n; ++i) v(i) = p(x(i));
    const auto e = num::extend(v, EndKind::Open, EndKind::Open, Parity::Even);
    for (Index k = 1; k <= num::kGhost; ++k) {
      CHECK(e(num::kGhost - k) == doctest::Approx(p(-1.0 - k * h)).epsilon(1e-11));
      CHECK(e(num::kGhost + n - 1 + k) == doctest::Approx(p(1.0 + k * h)).epsilon(1e-11));
    }
  }

  TEST_CASE("cumulative integral of cos is sin") {
    const Index n = 201;
    const ArrayXd x = num::uniform_nodes(n);
    const double h = 2.0 / (n - 1);
    const ArrayXd c = num::cumulative(x.cos(), h, EndKind::Open, EndKind::Open, Parity::Even);
    const ArrayXd exact = x.sin() - std::sin(-1.0);
    CHECK((c - exact).abs().maxCoeff() < 1e-9);
  }

  TEST_CASE("nonuniform Simpson is exact for quadratics, odd and even counts") {
    for (Index n : {7, 8}) {
      ArrayXd x(n), y(n);
      for (Index i = 0; i < n; ++i) x(i) = i + 0.3 * std::sin(static_cast<double>(i));
      y = 2.0 - x + 3.0 * x.square();
      const double a = x(0), b = x(n - 1);
      const double exact = (2.0 * b - b * b / 2 + b * b * b) - (2.0 * a - a * a / 2 + a * a * a);
      CHECK(num::simpson(y, x) == doctest::Approx(exact).epsilon(1e-13));
    }
  }

  TEST_CASE("Gauss-Legendre integrates degree 2n-1 exactly") {
    const auto r = num::gauss_legendre(8);
    CHECK(r.weights.sum() == doctest::Approx(2.0).epsilon(1e-15));
    const double i14 = (r.weights * r.nodes.pow(14)).sum();
    CHECK(i14 == doctest::Approx(2.0 / 15.0).epsilon(1e-14));
  }

  TEST_CASE("Lagrange interpolation hits nodes exactly and reproduces quintics") {
    const double xs[6] = {-1.0, -0.4, 0.1, 0.5, 1.2, 2.0};
    double ys[6];
    auto p = [](double z) { return z * z * z * z * z - z + 0.25; };
    for (int i = 0; i < 6; ++i) ys[i] = p(xs[i]);
    CHECK(num::lagrange(xs, ys, 6, xs[2]) == ys[2]);
    CHECK(num::lagrange(xs, ys, 6, 0.77) == doctest::Approx(p(0.77)).epsilon(1e-13));
  }
}
