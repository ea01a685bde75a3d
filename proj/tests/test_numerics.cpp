#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ionsim/numerics.hpp"

using namespace ionsim::numerics;

TEST_CASE("adaptive Simpson on smooth integrands") {
  CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI) ==
        doctest::Approx(2.0).epsilon(1e-9));
  CHECK(adaptive_simpson([](double x) { return std::exp(-x * x); }, -6.0, 6.0) ==
        doctest::Approx(std::sqrt(M_PI)).epsilon(1e-9));
}

TEST_CASE("log-panel quadrature handles wide dynamic range") {
  // int_1e-3^1e6 dx/x^2 = 1000 - 1e-6
  const double v = integrate_log_panels([](double x) { return 1.0 / (x * x); }, 1e-3, 1e6);
  CHECK(v == doctest::Approx(1000.0 - 1e-6).epsilon(1e-6));
  CHECK_THROWS(integrate_log_panels([](double) { return 1.0; }, 0.0, 1.0));
}

TEST_CASE("Brent minimization") {
  const auto m = brent_minimize([](double x) { return (x - 0.3) * (x - 0.3) + 2.0; }, -4.0, 5.0);
  CHECK(m.x == doctest::Approx(0.3).epsilon(1e-7));
  CHECK(m.fx == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("bisection locates a root") {
  const double r = bisect([](double x) { return std::cos(x) - x; }, 0.0, 1.5, 1e-12);
  CHECK(r == doctest::Approx(0.7390851332151607).epsilon(1e-10));
}

TEST_CASE("nonlinear least squares recovers exponential parameters") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> noise(0.0, 1e-3);
  std::vector<double> xs, ys;
  for (int i = 0; i <= 60; ++i) {
    const double x = 0.1 * i;
    xs.push_back(x);
    ys.push_back(1.7 * std::exp(-x / 2.3) + noise(gen));
  }
  const auto model = [](const std::vector<double>& p, double x) {
    return p[0] * std::exp(-x / p[1]);
  };
  const auto fit = fit_least_squares(model, xs, ys, {1.0, 1.0}, {0.1, 0.1}, {10.0, 10.0});
  CHECK(fit.converged);
  CHECK(fit.params[0] == doctest::Approx(1.7).epsilon(5e-3));
  CHECK(fit.params[1] == doctest::Approx(2.3).epsilon(5e-3));
}

TEST_CASE("bounds clamp the fitted parameters") {
  const auto model = [](const std::vector<double>& p, double x) { return p[0] * x; };
  const auto fit = fit_least_squares(model, {1.0, 2.0}, {5.0, 10.0}, {1.5}, {0.5}, {2.0});
  CHECK(fit.params[0] == doctest::Approx(2.0)); // true slope 5 is outside the box
}

TEST_CASE("linear regression slope and stderr") {
  std::vector<double> xs, ys;
  for (int i = 0; i < 20; ++i) {
    xs.push_back(i);
    ys.push_back(3.0 * i + 1.0);
  }
  const auto f = linear_regression(xs, ys);
  CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f.slope_stderr == doctest::Approx(0.0).epsilon(1e-9));
}
