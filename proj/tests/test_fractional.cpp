#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "fracspec/errors.hpp"
#include "fracspec/fractional.hpp"
#include "oracles.hpp"

using namespace fracspec;
using std::numbers::pi;

TEST_CASE("problem order range") {
  CHECK(FractionalOrder::problem(2.0).value() == 2.0);
  CHECK(FractionalOrder::problem(1.25).value() == 1.25);
  CHECK_THROWS_AS(FractionalOrder::problem(1.0), DomainError);
  CHECK_THROWS_WITH_AS(FractionalOrder::problem(2.5), doctest::Contains("order out of (1,2]"), DomainError);
  CHECK(FractionalOrder::probe(0.0).value() == 0.0);
  CHECK_THROWS_AS(FractionalOrder::probe(-0.1), DomainError);
}

TEST_CASE("branch of (i xi)^alpha") {
  CHECK(std::abs(frac_power_i_xi(1.0, 2.0) - Complex(-1.0, 0.0)) < 1e-15);
  CHECK(frac_power_i_xi(0.0, 1.5) == Complex(0.0, 0.0));
  CHECK(std::abs(frac_power_i_xi(-1.0, 1.5) - std::polar(1.0, -0.75 * pi)) < 1e-15);
  CHECK(std::abs(frac_power_i_xi(-1.0, 1.5) - Complex(-0.70711, -0.70711)) < 1e-5);
  CHECK(frac_power_i_xi(3.0, 0.0) == Complex(1.0, 0.0));
  for (const double xi : {-7.5, -0.3, 0.01, 2.0, 40.0})
    for (const double a : {0.25, 1.0, 1.5, 2.0}) {
      CHECK(std::abs(frac_power_i_xi(xi, a)) == doctest::Approx(std::pow(std::abs(xi), a)).epsilon(1e-14));
      CHECK(std::abs(frac_power_i_xi(xi, a) - oracle::i_xi_power(xi, a)) < 1e-12 * std::pow(std::abs(xi), a));
    }
}

TEST_CASE("Liouville derivative on modes and sines") {
  const SpatialGrid g(pi, 64);
  const GridFunction sine = GridFunction::sample(g, [](double x) { return Complex(std::sin(x), 0.0); });
  const GridFunction d2 = liouville_derivative(sine, 2.0);
  CHECK((d2.values() + sine.values()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(liouville_derivative(sine, 0.0).values() == sine.values());
  CHECK_THROWS_AS(liouville_derivative(sine, -1.0), PreconditionError);

  const double xi = -3.0;
  const GridFunction mode = GridFunction::sample(g, [xi](double x) { return std::polar(1.0, xi * x); });
  for (const double s : {0.5, 1.3, 2.0}) {
    const GridFunction d = liouville_derivative(mode, s);
    const Complex factor = oracle::i_xi_power(xi, s);
    CHECK((d.values() - factor * mode.values()).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("Liouville derivative semigroup") {
  const SpatialGrid g(10.0, 128);
  std::mt19937_64 rng(5);
  const GridFunction f = random_band_limited(g, 1, rng);
  for (const double s1 : {0.0, 0.3, 1.0})
    for (const double s2 : {0.2, 0.7, 1.0}) {
      const GridFunction twice = liouville_derivative(liouville_derivative(f, s1), s2);
      const GridFunction once = liouville_derivative(f, s1 + s2);
      CHECK((twice.values() - once.values()).norm() <= 1e-9 * once.values().norm());
    }
}

TEST_CASE("Grunwald-Letnikov weights match the Gamma-function form") {
  const Eigen::ArrayXd w = grunwald_letnikov_weights(1.5, 400);
  for (Index k = 0; k < 400; ++k)
    CHECK(w(k) == doctest::Approx(oracle::gl_weight(1.5, k)).epsilon(1e-10));
}

TEST_CASE("Grunwald-Letnikov oracle reproduces the power rule") {
  const double h = 1.0 / 4096.0;
  const Index n = 4097;
  Eigen::ArrayXd square(n), linear(n);
  for (Index j = 0; j < n; ++j) {
    const double x = static_cast<double>(j) * h;
    square(j) = x * x;
    linear(j) = x;
  }
  CHECK(rl_derivative_oracle_at(square, h, 1.5, n - 1) == doctest::Approx(2.25676).epsilon(1e-3));
  CHECK(oracle::power_rule(2.0, 1.5, 1.0) == doctest::Approx(2.25676).epsilon(1e-5));
  CHECK(rl_derivative_oracle_at(linear, h, 1.5, n - 1) == doctest::Approx(0.56419).epsilon(1e-3));

  // first-order convergence toward Γ(3)/Γ(1.5)
  double previous = 0.0;
  for (const int level : {6, 7, 8, 9}) {
    const double step = std::ldexp(1.0, -level);
    const Index count = (Index(1) << level) + 1;
    Eigen::ArrayXd s(count);
    for (Index j = 0; j < count; ++j) s(j) = std::pow(static_cast<double>(j) * step, 2.0);
    const double err = std::abs(rl_derivative_oracle_at(s, step, 1.5, count - 1) - oracle::power_rule(2.0, 1.5, 1.0));
    if (previous > 0.0) CHECK(previous / err == doctest::Approx(2.0).epsilon(0.1));
    previous = err;
  }

  const Eigen::ArrayXd all = rl_derivative_oracle(square, h, 1.5);
  CHECK(all(n - 1) == doctest::Approx(rl_derivative_oracle_at(square, h, 1.5, n - 1)).epsilon(1e-13));
  CHECK(rl_derivative_oracle(Eigen::ArrayXd::Zero(50), 0.1, 1.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("Grunwald-Letnikov oracle order range") {
  const Eigen::ArrayXd s = Eigen::ArrayXd::Ones(4);
  CHECK_THROWS_AS(rl_derivative_oracle(s, 0.1, 2.0), DomainError);
  CHECK_THROWS_AS(rl_derivative_oracle(s, 0.1, 1.0), DomainError);
  CHECK_THROWS_AS(rl_derivative_oracle_at(s, 0.1, 1.5, 4), ConfigurationError);
}

TEST_CASE("fractional powers of SPD matrices") {
  CHECK(matrix_fractional_power(Eigen::Matrix2d::Identity(), 0.5).isApprox(Eigen::Matrix2d::Identity(), 1e-14));
  const Eigen::Matrix2d d = Eigen::Vector2d(4.0, 9.0).asDiagonal();
  CHECK(matrix_fractional_power(d, 0.5).isApprox(Eigen::Matrix2d(Eigen::Vector2d(2.0, 3.0).asDiagonal()), 1e-14));

  Eigen::Matrix2d a;
  a << 2.0, 1.0, 1.0, 2.0;
  // eigenvalues 1 and 3 on (1,-1)/√2 and (1,1)/√2
  Eigen::Matrix2d expected;
  const double r3 = std::sqrt(3.0);
  expected << (1.0 + r3) / 2.0, (r3 - 1.0) / 2.0, (r3 - 1.0) / 2.0, (1.0 + r3) / 2.0;
  CHECK(matrix_fractional_power(a, 0.5).isApprox(expected, 1e-13));
  CHECK(std::abs(matrix_fractional_power(a, 0.5)(0, 0) - 1.36603) < 1e-5);
  CHECK(matrix_fractional_power(a, 1.0).isApprox(a, 1e-13));
  CHECK(matrix_fractional_power(a, 0.0).isApprox(Eigen::Matrix2d::Identity(), 1e-13));
  for (const double theta : {0.25, 0.5, 0.75})
    CHECK((matrix_fractional_power(a, theta) * matrix_fractional_power(a, 1.0 - theta) - a).norm() < 1e-10);

  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_WITH_AS(matrix_fractional_power(indefinite, 0.5), doctest::Contains("-1"), DomainError);
  Eigen::Matrix2d asymmetric;
  asymmetric << 2.0, 1.0, 0.0, 2.0;
  CHECK_THROWS_AS(matrix_fractional_power(asymmetric, 0.5), DomainError);
}
