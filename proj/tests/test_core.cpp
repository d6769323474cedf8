#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "fracspec/core.hpp"
#include "fracspec/errors.hpp"
#include "oracles.hpp"

using namespace fracspec;
using std::numbers::pi;

TEST_CASE("spatial grid validates size and spacing") {
  CHECK_THROWS_AS(SpatialGrid(1.0, 7), ConfigurationError);
  CHECK_THROWS_AS(SpatialGrid(1.0, 2), ConfigurationError);
  CHECK_THROWS_AS(SpatialGrid(0.0, 8), ConfigurationError);
  CHECK_THROWS_AS(SpatialGrid(-1.0, 8), ConfigurationError);

  const SpatialGrid g(3.0, 12);
  CHECK(g.spacing() * static_cast<double>(g.size()) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(g.point(0) == -3.0);
  const Eigen::ArrayXd x = g.points();
  for (Index j = 1; j < x.size(); ++j) CHECK(x(j) > x(j - 1));
  CHECK(x(x.size() - 1) < 3.0);
}

TEST_CASE("spectral grid has one zero frequency and dual spacing") {
  const SpatialGrid g(2.0, 16);
  const SpectralGrid s(g);
  int zeros = 0;
  for (Index k = 0; k < s.size(); ++k) {
    if (s.frequency(k) == 0.0) ++zeros;
    CHECK(s.frequency(k) == doctest::Approx(pi * static_cast<double>(oracle::signed_index(k, 16)) / 2.0));
    CHECK(s.index_of(s.signed_index(k)) == k);
  }
  CHECK(zeros == 1);
  CHECK(s.signed_index(8) == -8);
}

TEST_CASE("grid functions reject bad shapes and non-finite values") {
  const SpatialGrid g(1.0, 8);
  CHECK_THROWS_AS(GridFunction(g, Eigen::MatrixXcd::Zero(1, 6)), ConfigurationError);
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(1, 8);
  bad(0, 3) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_AS(GridFunction(g, bad), ConfigurationError);
}

TEST_CASE("constant maps to the zero mode") {
  const SpatialGrid g(5.0, 32);
  const SpectralFunction F = forward_transform(GridFunction::sample(g, [](double) { return Complex(1.0, 0.0); }));
  // amplitude normalized by the domain length 2L
  const Eigen::VectorXcd amplitude = F.coefficients().row(0).transpose() / g.length();
  CHECK(std::abs(amplitude(0) - 1.0) < 1e-14);
  CHECK(amplitude.tail(31).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::MatrixXcd unit = Eigen::MatrixXcd::Zero(1, 32);
  unit(0, 0) = g.length();
  const GridFunction back = inverse_transform(SpectralFunction(g, unit));
  CHECK((back.values().array() - 1.0).abs().maxCoeff() < 1e-14);

  const GridFunction zero = inverse_transform(SpectralFunction(g, Eigen::MatrixXcd::Zero(1, 32)));
  CHECK(zero.values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pure grid mode has a single coefficient") {
  const SpatialGrid g(pi, 64);
  const SpectralGrid s(g);
  const Index k = s.index_of(-5);
  const double xi = s.frequency(k);
  const SpectralFunction F = forward_transform(GridFunction::sample(g, [xi](double x) { return std::polar(1.0, xi * x); }));
  for (Index j = 0; j < 64; ++j) {
    const double expected = j == k ? 1.0 : 0.0;
    CHECK(std::abs(F.coefficients()(0, j) / g.length() - expected) < 1e-13);
  }
}

TEST_CASE("forward transform matches the direct DFT sum") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  const SpatialGrid g(3.5, 24);
  Eigen::VectorXcd f(24);
  for (Index j = 0; j < 24; ++j) f(j) = Complex(normal(rng), normal(rng));
  const Eigen::VectorXcd expected = oracle::naive_dft(f, 3.5);
  const SpectralFunction F = forward_transform(GridFunction(g, f.transpose()));
  CHECK((F.coefficients().row(0).transpose() - expected).norm() / expected.norm() < 1e-13);
}

TEST_CASE("round trip and Parseval on random inputs") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (const Index n : {8, 64, 256}) {
    const SpatialGrid g(4.0, n);
    Eigen::MatrixXcd v(2, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < 2; ++i) v(i, j) = Complex(normal(rng), normal(rng));
    const GridFunction f(g, v);
    const SpectralFunction F = forward_transform(f);
    const GridFunction back = inverse_transform(F);
    CHECK((back.values() - v).norm() / v.norm() < 1e-12);

    const double physical = g.spacing() * v.squaredNorm();
    const double spectral = F.coefficients().squaredNorm() / g.length();
    CHECK(std::abs(physical - spectral) / physical < 1e-10);
  }
}

TEST_CASE("lp norms") {
  const SpatialGrid g(10.0, 1024);
  CHECK(lp_norm(GridFunction::zero(g, 2), 2.0) == 0.0);
  CHECK(lp_norm(GridFunction::sample(g, [](double) { return Complex(1.0, 0.0); }), 2.0) ==
        doctest::Approx(std::sqrt(20.0)).epsilon(1e-14));

  const GridFunction gauss = GridFunction::sample(g, [](double x) { return Complex(std::exp(-x * x), 0.0); });
  CHECK(std::abs(lp_norm(gauss, 2.0) - std::pow(pi / 2.0, 0.25)) < 1e-8);

  for (const double p : {1.5, 2.0, 3.0, 7.0}) {
    const Complex c(-2.5, 1.0);
    const double scaled = lp_norm(GridFunction(g, c * gauss.values()), p);
    CHECK(std::abs(scaled - std::abs(c) * lp_norm(gauss, p)) <= 1e-12 * scaled);
  }
  CHECK_THROWS_AS(lp_norm(gauss, 1.0), PreconditionError);
  CHECK_THROWS_AS(LebesgueExponents(2.0, std::numeric_limits<double>::infinity()), PreconditionError);
  CHECK_NOTHROW(LebesgueExponents(1.5, 4.0));
}

TEST_CASE("mixed norms") {
  const SpatialGrid g(1.0, 16);
  const TimeGrid t(1.0, 8);
  CHECK(mixed_norm(SpaceTimeFunction::zero(g, t, 1), 2.0, 3.0) == 0.0);

  const GridFunction one = GridFunction::sample(g, [](double) { return Complex(1.0, 0.0); });
  const SpaceTimeFunction flat = SpaceTimeFunction::separable(t, [](double) { return Complex(1.0, 0.0); }, one);
  CHECK(mixed_norm(flat, 2.0, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  // constant in t on [0, 1]: the outer integral is the identity
  CHECK(mixed_norm(flat, 3.0, 1.5) == doctest::Approx(lp_norm(one, 3.0)).epsilon(1e-14));

  const auto gfun = [](double s) { return Complex(std::cos(3.0 * s), std::sin(s)); };
  const GridFunction h = GridFunction::sample(g, [](double x) { return Complex(std::exp(-x * x), x); });
  const SpaceTimeFunction sep = SpaceTimeFunction::separable(t, gfun, h);
  Eigen::ArrayXd gm(t.samples());
  for (Index m = 0; m < t.samples(); ++m) gm(m) = std::abs(gfun(t.time(m)));
  for (const double p : {2.0, 3.0})
    for (const double p1 : {1.5, 2.0, 4.0}) {
      const double expected = time_lp_norm(gm, t, p1) * lp_norm(h, p);
      CHECK(mixed_norm(sep, p, p1) == doctest::Approx(expected).epsilon(1e-13));
      CHECK(mixed_norm(sep, p, p1, MixedNormOrder::TimeInner) == doctest::Approx(expected).epsilon(1e-13));
    }
}

TEST_CASE("mixed norm order matters for non-separable data") {
  const SpatialGrid g(1.0, 8);
  const TimeGrid t(1.0, 4);
  const SpaceTimeFunction f =
      SpaceTimeFunction::sample(g, t, 1, [](double s, double x) { return Complex(1.0 + s * (x + 1.0), 0.0); });
  CHECK(mixed_norm(f, 4.0, 1.5) != doctest::Approx(mixed_norm(f, 4.0, 1.5, MixedNormOrder::TimeInner)));
}

TEST_CASE("sector membership") {
  const Sector s(pi / 4.0);
  CHECK(s.contains(Complex(1.0, 0.0)));
  CHECK_FALSE(s.contains(Complex(0.0, 1.0)));
  CHECK(s.contains(Complex(0.0, 0.0)));
  CHECK(Sector(0.0).contains(Complex(0.0, 0.0)));
  CHECK(Sector(0.0).contains(Complex(2.0, 0.0)));
  CHECK_FALSE(Sector(0.0).contains(Complex(-2.0, 0.0)));
  CHECK(sector_contains(s, std::complex<float>(1.0f, 0.5f)));
  CHECK_THROWS(Sector(pi));
}

TEST_CASE("random band-limited functions are normalized and band-limited") {
  const SpatialGrid g(8.0, 64);
  std::mt19937_64 rng(3);
  const GridFunction u = random_band_limited(g, 2, rng);
  CHECK(lp_norm(u, 2.0) == doctest::Approx(1.0).epsilon(1e-13));
  const SpectralFunction F = forward_transform(u);
  const SpectralGrid s(g);
  for (Index k = 0; k < 64; ++k)
    if (4 * std::abs(s.signed_index(k)) >= 64) CHECK(F.coefficients().col(k).norm() < 1e-12);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](Index i) { hits[static_cast<std::size_t>(i)] += 1; });
  for (const int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 2, [](Index i) {
                    if (i == 7) throw SolveError("seven");
                  }),
                  SolveError);
}
