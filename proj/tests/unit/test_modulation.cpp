#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "crnalloc/modulation.hpp"
#include "doctest.h"

using namespace crnalloc;

TEST_CASE("exact BER") {
  CHECK(ber_exact(4.0, 0.0) == doctest::Approx(0.5));
  CHECK(ber_exact(4.0, 1e6) < 1e-300);
  CHECK_THROWS_AS(ber_exact(1.5, 1.0), DomainError);

  boost::math::quadrature::gauss_kronrod<double, 61> gk;
  const double x = std::sqrt(3.0 * 10.0 / 3.0);
  const double q = gk.integrate([](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); }, x,
                                std::numeric_limits<double>::infinity(), 15, 1e-15);
  CHECK(std::abs(ber_exact(4.0, 10.0) - q) <= 1e-9);

  for (double m : {2.0, 4.0, 16.0}) {
    for (double g : {0.0, 0.01, 0.1}) {
      const double v = ber_exact(m, g);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("BER bound") {
  CHECK(ber_bound(1.0, 5.0) == 0.0);
  CHECK(ber_bound(4.0, 0.0) == doctest::Approx(0.3));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> log_m(2.0, 10.0);
  std::uniform_real_distribution<double> db(0.0, 40.0);
  for (int i = 0; i < 100; ++i) {
    const double m = std::exp2(log_m(rng));
    const double g = std::pow(10.0, db(rng) / 10.0);
    CHECK(ber_bound(m, g) >= ber_exact(m, g));
  }
  for (double m : {4.0, 16.0, 64.0, 256.0, 1024.0}) {
    for (int i = 0; i <= 80; ++i) {
      const double g = std::pow(10.0, i * 0.05);
      CHECK(ber_bound(m, g) >= ber_exact(m, g));
    }
  }
}

TEST_CASE("zeta and constellation sizing") {
  CHECK(zeta_for_target(1e-2) == doctest::Approx(0.44102).epsilon(1e-5));
  CHECK(zeta_for_target(1e-3) == doctest::Approx(0.26298).epsilon(1e-5));
  CHECK_THROWS_AS(zeta_for_target(0.3), DomainError);
  CHECK_THROWS_AS(zeta_for_target(0.0), DomainError);

  double prev = 0.0;
  for (int i = 1; i < 300; ++i) {
    const double z = zeta_for_target(i * 1e-3);
    CHECK(z > prev);
    prev = z;
  }

  CHECK(max_constellation(zeta_for_target(1e-2), 10.0, 1.0, 1.0) == doctest::Approx(5.4102).epsilon(1e-5));
  CHECK(max_constellation(zeta_for_target(1e-3), 10.0, 1.0, 1.0) == doctest::Approx(3.6298).epsilon(1e-5));
  CHECK(max_constellation(0.4, 10.0, 0.0, 1.0) == 1.0);
  CHECK_THROWS_AS(max_constellation(0.4, 10.0, 1.0, 0.0), DomainError);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double xi : {1e-2, 1e-3, 1e-5}) {
    const double zeta = zeta_for_target(xi);
    for (int i = 0; i < 50; ++i) {
      const double gamma = 100.0 * u(rng);
      const double p = u(rng);
      const double pref = 0.1 + u(rng);
      const double m = max_constellation(zeta, gamma, p, pref);
      if (m > 1.0) CHECK(std::abs(ber_bound(m, gamma * p / pref) - xi) <= 1e-9);
    }
  }
}

TEST_CASE("rate discretization") {
  CHECK(discretize_rate(1.0) == 0);
  CHECK(discretize_rate(3.99) == 0);
  CHECK(discretize_rate(5.41) == 2);
  CHECK(discretize_rate(16.0) == 4);
  CHECK(discretize_rate(1024.0) == 10);
  CHECK(discretize_rate(1e9) == 10);
  for (int i = 0; i < 2000; ++i) {
    const double m = 1.0 + i * 0.7;
    CHECK(discretize_rate(m) <= std::log2(m));
  }
}

TEST_CASE("cutoff threshold") {
  const double zeta = 0.44102;
  CHECK(cutoff_threshold(zeta / std::numbers::ln2, 0.0, 1.0, zeta) == doctest::Approx(1.0));
  const double a = cutoff_threshold(0.3, 0.2, 1.5, zeta);
  CHECK(cutoff_threshold(0.6, 0.4, 1.5, zeta) == doctest::Approx(2.0 * a));
  CHECK_THROWS_AS(cutoff_threshold(0.0, 0.0, 1.0, zeta), DegenerateError);
}
