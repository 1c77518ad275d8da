#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "levychan/quadrature.hpp"

using namespace levychan;
using Catch::Matchers::WithinAbs;

TEST_CASE("unit integral") {
  const auto r = integrate_interval([](double) { return 1.0; }, 0.0, 1.0, 1e-12);
  REQUIRE_THAT(r.value, WithinAbs(1.0, 1e-12));
  REQUIRE(r.converged);
  REQUIRE(r.error_estimate >= 0.0);
}

TEST_CASE("Frullani integral equals ln 2") {
  const auto r = integrate_semi_infinite(
      [](double z) { return (std::exp(-0.5 * z) - std::exp(-z)) / z; }, 0.0,
      1e-12);
  REQUIRE(r.converged);
  REQUIRE_THAT(r.value, WithinAbs(std::log(2.0), 1e-11));
}

TEST_CASE("Gamma-function normalization at shape 1/2") {
  // endpoint singularity z^{-1/2}: the open rule never touches z = 0
  auto f = [](double z) {
    return std::pow(z, -0.5) * std::exp(-z) / std::tgamma(0.5);
  };
  auto r = integrate_interval(f, 0.0, 1.0, 5e-11);
  r += integrate_semi_infinite(f, 1.0, 5e-11);
  REQUIRE(r.converged);
  REQUIRE_THAT(r.value, WithinAbs(1.0, 1e-9));
}

TEST_CASE("semi-infinite exponential") {
  const auto r =
      integrate_semi_infinite([](double y) { return std::exp(-y); }, 0.0, 1e-10);
  REQUIRE_THAT(r.value, WithinAbs(1.0, 1e-9));
}

TEST_CASE("halving the tolerance never worsens the Frullani gap") {
  auto f = [](double z) { return (std::exp(-0.5 * z) - std::exp(-z)) / z; };
  double prev_gap = 1.0;
  for (double tol : {1e-4, 1e-6, 1e-8, 1e-10}) {
    const auto r = integrate_semi_infinite(f, 0.0, tol);
    const double gap = std::abs(r.value - std::log(2.0));
    REQUIRE(gap <= prev_gap + 1e-15);
    prev_gap = gap;
  }
}

TEST_CASE("series summation with geometric tail bound") {
  auto term = [](long k) { return std::pow(0.5, static_cast<double>(k)); };
  auto tail = [](long k) { return std::pow(0.5, static_cast<double>(k)); };
  const auto r = sum_series(term, tail, 1e-10);
  REQUIRE(r.converged);
  REQUIRE_THAT(r.value, WithinAbs(1.0, 1e-10));
}

TEST_CASE("snr integral basics") {
  const auto c = integrate_snr([](double) { return 0.25; }, 0.0, 2.0, 1e-12);
  REQUIRE_THAT(c.value, WithinAbs(0.5, 1e-11));

  const auto e = integrate_snr([](double a) { return std::exp(-a); }, 0.0,
                               30.0, 1e-10);
  REQUIRE_THAT(e.value, WithinAbs(1.0 - std::exp(-30.0), 1e-9));

  // matched point-mass loss has a zero integrand
  const auto z = integrate_snr([](double) { return 0.0; }, 0.0, 5.0, 1e-12);
  REQUIRE_THAT(z.value, WithinAbs(0.0, 1e-15));
}

TEST_CASE("unreachable tolerance is flagged, not silently accepted") {
  const auto r = integrate_interval(
      [](double x) { return std::sin(100.0 * x) / (1e-3 + x); }, 0.0, 1.0,
      1e-30);
  REQUIRE_FALSE(r.converged);
  REQUIRE(r.error_estimate > 1e-30);
  REQUIRE(std::isfinite(r.value));
}

TEST_CASE("argument validation") {
  REQUIRE_THROWS_AS(
      integrate_interval([](double) { return 0.0; }, 1.0, 0.0, 1e-6),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      integrate_interval([](double) { return 0.0; }, 0.0, 1.0, -1.0),
      std::invalid_argument);
  REQUIRE_THROWS_AS(sum_series([](long) { return 0.0; },
                               [](long) { return 0.0; }, 0.0),
                    std::invalid_argument);
}
