#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/expint.hpp>

#include "doctest.h"
#include "oracles.hpp"
#include "pointdiff/specfun.hpp"

using namespace pointdiff;

TEST_CASE("heat kernel values") {
  CHECK(heat_kernel(1.0, {0, 0}) == rel(1.0 / (2 * kPi), 1e-15));
  CHECK(heat_kernel(2.0, {0, 0}) == rel(1.0 / (4 * kPi), 1e-15));
  // 50-digit reference for exp(-1)/pi.
  CHECK(heat_kernel(0.5, {1, 0}) == rel(0.11709966304863834, 1e-14));
  CHECK_THROWS_AS(heat_kernel(0.0, {1, 0}), DomainError);
  CHECK_THROWS_AS(heat_kernel(-1.0, {1, 0}), DomainError);
}

TEST_CASE("volterra nu against a Simpson oracle") {
  CHECK(volterra_nu(0.0).value == 0.0);
  for (double a : {0.3, 1.0, 5.0}) {
    const auto v = volterra_nu(a);
    CHECK(v.value == rel(oracle::nu(a), 1e-9));
    CHECK(v.err_estimate <= std::max(1e-10, 1e-8 * v.value));
    CHECK(volterra::nu(a) == rel(v.value, 1e-11));
  }
}

TEST_CASE("volterra nu is increasing") {
  double prev = 0.0;
  for (double a = 0.01; a < 20.0; a *= 1.3) {
    const double v = volterra_nu(a).value;
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("volterra nu prime matches finite differences") {
  for (double a : {0.5, 1.0, 2.0, 5.0}) {
    const double h = 1e-5;
    const double fd = (volterra_nu(a + h, {1e-14, 1e-13}).value - volterra_nu(a - h, {1e-14, 1e-13}).value) / (2 * h);
    const double d = volterra_nu_prime(a).value;
    CHECK(std::abs(d - fd) / d < 1e-5);
  }
  CHECK(volterra_nu_prime(1e-4).value > volterra_nu_prime(1.0).value);
  // nu'(a) ~ 1 / (a ln^2(1/a)): the ratio drifts slowly towards 1.
  const double a = 1e-8;
  const double ratio = volterra_nu_prime(a).value * a * std::pow(std::log(1 / a), 2);
  MESSAGE("nu'(1e-8) * a ln^2(1/a) = " << ratio);
  CHECK(ratio > 0.5);
  CHECK(ratio < 2.0);
  CHECK_THROWS_AS(volterra_nu_prime(0.0), DomainError);
}

TEST_CASE("tabulated nu and mu agree with direct quadrature") {
  for (double l = -40.0; l < 4.0; l += 1.7) {
    CHECK(volterra::nu_log(l) == rel(volterra::nu_log_direct(l), 1e-11));
    CHECK(volterra::mu_log(l) == rel(volterra::mu_log_direct(l), 1e-11));
  }
}

TEST_CASE("exponential integrals") {
  CHECK(exp_integral_E1(1.0) == rel(boost::math::expint(1, 1.0), 1e-13));
  const double oracle_e1 = oracle::simpson([](double u) { return std::exp(-std::exp(u)); }, 0.0, 4.0, 20000);
  CHECK(exp_integral_E1(1.0) == rel(oracle_e1, 1e-12));
  for (double x : {1e-3, 0.2, 3.0, 30.0}) CHECK(exp_integral_E1(x) == rel(boost::math::expint(1, x), 1e-12));
  CHECK(renorm_E(1.0) == rel(std::exp(1.0) * exp_integral_E1(1.0), 1e-15));
  const double e100 = renorm_E(100.0);
  CHECK(e100 > 0.0);
  CHECK(e100 < 1.02 / 100.0);
  CHECK_THROWS_AS(exp_integral_E1(0.0), DomainError);
  double prev = kInf;
  for (double x = 0.01; x < 50; x *= 1.5) {
    CHECK(exp_integral_E1(x) < prev);
    prev = exp_integral_E1(x);
  }
}

TEST_CASE("renewal identity") {
  for (double x : {0.25, 1.0, 4.0}) {
    const double lhs = renewal_integral(x);
    CHECK(std::abs(lhs - std::exp(x)) / std::exp(x) < 1e-6);
  }
}

TEST_CASE("bessel K against boost") {
  for (double z : {1e-3, 0.1, 1.0, 2.5, 10.0, 40.0}) {
    CHECK(bessel_k(0, z).value == rel(boost::math::cyl_bessel_k(0, z), 1e-9));
    CHECK(bessel_k(1, z).value == rel(boost::math::cyl_bessel_k(1, z), 1e-9));
    for (int n = 0; n < 3; ++n) {
      CHECK(bessel::k_full(n, z) == rel(boost::math::cyl_bessel_k(n, z), 1e-11));
    }
  }
  CHECK_THROWS_AS(bessel_k(0, 0.0), DomainError);
}

TEST_CASE("bessel K asymptotic bands") {
  const double small = 1e-6;
  const double r0 = bessel_k(0, small).value / std::log(1 / small);
  CHECK(r0 >= 0.9);
  CHECK(r0 <= 1.1);
  const double z = 20.0;
  const double r1 = bessel_k(0, z).value / (std::sqrt(kPi / (2 * z)) * std::exp(-z));
  CHECK(r1 >= 0.95);
  CHECK(r1 <= 1.05);
}

TEST_CASE("incomplete bessel K") {
  CHECK(incomplete_bessel_k(0, 1.0, 0.0).value == rel(bessel_k(0, 1.0).value, 1e-12));
  CHECK(incomplete_bessel_k(0, 1.0, 50.0).value < 1e-20);
  // Tail oracle: a = e^u on [0, ln 80].
  const double z = 2.0;
  const double tail = oracle::simpson(
      [z](double u) {
        const double a = std::exp(u);
        return 0.5 * std::exp(-a - z * z / (4 * a));
      },
      0.0, std::log(80.0), 20000);
  CHECK(incomplete_bessel_k(0, z, 1.0).value == rel(tail, 1e-10));

  for (double zz : {0.5, 1.0, 3.0}) {
    for (double y : {0.1, 1.0}) {
      const auto up = incomplete_bessel_k(0, zz, y);
      const auto lo = incomplete_bessel_k_lower(0, zz, y);
      const auto full = bessel_k(0, zz);
      CHECK(std::abs(up.value + lo.value - full.value) <=
            up.err_estimate + lo.err_estimate + full.err_estimate + 1e-14);
    }
  }
  for (int n = 0; n < 2; ++n) {
    double prev = kInf;
    for (double y = 0.0; y < 20.0; y += 0.7) {
      const double v = incomplete_bessel_k(n, 1.3, y).value;
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("scaled modified Bessel I") {
  for (double x : {1e-4, 0.5, 3.0, 30.0, 600.0}) {
    CHECK(bessel::i0e(x) == rel(boost::math::cyl_bessel_i(0, x) * std::exp(-x), 1e-12));
    CHECK(bessel::i1e(x) == rel(boost::math::cyl_bessel_i(1, x) * std::exp(-x), 1e-12));
  }
  CHECK(bessel::i0e(0.0) == 1.0);
  CHECK(bessel::i1e(0.0) == 0.0);
  // Large-argument asymptotic e^{-x} I_n(x) ~ 1 / sqrt(2 pi x).
  CHECK(bessel::i0e(5e4) * std::sqrt(2 * kPi * 5e4) == rel(1.0 + 1.0 / (8 * 5e4), 1e-9));
}
