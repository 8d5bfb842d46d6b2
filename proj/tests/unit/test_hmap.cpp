#include <boost/math/special_functions/bessel.hpp>

#include "doctest.h"
#include "oracles.hpp"
#include "pointdiff/hmap.hpp"

using namespace pointdiff;

namespace {

// x-component of (y K0(c|y|) * g_t)(x) for x = (r, 0), divided by h_t(r) = e^{theta t} K0(c r).
// The angular integral of cos(phi) g_t gives I1; the radial integral runs in rho = e^u.
double gst_hmap_oracle(double theta, double t, double r) {
  const double c = std::sqrt(2 * theta);
  auto f = [&](double u) {
    const double rho = std::exp(u);
    const double ring1 = std::exp(-(r - rho) * (r - rho) / (2 * t)) * boost::math::cyl_bessel_i(1, r * rho / t) *
                         std::exp(-r * rho / t) / t;
    return rho * rho * rho * boost::math::cyl_bessel_k(0, c * rho) * ring1;
  };
  const double num = oracle::simpson(f, -40.0, std::log(r + 14 * std::sqrt(t)), 40000);
  return num / (std::exp(theta * t) * boost::math::cyl_bessel_k(0, c * r));
}

}  // namespace

TEST_CASE("H map structure and closed forms") {
  const HEval leb(FamilySpec::leb(1.0, 1.0));
  const HEval gst(FamilySpec::gst(1.0, 1.0));
  CHECK(h_map(leb, 0.5, {0, 0}) == PlanarPoint{0, 0});
  CHECK(h_map(gst, 0.5, {0, 0}) == PlanarPoint{0, 0});
  const double v = volterra_V(leb.family(), 1.0, {1, 0});
  CHECK(h_map(leb, 1.0, {1, 0}).x == rel(1.0 / (1.0 + v), 1e-13));
  CHECK(h_map(leb, 1.0, {1, 0}).y == 0.0);
  CHECK(h_map(leb, 0.0, {0.3, 0.4}) == PlanarPoint{0.3, 0.4});
  for (const auto* e : {&leb, &gst}) {
    for (double phi : {0.3, 2.0, -1.1}) {
      const PlanarPoint x = PlanarPoint::polar(0.8, phi);
      const PlanarPoint hx = h_map(*e, 0.7, x);
      CHECK(std::abs(cross(hx, x)) < 1e-15 * hx.norm());
      CHECK(dot(hx, x) > 0.0);
    }
  }
  const HEval dir(FamilySpec::dir(1.0, 1.0, 0.05));
  CHECK(h_map(dir, 0.5, {1, 0}) == PlanarPoint{0, 0});
}

TEST_CASE("ground-state H map against the convolution oracle") {
  const HEval gst(FamilySpec::gst(1.0, 1.0));
  for (double r : {0.3, 1.0, 2.0}) {
    CHECK(h_map(gst, 0.5, {r, 0}).x == rel(gst_hmap_oracle(1.0, 0.5, r), 1e-8));
  }
  // Closed form in terms of incomplete Bessel functions.
  const double c = std::sqrt(2.0);
  const double k0 = bessel_k(0, c).value;
  const double closed = incomplete_bessel_k(0, c, 0.5).value / k0 - c * 0.5 * incomplete_bessel_k(1, c, 0.5).value / k0;
  CHECK(h_map(gst, 0.5, {1, 0}).x == rel(closed, 1e-10));
  const HEval gst2(FamilySpec::gst(2.0, 1.0));
  CHECK(h_map(gst2, 0.25, {0, 0.7}).y == rel(gst_hmap_oracle(2.0, 0.25, 0.7), 1e-8));
}

TEST_CASE("Jacobian eigenvalues match finite differences") {
  for (const auto& f : {FamilySpec::gst(1.0, 1.0), FamilySpec::leb(1.0, 1.0), FamilySpec::gau(1.0, 1.0, 0.5)}) {
    const HEval e(f);
    for (double r : {0.1, 1.0, 3.0}) {
      const double t = 0.5;
      const PlanarPoint u = PlanarPoint::polar(1.0, 0.6);
      const PlanarPoint n{-u.y, u.x};
      const PlanarPoint x = r * u;
      const double d = 1e-5 * r;
      const double radial_fd = dot(h_map(e, t, x + d * u) - h_map(e, t, x - d * u), u) / (2 * d);
      const double tangential_fd = dot(h_map(e, t, x + d * n) - h_map(e, t, x - d * n), n) / (2 * d);
      const auto j = jacobian_eigs(e, t, x);
      CHECK(j.lambda_radial == rel(radial_fd, 1e-5));
      CHECK(j.lambda_tangential == rel(tangential_fd, 1e-5));
      CHECK(j.lambda_tangential == rel(e.profile(t, r), 1e-14));
    }
  }
  CHECK_THROWS_AS(jacobian_eigs(HEval(FamilySpec::leb(1.0, 1.0)), 0.5, {0, 0}), DomainError);
}

TEST_CASE("H map tends to the identity at short times") {
  const HEval leb(FamilySpec::leb(1.0, 1.0));
  const auto j = jacobian_eigs(leb, 1e-4, {1, 0});
  CHECK(std::abs(j.lambda_radial - 1.0) < 1e-6);
  CHECK(std::abs(j.lambda_tangential - 1.0) < 1e-6);
  const PlanarPoint g = h_map_inverse(leb, 1e-4, {1, 0});
  CHECK(std::abs(g.x - 1.0) < 1e-6);
}

TEST_CASE("eigenvalue bound sweep") {
  for (const auto& f : {FamilySpec::gst(1.0, 1.0), FamilySpec::leb(1.0, 1.0)}) {
    const HEval e(f);
    double worst = 0.0;
    for (double t = 0.1; t <= 1.0 + 1e-12; t += 0.15) {
      for (double r = 1e-3; r <= 10.0; r *= 1.5) {
        const auto j = jacobian_eigs(e, t, {r, 0});
        CHECK(std::isfinite(j.lambda_radial));
        worst = std::max({worst, std::abs(j.lambda_radial), std::abs(j.lambda_tangential)});
      }
    }
    MESSAGE(f.selector() << ": max eigenvalue modulus over the sweep = " << worst);
    CHECK(worst < 10.0);
  }
}

TEST_CASE("inverse H map") {
  const HEval gst(FamilySpec::gst(1.0, 1.0));
  const PlanarPoint x = PlanarPoint::polar(2.0, 0.9);
  const PlanarPoint back = h_map_inverse(gst, 0.5, h_map(gst, 0.5, x));
  CHECK((back - x).norm() < 1e-8);

  const HEval leb(FamilySpec::leb(1.0, 1.0));
  const PlanarPoint g = h_map_inverse(leb, 1.0, {0.3, 0});
  const double r = g.x;
  CHECK(g.y == 0.0);
  CHECK(r / (1.0 + volterra_V(leb.family(), 1.0, {r, 0})) == rel(0.3, 1e-9));

  for (const auto* e : {&gst, &leb}) {
    for (double m : {1e-3, 0.05, 0.7, 3.0, 12.0}) {
      const PlanarPoint y = PlanarPoint::polar(m, -2.0);
      const PlanarPoint hy = h_map(*e, 0.8, h_map_inverse(*e, 0.8, y));
      CHECK((hy - y).norm() < 1e-9 * (1 + m));
    }
  }
  const HEval dir(FamilySpec::dir(1.0, 1.0, 0.05));
  CHECK_THROWS_AS(h_map_inverse(dir, 0.5, {1, 0}), HypothesisViolation);
  try {
    (void)h_map_inverse(dir, 0.5, {1, 0});
  } catch (const HypothesisViolation& err) {
    CHECK(err.bracket_lo() < err.bracket_hi());
  }
  CHECK_THROWS_AS(h_map_inverse(gst, 0.5, {0, 0}), DomainError);
}

TEST_CASE("space-time harmonicity") {
  const PlanarPoint x{1, 0};
  const auto leb = harmonicity_residual(HEval(FamilySpec::leb(1.0, 1.0)), 0.0, 0.5, x);
  CHECK(leb.h_residual < 5e-4);
  CHECK(leb.H_residual < 1e-3);
  const auto gst = harmonicity_residual(HEval(FamilySpec::gst(1.0, 1.0)), 0.0, 0.5, x);
  CHECK(gst.h_residual < 5e-4);
  CHECK(gst.H_residual < 1e-3);
  for (const auto& f : {FamilySpec::leb(1e-8, 1.0), FamilySpec::gst(1e-8, 1.0)}) {
    const auto weak = harmonicity_residual(HEval(f), 0.0, 0.5, x);
    CHECK(weak.h_residual < 1e-6);
    CHECK(weak.H_residual < 1e-6);
  }
  const auto gau = harmonicity_residual(HEval(FamilySpec::gau(1.0, 1.0, 0.5)), 0.25, 0.75, {0, 0.6});
  CHECK(gau.h_residual < 5e-4);
  CHECK(gau.H_residual < 1e-3);
  CHECK_THROWS_AS(harmonicity_residual(HEval(FamilySpec::leb(1.0, 1.0)), 0.5, 0.5, x), DomainError);
}

TEST_CASE("moment probe is reproducible and positive") {
  const HEval leb(FamilySpec::leb(1.0, 1.0));
  const auto a = moment_scaling_probe(leb, 1, 0.0, 0.25, {1, 0}, 400, 11, 1);
  const auto b = moment_scaling_probe(leb, 1, 0.0, 0.25, {1, 0}, 400, 11, 3);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(a.n == 400);
  CHECK(a.mean > 0.0);
  CHECK_THROWS_AS(moment_scaling_probe(leb, 3, 0.0, 0.25, {1, 0}, 10, 1), DomainError);
}
