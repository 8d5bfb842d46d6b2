#pragma once

#include <memory>
#include <vector>

#include "pointdiff/chebyshev.hpp"
#include "pointdiff/common.hpp"
#include "pointdiff/quadrature.hpp"
#include "pointdiff/specfun.hpp"

namespace pointdiff {

struct KernelParams {
  double theta = 1.0;
  QuadratureSpec quad{};

  void validate() const;
};

/// Interaction part v_t(x, y) of the point-interaction kernel. Depends on
/// the arguments only through (t, |x|, |y|) and is symmetric in them.
/// Either argument at the origin makes it infinite: DivergenceError.
double interaction_v(const KernelParams& p, double t, PlanarPoint x, PlanarPoint y);

/// K_t(x, y) = g_t(x - y) + v_t(x, y).
double full_kernel(const KernelParams& p, double t, PlanarPoint x, PlanarPoint y);

/// Relative Chapman-Kolmogorov residual |int K_s(x,z) K_{t-s}(z,y) dz - K_t(x,y)| / K_t(x,y).
double semigroup_residual(const KernelParams& p, double s, double t, PlanarPoint x, PlanarPoint y);

/// Relative residual of int K_t(x,y) K0(sqrt(2 theta)|y|) dy = e^{theta t} K0(sqrt(2 theta)|x|).
double gst_eigen_residual(const KernelParams& p, double t, PlanarPoint x);

namespace kernel {

/// v as a function of (theta, t, r1, r2) with explicit relative tolerance.
/// Used directly when a table is not worth building.
double interaction_radial(double theta, double t, double r1, double r2, double rel_tol);

/// J_sigma(rho) = theta int_0^sigma nu'(theta u) g_{sigma-u}(rho) du: the inner
/// time integral of v, also the Leb-family density of visits to the origin.
double inner_j(double theta, double sigma, double rho, double rel_tol);

/// J_sigma(rho) for one fixed rho, tabulated against ln(sigma) on
/// (0, sigma_max]. Values below the tabulated range are computed directly.
class JProfile {
 public:
  JProfile(double theta, double rho, double sigma_max, double rel_tol = 1e-10);
  double operator()(double sigma) const;
  double rho() const { return rho_; }
  double sigma_max() const { return sigma_max_; }

 private:
  double theta_;
  double rho_;
  double sigma_max_;
  double rel_tol_;
  ChebyshevTable table_;
};

/// v_t(r, rho) for a fixed radius rho and any t <= t_max, using a JProfile
/// for the inner integral; each call is a single outer quadrature.
class RadialInteraction {
 public:
  RadialInteraction(double theta, double rho, double t_max, double rel_tol = 1e-9);
  double operator()(double t, double r) const;
  double rho() const { return profile_.rho(); }

 private:
  double theta_;
  double rel_tol_;
  JProfile profile_;
};

/// Outer time integral of v given any callable for J_sigma(rho2).
template <class J>
double interaction_from_j(double t, double rho1, double rho2, const J& j, double rel_tol);

/// Cached v_t(r1, r2) for one (theta, t): bicubic interpolation of the
/// Gaussian-compensated logarithm on a grid uniform in ln r, with direct evaluation
/// outside the tabulated range. Thread-safe after construction.
class InteractionTable {
 public:
  explicit InteractionTable(double theta, double t, double rel_tol = 1e-8);

  double operator()(double r1, double r2) const;
  double theta() const { return theta_; }
  double t() const { return t_; }
  /// Largest relative deviation between table and direct evaluation seen
  /// at the off-grid validation points.
  double validation_error() const { return validation_error_; }

 private:
  double theta_;
  double t_;
  double s_lo_ = 0.0;
  double s_hi_ = 0.0;
  int n_ = 0;
  double rel_tol_;
  std::vector<double> grid_;  // (n_ x n_) compensated logs
  double validation_error_ = 0.0;
};

/// Process-wide table cache keyed on (theta, t). Tables are built once;
/// concurrent lookups are safe.
std::shared_ptr<const InteractionTable> interaction_table(double theta, double t);

/// Angular average of the heat kernel: int_0^{2 pi} g_t(x - z) dphi for
/// |x| = r and z on the circle of radius rho.
double ring_heat(double t, double r, double rho);

template <class J>
double interaction_from_j(double t, double rho1, double rho2, const J& j, double rel_tol) {
  const double half = 0.5 * t;
  const double eta_hi = std::log(half);
  // r in (0, t/2] as r = e^eta, and sigma = t - r in (0, t/2] as sigma = e^eta.
  const double a_lo = std::min(std::log(rho1 * rho1 / 100.0), eta_hi - 3.0);
  auto fa = [&](double eta) {
    const double r = std::exp(eta);
    return std::exp(-rho1 * rho1 / (2.0 * r)) * j(t - r);
  };
  const double b_lo = std::min(std::log(rho2 * rho2 / 100.0), eta_hi - 3.0);
  auto fb = [&](double eta) {
    const double sigma = std::exp(eta);
    return kTwoPi * heat_kernel_radial(t - sigma, rho1) * j(sigma) * sigma;
  };
  return quad(fa, a_lo, eta_hi, rel_tol) + quad(fb, b_lo, eta_hi, rel_tol);
}

}  // namespace kernel
}  // namespace pointdiff
