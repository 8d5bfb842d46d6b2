#include "pointdiff/kernel.hpp"

#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>

#include "pointdiff/quadrature.hpp"
#include "pointdiff/specfun.hpp"

namespace pointdiff {

void KernelParams::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("KernelParams: theta must be positive");
  quad.validate();
}

namespace kernel {

double inner_j(double theta, double sigma, double rho, double rel_tol) {
  if (!(rho > 0.0)) throw DivergenceError("inner time integral diverges at the origin");
  const double delta = 0.5 * sigma;
  const double l_delta = std::log(theta * delta);
  const double rho2 = rho * rho;

  // Near u = sigma the Gaussian factor peaks at sigma - u ~ rho^2; integrate
  // in eta = ln(sigma - u).
  const double eta_hi = std::log(delta);
  const double eta_lo = std::min(std::log(rho2 / 100.0), eta_hi - 3.0);
  auto fb = [&](double eta) {
    const double w = std::exp(eta);
    const double rest = sigma - w;
    return volterra::mu_log(std::log(theta * rest)) / rest * std::exp(-rho2 / (2.0 * w)) / kTwoPi;
  };
  const double piece_b = quad(fb, eta_lo, eta_hi, rel_tol);

  // Near u = 0 integrate by parts (nu(0) = 0) and put u = delta e^{-w}.
  const double term0 = volterra::nu_log(l_delta) * heat_kernel_radial(sigma - delta, rho);
  auto fa = [&](double w) {
    const double u = delta * std::exp(-w);
    const double wt = sigma - u;
    const double g = std::exp(-rho2 / (2.0 * wt)) / (kTwoPi * wt);
    const double gdot = g * (rho2 / (2.0 * wt * wt) - 1.0 / wt);
    return volterra::nu_log(l_delta - w) * gdot * u;
  };
  const double scale = std::abs(term0) + std::abs(piece_b);
  const double piece_a = quad(fa, 0.0, 40.0, rel_tol, 0.1 * rel_tol * scale);
  return term0 + piece_a + piece_b;
}

double interaction_radial(double theta, double t, double r1, double r2, double rel_tol) {
  if (!(t > 0.0)) throw DomainError("interaction term: t must be positive");
  if (!(r1 > 0.0) || !(r2 > 0.0)) {
    throw DivergenceError("interaction term is infinite when an argument is at the origin");
  }
  const double rho1 = std::min(r1, r2);
  const double rho2 = std::max(r1, r2);
  const double inner_tol = 0.1 * rel_tol;
  auto j = [&](double sigma) { return inner_j(theta, sigma, rho2, inner_tol); };
  return interaction_from_j(t, rho1, rho2, j, rel_tol);
}

// ------------------------------------------------------------ JProfile

namespace {
double profile_lo(double rho, double sigma_max) {
  return std::min(rho * rho / 100.0, sigma_max * std::exp(-4.0));
}
}  // namespace

JProfile::JProfile(double theta, double rho, double sigma_max, double rel_tol)
    : theta_(theta), rho_(rho), sigma_max_(sigma_max), rel_tol_(rel_tol) {
  if (!(rho > 0.0)) throw DivergenceError("JProfile: radius must be positive");
  if (!(sigma_max > 0.0)) throw DomainError("JProfile: sigma_max must be positive");
  const double lo = std::log(profile_lo(rho, sigma_max));
  const double hi = std::log(sigma_max);
  table_ = ChebyshevTable(
      [&](double eta) { return inner_j(theta_, std::exp(eta), rho_, 0.1 * rel_tol_); }, lo, hi,
      rel_tol, 1e-6);
}

double JProfile::operator()(double sigma) const {
  const double eta = std::log(sigma);
  if (eta >= table_.lo() && eta <= table_.hi()) return table_(eta);
  return inner_j(theta_, sigma, rho_, 0.1 * rel_tol_);
}

RadialInteraction::RadialInteraction(double theta, double rho, double t_max, double rel_tol)
    : theta_(theta), rel_tol_(rel_tol), profile_(theta, rho, t_max, 0.1 * rel_tol) {}

double RadialInteraction::operator()(double t, double r) const {
  if (!(r > 0.0)) throw DivergenceError("interaction term is infinite at the origin");
  return interaction_from_j(t, r, profile_.rho(), profile_, rel_tol_);
}

// ------------------------------------------------------ InteractionTable

namespace {
constexpr double kTableStep = 0.1;
constexpr double kTableRelLo = 1e-6;
constexpr double kTableRelHi = 40.0;
}  // namespace

InteractionTable::InteractionTable(double theta, double t, double rel_tol)
    : theta_(theta), t_(t), rel_tol_(rel_tol) {
  const double sq = std::sqrt(t);
  s_lo_ = std::log(kTableRelLo * sq);
  n_ = static_cast<int>(std::ceil((std::log(kTableRelHi * sq) - s_lo_) / kTableStep)) + 1;
  s_hi_ = s_lo_ + (n_ - 1) * kTableStep;
  grid_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
  for (int j = 0; j < n_; ++j) {
    const double rho2 = std::exp(s_lo_ + j * kTableStep);
    JProfile profile(theta, rho2, t, 0.1 * rel_tol);
    for (int i = 0; i <= j; ++i) {
      const double rho1 = std::exp(s_lo_ + i * kTableStep);
      const double v = interaction_from_j(t, rho1, rho2, profile, rel_tol);
      const double l = std::log(v) + (rho1 + rho2) * (rho1 + rho2) / (2.0 * t);
      grid_[static_cast<std::size_t>(i) * n_ + j] = l;
      grid_[static_cast<std::size_t>(j) * n_ + i] = l;
    }
  }
  // Spot-check cell centres against direct evaluation.
  for (int k = 0; k < 12; ++k) {
    const double s1 = s_lo_ + (0.5 + (k * 7 % (n_ - 1))) * kTableStep;
    const double s2 = s_lo_ + (0.5 + (k * 13 % (n_ - 1))) * kTableStep;
    const double r1 = std::exp(s1);
    const double r2 = std::exp(s2);
    const double direct = interaction_radial(theta, t, r1, r2, rel_tol);
    if (direct > 0.0) {
      validation_error_ = std::max(validation_error_, std::abs((*this)(r1, r2) - direct) / direct);
    }
  }
}

double InteractionTable::operator()(double r1, double r2) const {
  if (!(r1 > 0.0) || !(r2 > 0.0)) {
    throw DivergenceError("interaction term is infinite when an argument is at the origin");
  }
  const double s1 = std::log(r1);
  const double s2 = std::log(r2);
  if (s1 < s_lo_ || s1 > s_hi_ || s2 < s_lo_ || s2 > s_hi_) {
    return interaction_radial(theta_, t_, r1, r2, rel_tol_);
  }
  // Tensor cubic Lagrange interpolation on the 4 x 4 stencil around the cell.
  auto stencil = [&](double s, int& base, double w[4]) {
    const double u = (s - s_lo_) / kTableStep;
    base = std::clamp(static_cast<int>(std::floor(u)) - 1, 0, n_ - 4);
    const double x = u - base;
    w[0] = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
    w[1] = x * (x - 2.0) * (x - 3.0) / 2.0;
    w[2] = -x * (x - 1.0) * (x - 3.0) / 2.0;
    w[3] = x * (x - 1.0) * (x - 2.0) / 6.0;
  };
  int b1 = 0;
  int b2 = 0;
  double w1[4];
  double w2[4];
  stencil(s1, b1, w1);
  stencil(s2, b2, w2);
  double l = 0.0;
  for (int a = 0; a < 4; ++a) {
    double row = 0.0;
    for (int b = 0; b < 4; ++b) row += w2[b] * grid_[static_cast<std::size_t>(b1 + a) * n_ + b2 + b];
    l += w1[a] * row;
  }
  return std::exp(l - (r1 + r2) * (r1 + r2) / (2.0 * t_));
}

std::shared_ptr<const InteractionTable> interaction_table(double theta, double t) {
  // Steps computed by subtracting grid times differ in the last bits; snap
  // them so that equal steps share one table.
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", t);
  t = std::strtod(buf, nullptr);
  static std::mutex mu;
  static std::map<std::pair<double, double>, std::shared_ptr<const InteractionTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{theta, t}];
  if (!slot) slot = std::make_shared<const InteractionTable>(theta, t);
  return slot;
}

}  // namespace kernel

double interaction_v(const KernelParams& p, double t, PlanarPoint x, PlanarPoint y) {
  p.validate();
  if (!(t > 0.0)) throw DomainError("interaction_v: t must be positive");
  return kernel::interaction_radial(p.theta, t, x.norm(), y.norm(), std::min(p.quad.rel_tol, 1e-8));
}

double full_kernel(const KernelParams& p, double t, PlanarPoint x, PlanarPoint y) {
  return heat_kernel(t, x - y) + interaction_v(p, t, x, y);
}

namespace kernel {

double ring_heat(double t, double r, double rho) {
  const double c = r * rho / t;
  return std::exp(-(r - rho) * (r - rho) / (2.0 * t)) * bessel::i0e(c) / t;
}

}  // namespace kernel

double semigroup_residual(const KernelParams& p, double s, double t, PlanarPoint x, PlanarPoint y) {
  p.validate();
  if (!(s > 0.0 && s < t)) throw DomainError("semigroup_residual: need 0 < s < t");
  const double tol = std::min(p.quad.rel_tol, 1e-8);
  const double rx = x.norm();
  const double ry = y.norm();
  const double u = t - s;
  const kernel::RadialInteraction vx(p.theta, rx, s, 0.1 * tol);
  const kernel::RadialInteraction vy(p.theta, ry, u, 0.1 * tol);
  const PlanarPoint c = (1.0 / s) * x + (1.0 / u) * y;
  const double cn = c.norm();
  auto integrand = [&](double rho) {
    if (rho <= 0.0) return 0.0;
    const double e = -(x.norm2() + rho * rho) / (2.0 * s) - (y.norm2() + rho * rho) / (2.0 * u);
    const double t1 = std::exp(e + rho * cn) * bessel::i0e(rho * cn) / (kTwoPi * s * u);
    const double vs = vx(s, rho);
    const double vu = vy(u, rho);
    const double t2 = kernel::ring_heat(s, rx, rho) * vu;
    const double t3 = vs * kernel::ring_heat(u, ry, rho);
    const double t4 = kTwoPi * vs * vu;
    return rho * (t1 + t2 + t3 + t4);
  };
  const double r_cut = std::max(rx, ry) + 12.0 * std::sqrt(t);
  std::vector<double> breaks{0.0, std::min(rx, ry), std::max(rx, ry), r_cut};
  double lhs = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    lhs += quad(integrand, breaks[i], breaks[i + 1], tol, 1e-300);
  }
  const double rhs = full_kernel(p, t, x, y);
  return std::abs(lhs - rhs) / rhs;
}

double gst_eigen_residual(const KernelParams& p, double t, PlanarPoint x) {
  p.validate();
  if (!(t > 0.0)) throw DomainError("gst_eigen_residual: t must be positive");
  if (x.is_origin()) throw DomainError("gst_eigen_residual: x must be nonzero");
  const double tol = std::min(p.quad.rel_tol, 1e-8);
  const double c = std::sqrt(2.0 * p.theta);
  const double rx = x.norm();
  const kernel::RadialInteraction vx(p.theta, rx, t, 0.1 * tol);
  auto integrand = [&](double rho) {
    if (rho <= 0.0) return 0.0;
    const double k0 = bessel::k_integral(0, c * rho, 0.0, kInf);
    return rho * k0 * (kernel::ring_heat(t, rx, rho) + kTwoPi * vx(t, rho));
  };
  const double r_cut = rx + 12.0 * std::sqrt(t) + 40.0 / c;
  const double lhs = quad(integrand, 0.0, rx, tol, 1e-300) + quad(integrand, rx, r_cut, tol, 1e-300);
  const double rhs = std::exp(p.theta * t) * bessel::k_integral(0, c * rx, 0.0, kInf);
  return std::abs(lhs - rhs) / rhs;
}

}  // namespace pointdiff
