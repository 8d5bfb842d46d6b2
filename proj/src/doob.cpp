#include "pointdiff/doob.hpp"

#include <array>

#include "pointdiff/quadrature.hpp"
#include "pointdiff/specfun.hpp"

namespace pointdiff {

DensityEval::DensityEval(const FamilySpec& family, const QuadratureSpec& quad)
    : DensityEval(family, KernelParams{family.theta, quad}, quad) {}

DensityEval::DensityEval(const FamilySpec& family, const KernelParams& kernel,
                         const QuadratureSpec& quad)
    : family_(family), kernel_(kernel), quad_(quad) {
  family_.validate();
  kernel_.validate();
  quad_.validate();
  if (kernel_.theta != family_.theta) {
    throw DomainError("DensityEval: family and kernel must share theta");
  }
  fam_ = Family::get(family_);
}

namespace {

void check_interval(const DensityEval& d, double s, double t) {
  if (!(s >= 0.0 && s < t && t <= d.horizon() * (1.0 + 1e-12))) {
    throw DomainError("need 0 <= s < t <= T");
  }
}

// ln of K_order(z, y) (upper incomplete), robust against underflow.
double log_upper_k(int order, double z, double y) {
  return bessel::log_k_integral(order, z, y, kInf);
}

// grad log (h0 * g_t) along x-hat.
double conditional_radial_drift(const FamilySpec& f, double t, double r) {
  switch (f.kind) {
    case FamilyKind::gst: {
      const double c = std::sqrt(2.0 * f.theta);
      const double y = f.theta * t;
      return -c * std::exp(log_upper_k(1, c * r, y) - log_upper_k(0, c * r, y));
    }
    case FamilyKind::leb: return 0.0;
    case FamilyKind::dir: return -r / t;
    case FamilyKind::gau: return -r / (t + f.param);
  }
  return 0.0;
}

}  // namespace

double transition_density(const DensityEval& d, double s, double t, PlanarPoint x, PlanarPoint y) {
  check_interval(d, s, t);
  if (y.is_origin()) throw DivergenceError("transition density is not evaluable at y = 0");
  if (x.is_origin()) return transition_density_from_origin(d, s, t, y).value;
  const Family& fam = d.evaluator();
  const double T = d.horizon();
  const double hy = fam.h(T - t, y.norm());
  const double hx = fam.h(T - s, x.norm());
  return hy / hx * full_kernel(d.kernel(), t - s, x, y);
}

DensityValue transition_density_from_origin(const DensityEval& d, double s, double t, PlanarPoint y) {
  check_interval(d, s, t);
  if (y.is_origin()) throw DivergenceError("transition density is not evaluable at y = 0");
  // Numerator and denominator both grow like ln(1/|x|) with locked
  // coefficients, so the ratio converges like a power of |x|. Averaging x and
  // -x removes the odd first-order term of g_{t-s}(x - y); what is left is
  // extrapolated in |x|^2.
  constexpr std::array<double, 3> radii{1e-4, 5e-5, 2.5e-5};
  std::array<double, 3> lam{};
  std::array<double, 3> val{};
  for (std::size_t i = 0; i < radii.size(); ++i) {
    lam[i] = radii[i] * radii[i];
    val[i] = 0.5 * (transition_density(d, s, t, PlanarPoint{radii[i], 0.0}, y) +
                     transition_density(d, s, t, PlanarPoint{-radii[i], 0.0}, y));
  }
  double limit = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < 3; ++j) {
      if (j != i) w *= (0.0 - lam[j]) / (lam[i] - lam[j]);
    }
    limit += w * val[i];
  }
  return {limit, true};
}

double conditional_density(const DensityEval& d, double s, double t, PlanarPoint x, PlanarPoint y) {
  check_interval(d, s, t);
  const double T = d.horizon();
  const FamilySpec& f = d.family();
  if (f.kind == FamilyKind::gst && !x.is_origin() && !y.is_origin()) {
    const double c = std::sqrt(2.0 * f.theta);
    const double log_ratio = log_upper_k(0, c * y.norm(), f.theta * (T - t)) -
                             log_upper_k(0, c * x.norm(), f.theta * (T - s)) - f.theta * (t - s);
    return std::exp(log_ratio) * heat_kernel(t - s, x - y);
  }
  return base_conv(f, T - t, y) / base_conv(f, T - s, x) * heat_kernel(t - s, x - y);
}

double survival_probability(const DensityEval& d, double t, PlanarPoint x) {
  if (!(t >= 0.0 && t <= d.horizon() * (1.0 + 1e-12))) throw DomainError("survival: t outside [0, T]");
  if (x.is_origin()) return 0.0;
  if (t == 0.0) return 1.0;
  const Family& fam = d.evaluator();
  const double r = x.norm();
  if (d.family().kind == FamilyKind::gst) {
    const double c = std::sqrt(2.0 * d.theta());
    return std::exp(log_upper_k(0, c * r, d.theta() * t) - std::log(bessel::k_full(0, c * r)));
  }
  const double b = fam.base(t, r);
  const double v = fam.V(t, r);
  if (v == 0.0) return 1.0;
  return b / (b + v);
}

double reweighting_factor(const DensityEval& d, double t, PlanarPoint x) {
  return 1.0 / survival_probability(d, d.horizon() - t, x);
}

DriftVector conditional_drift(const DensityEval& d, double t, PlanarPoint x) {
  if (!(t > 0.0 && t <= d.horizon() * (1.0 + 1e-12))) throw DomainError("conditional drift: t outside (0, T]");
  if (x.is_origin()) throw DivergenceError("conditional drift is singular at the origin");
  const double b = conditional_radial_drift(d.family(), t, x.norm());
  return {b * x.unit(), b};
}

double rn_derivative(const DensityEval& dh, const DensityEval& dhbar, PlanarPoint x0, PlanarPoint xT) {
  if (dh.theta() != dhbar.theta() || dh.horizon() != dhbar.horizon()) {
    throw DomainError("rn_derivative: families must share theta and T");
  }
  if (x0.is_origin() || xT.is_origin()) throw DivergenceError("rn_derivative: endpoints must be nonzero");
  const double T = dh.horizon();
  const double r0 = x0.norm();
  const double rT = xT.norm();
  const Family& h = dh.evaluator();
  const Family& hb = dhbar.evaluator();
  return (h.h(0.0, rT) / hb.h(0.0, rT)) * (hb.h(T, r0) / h.h(T, r0));
}

// ---------------------------------------------------------------- HitLaw

namespace {
constexpr double kTailEps = 1e-15;
}

HitLaw::HitLaw(const DensityEval& d, PlanarPoint x0)
    : fam_(d.evaluator_ptr()), x0_(x0), horizon_(d.horizon()) {
  if (x0.is_origin()) throw DomainError("hit_time_law: x0 must be nonzero");
  r_ = x0.norm();
  cutoff_dependent_ = d.family().kind == FamilyKind::dir;
  survive_ = survival_probability(d, horizon_, x0);
  norm_ = fam_->V(horizon_, r_);
  if (!(norm_ > 0.0)) throw DomainError("hit_time_law: the origin is not reachable from x0");
  const double t_hi = horizon_ - fam_->time_shift();
  const double t_lo = std::min(r_ * r_ / 1400.0, 0.25 * t_hi);
  xi_lo_ = xi_of(t_lo);
  xi_hi_ = std::log((1.0 - kTailEps) / kTailEps);
  cdf_table_ = ChebyshevTable([this](double xi) { return cdf_direct(t_of(xi)); }, xi_lo_, xi_hi_,
                              1e-12, 1e-6, 1.0);
}

double HitLaw::xi_of(double t) const {
  const double t_hi = horizon_ - fam_->time_shift();
  return std::log(t / (t_hi - t));
}

double HitLaw::t_of(double xi) const {
  const double t_hi = horizon_ - fam_->time_shift();
  return t_hi / (1.0 + std::exp(-xi));
}

double HitLaw::density(double t) const {
  if (!(t > 0.0 && t < horizon_)) return 0.0;
  return heat_kernel_radial(t, r_) * fam_->time_kernel(horizon_ - t) / norm_;
}

double HitLaw::cdf_direct(double t) const {
  if (t <= 0.0) return 0.0;
  const FamilySpec& f = fam_->spec();
  if (f.kind == FamilyKind::gst) {
    const double z = std::sqrt(2.0 * f.theta) * r_;
    return std::exp(bessel::log_k_integral(0, z, 0.0, f.theta * t) -
                    bessel::log_k_integral(0, z, 0.0, f.theta * horizon_));
  }
  // Unnormalized mass on (0, t] of g_s(r) N(T - s), with the lower part in ln s.
  const double T = horizon_;
  const double t_hi = T - fam_->time_shift();
  auto mass = [&](double upper) {
    upper = std::min(upper, t_hi);
    const double s_lo = std::min(r_ * r_ / 1400.0, 0.25 * t_hi);
    if (upper <= s_lo) return 0.0;
    const double mid = std::min(0.5 * t_hi, upper);
    auto f_log = [&](double eta) {
      const double s = std::exp(eta);
      return heat_kernel_radial(s, r_) * fam_->time_kernel(T - s) * s;
    };
    auto f_lin = [&](double s) { return heat_kernel_radial(s, r_) * fam_->time_kernel(T - s); };
    double m = quad(f_log, std::log(s_lo), std::log(mid), 1e-13, 1e-300);
    if (upper > mid) m += quad(f_lin, mid, upper, 1e-13, 1e-300);
    return m;
  };
  return mass(t) / mass(t_hi);
}

double HitLaw::cdf(double t) const {
  if (t <= 0.0) return 0.0;
  const double t_hi = horizon_ - fam_->time_shift();
  if (t >= t_hi) return 1.0;
  const double xi = xi_of(t);
  if (xi <= xi_lo_) return 0.0;
  if (xi >= xi_hi_) return 1.0;
  return std::clamp(cdf_table_(xi), 0.0, 1.0);
}

double HitLaw::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0, 1)");
  double a = xi_lo_;
  double b = xi_hi_;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = std::clamp(cdf_table_(m), 0.0, 1.0);
    if (std::abs(fm - u) <= 1e-10 || b - a < 1e-13) return t_of(m);
    (fm < u ? a : b) = m;
  }
  return t_of(0.5 * (a + b));
}

double HitLaw::total_mass(double rel_tol) const {
  const double t_hi = horizon_ - fam_->time_shift();
  auto f = [this](double t) { return density(t); };
  const double s_lo = std::min(r_ * r_ / 1400.0, 0.25 * t_hi);
  auto f_log = [this](double eta) {
    const double s = std::exp(eta);
    return density(s) * s;
  };
  return quad(f_log, std::log(s_lo), std::log(0.5 * t_hi), rel_tol, 1e-300) +
         quad(f, 0.5 * t_hi, t_hi, rel_tol, 1e-300);
}

HitLaw hit_time_law(const DensityEval& d, PlanarPoint x0) { return HitLaw(d, x0); }

// ----------------------------------------------------------- diagnostics

double normalization_residual(const DensityEval& d, double s, double t, PlanarPoint x) {
  check_interval(d, s, t);
  if (x.is_origin()) throw DomainError("normalization_residual: x must be nonzero");
  const Family& fam = d.evaluator();
  const double T = d.horizon();
  const double tau = t - s;
  const double rx = x.norm();
  const kernel::RadialInteraction v(d.theta(), rx, tau, 1e-10);
  const double hx = fam.h(T - s, rx);
  auto f = [&](double rho) {
    if (rho <= 0.0) return 0.0;
    const double k = kernel::ring_heat(tau, rx, rho) + kTwoPi * v(tau, rho);
    return rho * fam.h(T - t, rho) / hx * k;
  };
  const double cut = rx + 14.0 * std::sqrt(tau);
  const double total = quad(f, 0.0, rx, 1e-10, 1e-300) + quad(f, rx, cut, 1e-10, 1e-300);
  return std::abs(total - 1.0);
}

double chapman_kolmogorov_residual(const DensityEval& d, double s, double u, double t, PlanarPoint x,
                                   PlanarPoint y) {
  check_interval(d, s, t);
  if (!(u > s && u < t)) throw DomainError("chapman_kolmogorov_residual: need s < u < t");
  return semigroup_residual(d.kernel(), u - s, t - s, x, y);
}

double forward_equation_residual(const DensityEval& d, double s, double t, PlanarPoint x, PlanarPoint y) {
  check_interval(d, s, t);
  const double T = d.horizon();
  if (!(t < T)) throw DomainError("forward_equation_residual: need t < T");
  if (x.is_origin() || y.is_origin()) throw DomainError("forward_equation_residual: points must be nonzero");
  const Family& fam = d.evaluator();
  const double dt = 1e-3 * std::min(t - s, T - t);
  const double dy = 1e-3 * std::min(y.norm(), std::sqrt(t - s));
  const kernel::RadialInteraction v(d.theta(), x.norm(), t - s + dt, 1e-10);
  const double hx = fam.h(T - s, x.norm());
  auto dens = [&](double tt, PlanarPoint z) {
    const double tau = tt - s;
    return fam.h(T - tt, z.norm()) / hx * (heat_kernel(tau, x - z) + v(tau, z.norm()));
  };
  auto flux = [&](PlanarPoint z, int comp) {
    const double b = fam.h_dr(T - t, z.norm()) / fam.h(T - t, z.norm());
    const PlanarPoint dir = b * z.unit();
    return (comp == 0 ? dir.x : dir.y) * dens(t, z);
  };
  const PlanarPoint e1{dy, 0.0};
  const PlanarPoint e2{0.0, dy};
  const double d0 = dens(t, y);
  const double dtd = (dens(t + dt, y) - dens(t - dt, y)) / (2.0 * dt);
  const double lap =
      (dens(t, y + e1) + dens(t, y - e1) + dens(t, y + e2) + dens(t, y - e2) - 4.0 * d0) / (dy * dy);
  const double div = (flux(y + e1, 0) - flux(y - e1, 0) + flux(y + e2, 1) - flux(y - e2, 1)) / (2.0 * dy);
  const double res = dtd - 0.5 * lap + div;
  const double scale = std::max({std::abs(dtd), std::abs(0.5 * lap), std::abs(div)});
  return std::abs(res) / scale;
}

namespace {
double survival_radial(const Family& fam, double t, double r) {
  return fam.base(t, r) / fam.h(t, r);
}
}  // namespace

double survival_pde_residual(const DensityEval& d, double t, PlanarPoint x) {
  if (!(t > 0.0 && t < d.horizon())) throw DomainError("survival_pde_residual: need 0 < t < T");
  if (x.is_origin()) throw DomainError("survival_pde_residual: x must be nonzero");
  const Family& fam = d.evaluator();
  const double r = x.norm();
  const double dt = 1e-3 * std::min(t, d.horizon() - t);
  const double dr = 1e-3 * r;
  auto p = [&](double tt, double rr) { return survival_radial(fam, tt, rr); };
  const double p0 = p(t, r);
  const double pt = (p(t + dt, r) - p(t - dt, r)) / (2.0 * dt);
  const double pr = (p(t, r + dr) - p(t, r - dr)) / (2.0 * dr);
  const double prr = (p(t, r + dr) - 2.0 * p0 + p(t, r - dr)) / (dr * dr);
  const double b = fam.h_dr(t, r) / fam.h(t, r);
  const double half_lap = 0.5 * (prr + pr / r);
  const double res = pt - half_lap - b * pr;
  const double scale = std::max({std::abs(pt), std::abs(half_lap), std::abs(b * pr)});
  return std::abs(res) / scale;
}

double survival_gradient_residual(const DensityEval& d, double t, PlanarPoint x) {
  if (!(t > 0.0 && t <= d.horizon())) throw DomainError("survival_gradient_residual: need 0 < t <= T");
  if (x.is_origin()) throw DomainError("survival_gradient_residual: x must be nonzero");
  const Family& fam = d.evaluator();
  const double r = x.norm();
  const double dr = 1e-4 * r;
  auto p = [&](double rr) { return survival_radial(fam, t, rr); };
  const double fd = (-p(r + 2 * dr) + 8 * p(r + dr) - 8 * p(r - dr) + p(r - 2 * dr)) / (12.0 * dr);
  const double b_cond = conditional_radial_drift(d.family(), t, r);
  const double b = fam.h_dr(t, r) / fam.h(t, r);
  const double analytic = p(r) * (b_cond - b);
  return std::abs(fd - analytic) / std::abs(analytic);
}

}  // namespace pointdiff
