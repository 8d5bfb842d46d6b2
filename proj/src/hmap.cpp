#include "pointdiff/hmap.hpp"

#include "pointdiff/kernel.hpp"
#include "pointdiff/quadrature.hpp"
#include "pointdiff/specfun.hpp"

namespace pointdiff {

HEval::HEval(const FamilySpec& family, const QuadratureSpec& quad)
    : family_(family), quad_(quad), fam_(Family::get(family)) {
  quad_.validate();
}

double HEval::profile(double t, double r) const {
  const Family& f = *fam_;
  if (family_.kind == FamilyKind::dir) return 0.0;  // x h0 vanishes for a point mass at 0
  if (t == 0.0) return 1.0;
  if (family_.kind == FamilyKind::gst) {
    // The e^{theta t} factors cancel; work with log-scaled Bessel integrals.
    const double c = std::sqrt(2.0 * family_.theta);
    const double z = c * r;
    const double y = family_.theta * t;
    const double lk0 = z < 700.0 ? std::log(bessel::k_full(0, z)) : bessel::log_k_integral(0, z, 0.0, kInf);
    const double a = std::exp(bessel::log_k_integral(0, z, y, kInf) - lk0);
    const double b = std::exp(bessel::log_k_integral(1, z, y, kInf) - lk0);
    return a - c * t * b / r;
  }
  return (f.base(t, r) + t * f.base_dr(t, r) / r) / f.h(t, r);
}

double HEval::profile_dr(double t, double r) const {
  if (family_.kind == FamilyKind::dir || t == 0.0) return 0.0;
  const Family& f = *fam_;
  const double b1 = f.base_dr(t, r);
  const double num_dr = b1 + t * f.base_drr(t, r) / r - t * b1 / (r * r);
  const double h = f.h(t, r);
  return (num_dr - profile(t, r) * f.h_dr(t, r)) / h;
}

PlanarPoint h_map(const HEval& e, double t, PlanarPoint x) {
  if (!(t >= 0.0)) throw DomainError("h_map: t must be nonnegative");
  if (x.is_origin()) return {0.0, 0.0};
  return e.profile(t, x.norm()) * x;
}

JacobianEigs jacobian_eigs(const HEval& e, double t, PlanarPoint x) {
  if (x.is_origin()) throw DomainError("jacobian_eigs: x must be nonzero");
  const double r = x.norm();
  const double hb = e.profile(t, r);
  return {hb + r * e.profile_dr(t, r), hb};
}

PlanarPoint h_map_inverse(const HEval& e, double t, PlanarPoint y) {
  if (y.is_origin()) throw DomainError("h_map_inverse: y must be nonzero");
  const double target = y.norm();
  auto phi = [&](double r) { return r * e.profile(t, r); };
  if (e.family().kind == FamilyKind::dir) {
    throw HypothesisViolation("h_map_inverse: H vanishes identically for the Dirac family", 0.0, kInf);
  }

  // Bracket lo < r < hi with phi(lo) < target <= phi(hi).
  double lo = target;
  double hi = target;
  if (phi(target) < target) {
    while (phi(hi) < target) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12 * (1.0 + target)) throw HypothesisViolation("h_map_inverse: no upper bracket", lo, hi);
    }
  } else {
    while (phi(lo) >= target) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-300) throw HypothesisViolation("h_map_inverse: no lower bracket", lo, hi);
    }
  }

  // Injectivity surrogate: phi must increase along a scan of the bracket.
  constexpr int kScan = 32;
  double prev = phi(lo);
  for (int i = 1; i <= kScan; ++i) {
    const double r = lo + (hi - lo) * i / kScan;
    const double v = phi(r);
    if (!(v > prev)) throw HypothesisViolation("h_map_inverse: r Hbar(r) is not increasing", lo, hi);
    prev = v;
  }

  double a = lo;
  double b = hi;
  double fa = phi(a) - target;
  double fb = phi(b) - target;
  if (fb == 0.0) return b * y.unit();
  for (int it = 0; it < 200 && b - a > 1e-6 * b; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = phi(m) - target;
    if (!(fm > fa && fm < fb)) throw HypothesisViolation("h_map_inverse: r Hbar(r) is not increasing", a, b);
    if (fm == 0.0) return m * y.unit();
    (fm < 0.0 ? a : b) = m;
    (fm < 0.0 ? fa : fb) = fm;
  }
  // Newton polish, falling back to bisection whenever a step leaves (a, b).
  double r = 0.5 * (a + b);
  for (int it = 0; it < 30; ++it) {
    const double f = phi(r) - target;
    if (f == 0.0) break;
    (f < 0.0 ? a : b) = r;
    const double slope = jacobian_eigs(e, t, PlanarPoint{r, 0.0}).lambda_radial;
    if (!(slope > 0.0)) throw HypothesisViolation("h_map_inverse: nonpositive radial slope", a, b);
    double next = r - f / slope;
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    const bool done = std::abs(next - r) <= 1e-15 * r;
    r = next;
    if (done) break;
  }
  return r * y.unit();
}

HarmonicityResidual harmonicity_residual(const HEval& e, double s, double t, PlanarPoint x) {
  const FamilySpec& f = e.family();
  const double T = f.horizon_T;
  if (!(s >= 0.0 && s < t && t <= T * (1.0 + 1e-12))) throw DomainError("harmonicity_residual: need 0 <= s < t <= T");
  if (x.is_origin()) throw DomainError("harmonicity_residual: x must be nonzero");
  const Family& fam = e.evaluator();
  const double tau = t - s;
  const double rx = x.norm();
  const kernel::RadialInteraction v(f.theta, rx, tau, 1e-10);
  const double hx = fam.h(T - s, rx);
  const double cut = rx + 14.0 * std::sqrt(tau);
  auto integrate = [&](const auto& g) {
    return quad(g, 0.0, rx, 1e-10, 1e-300) + quad(g, rx, cut, 1e-10, 1e-300);
  };

  auto fh = [&](double rho) {
    if (rho <= 0.0) return 0.0;
    return rho * fam.h(T - t, rho) * (kernel::ring_heat(tau, rx, rho) + kTwoPi * v(tau, rho));
  };
  HarmonicityResidual out;
  out.h_residual = std::abs(integrate(fh) - hx) / hx;

  // Component along x-hat; the orthogonal component vanishes by symmetry.
  const double Hx = e.profile(T - s, rx) * rx;
  auto fH = [&](double rho) {
    if (rho <= 0.0) return 0.0;
    const double ring1 = std::exp(-(rx - rho) * (rx - rho) / (2.0 * tau)) * bessel::i1e(rx * rho / tau) / tau;
    return rho * fam.h(T - t, rho) / hx * e.profile(T - t, rho) * rho * ring1;
  };
  const double lhs = integrate(fH);
  out.H_residual = Hx != 0.0 ? std::abs(lhs - Hx) / std::abs(Hx) : std::abs(lhs);
  return out;
}

McEstimate moment_scaling_probe(const HEval& e, int m, double s, double t, PlanarPoint x, long n_paths,
                                std::uint64_t seed, int workers) {
  if (m != 1 && m != 2) throw DomainError("moment_scaling_probe: m must be 1 or 2");
  const double T = e.family().horizon_T;
  const DensityEval d(e.family(), e.quad());
  const auto ys = sample_transitions(d, s, t, x, n_paths, seed, workers);
  const PlanarPoint hx = h_map(e, T - s, x);
  const double scale = std::pow(t - s, m);
  std::vector<double> vals(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double d2 = (h_map(e, T - t, ys[i]) - hx).norm2();
    vals[i] = std::pow(d2, m) / scale;
  }
  return estimate(vals);
}

}  // namespace pointdiff
