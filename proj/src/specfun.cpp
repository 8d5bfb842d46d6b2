#include "pointdiff/specfun.hpp"

#include <array>

#include <cmath>
#include <numbers>

#include "pointdiff/chebyshev.hpp"
#include "pointdiff/quadrature.hpp"

namespace pointdiff {

double heat_kernel_radial(double t, double r) {
  if (!(t > 0.0)) throw DomainError("heat_kernel: t must be positive");
  return std::exp(-r * r / (2.0 * t)) / (kTwoPi * t);
}

double heat_kernel(double t, PlanarPoint x) {
  if (!(t > 0.0)) throw DomainError("heat_kernel: t must be positive");
  return std::exp(-x.norm2() / (2.0 * t)) / (kTwoPi * t);
}

namespace {

SpecialValue checked(const detail::AdaptiveOutcome& out, const QuadratureSpec& q,
                     double scale, const char* what) {
  SpecialValue v{out.value * scale, out.error * std::abs(scale)};
  if (!out.converged || !(v.err_estimate <= q.target(v.value))) {
    throw ToleranceError(std::string(what) + ": requested tolerance not reached", v);
  }
  return v;
}

// ---------------------------------------------------------------- Volterra

// int_0^inf s^power exp(s l - lgamma(s+1)) ds on a truncated range.
detail::AdaptiveOutcome volterra_moment(double l, int power, double rel_tol, int max_sub) {
  auto logf = [l, power](double s) {
    const double base = s * l - std::lgamma(s + 1.0);
    return power == 0 ? base : base + power * std::log(s);
  };
  auto f = [&](double s) { return s > 0.0 || power == 0 ? std::exp(logf(s)) : 0.0; };

  // Peak of the power-0 integrand: psi(s+1) = l, roughly s = e^l - 1/2.
  const double s_star = l > 0.0 ? std::max(0.0, std::exp(l) - 0.5) : 0.0;
  double h = s_star > 0.0 ? std::max(1.0, std::sqrt(s_star)) : 1.0 / std::max(1.0, std::abs(l));
  double peak = -kInf;
  if (s_star > 0.0 || power == 0) peak = logf(s_star);
  double s_hi = s_star + h;
  for (int it = 0; it < 200; ++it) {
    const double lv = logf(s_hi);
    peak = std::max(peak, lv);
    if (lv < peak - 45.0) break;
    h *= 2.0;
    s_hi = s_star + h;
  }
  return detail::adaptive(f, 0.0, s_hi, 0.0, rel_tol, max_sub);
}

constexpr double kTableLogLo = -745.0;
const double kTableLogHi = std::log(700.0);

struct VolterraTables {
  ChebyshevTable nu_scaled;  // nu(a) e^{-a} against l = ln a
  ChebyshevTable mu_scaled;  // a nu'(a) e^{-a}

  VolterraTables()
      : nu_scaled(
            [](double l) { return volterra::nu_log_direct(l) * std::exp(-std::exp(l)); },
            kTableLogLo, kTableLogHi, 2e-13, 1e-4),
        mu_scaled(
            [](double l) { return volterra::mu_log_direct(l) * std::exp(-std::exp(l)); },
            kTableLogLo, kTableLogHi, 2e-13, 1e-4) {}
};

const VolterraTables& tables() {
  static const VolterraTables t;
  return t;
}

}  // namespace

namespace volterra {

double nu_log_direct(double l) {
  auto out = volterra_moment(l, 0, 1e-13, 4000);
  return out.value;
}

double mu_log_direct(double l) {
  auto out = volterra_moment(l, 1, 1e-13, 4000);
  return out.value;
}

double nu_log(double l) {
  if (l < kTableLogLo || l > kTableLogHi) return nu_log_direct(l);
  return tables().nu_scaled(l) * std::exp(std::exp(l));
}

double mu_log(double l) {
  if (l < kTableLogLo || l > kTableLogHi) return mu_log_direct(l);
  return tables().mu_scaled(l) * std::exp(std::exp(l));
}

double nu(double a) {
  if (!(a >= 0.0)) throw DomainError("volterra nu: argument must be nonnegative");
  if (a == 0.0) return 0.0;
  const double l = std::log(a);
  if (l < kTableLogLo || l > kTableLogHi) return nu_log_direct(l);
  return tables().nu_scaled(l) * std::exp(a);
}

double nu_prime(double a) {
  if (!(a > 0.0)) throw DomainError("volterra nu': argument must be positive");
  const double l = std::log(a);
  if (l < kTableLogLo || l > kTableLogHi) return mu_log_direct(l) / a;
  return tables().mu_scaled(l) * std::exp(a) / a;
}

}  // namespace volterra

SpecialValue volterra_nu(double a, const QuadratureSpec& q) {
  q.validate();
  if (!(a >= 0.0)) throw DomainError("volterra_nu: a must be nonnegative");
  if (a == 0.0) return {0.0, 0.0};
  auto out = volterra_moment(std::log(a), 0, std::min(q.rel_tol, 1e-13), q.max_subdivisions);
  return checked(out, q, 1.0, "volterra_nu");
}

SpecialValue volterra_nu_prime(double a, const QuadratureSpec& q) {
  q.validate();
  if (!(a > 0.0)) throw DomainError("volterra_nu_prime: a must be positive");
  auto out = volterra_moment(std::log(a), 1, std::min(q.rel_tol, 1e-13), q.max_subdivisions);
  return checked(out, q, 1.0 / a, "volterra_nu_prime");
}

// ------------------------------------------------------ exponential integral

namespace {

// Continued fraction for e^x E1(x), valid and fast for x > 1 (modified Lentz).
double renorm_E_cf(double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h;
}

double e1_series(double x) {
  double term = 1.0;
  double sum = 0.0;
  for (int k = 1; k < 200; ++k) {
    term *= -x / k;
    const double add = term / k;
    sum += add;
    if (std::abs(add) < 1e-17 * std::abs(sum)) break;
  }
  return -std::numbers::egamma - std::log(x) - sum;
}

}  // namespace

double exp_integral_E1(double x) {
  if (!(x > 0.0)) throw DomainError("exp_integral_E1: x must be positive");
  if (x <= 1.0) return e1_series(x);
  return renorm_E_cf(x) * std::exp(-x);
}

double renorm_E(double x) {
  if (!(x > 0.0)) throw DomainError("renorm_E: x must be positive");
  if (x <= 1.0) return std::exp(x) * e1_series(x);
  return renorm_E_cf(x);
}

double renewal_integral(double x) {
  if (!(x > 0.0)) throw DomainError("renewal_integral: x must be positive");
  const double b0 = std::min(0.5 * x, 0.5);
  auto left = [x](double w) {
    const double l = -1.0 / w;
    return volterra::mu_log(l) / (w * w) * renorm_E(x - std::exp(l));
  };
  auto right = [x](double m) {
    const double u = std::exp(m);
    return volterra::nu_prime(x - u) * renorm_E(u) * u;
  };
  const double m_hi = std::log(x - b0);
  return quad(left, 0.0, -1.0 / std::log(b0), 1e-12) + quad(right, m_hi - 60.0, m_hi, 1e-12);
}

// --------------------------------------------------------------- Bessel

namespace {

struct LogScaledIntegral {
  double log_scale = -kInf;  // result = exp(log_scale) * (value +- error)
  detail::AdaptiveOutcome out;
};

// 1/2 (z/2)^nu int_lo^hi a^{-nu-1} e^{-a - z^2/(4a)} da in the variable u = ln a.
LogScaledIntegral bessel_integral(int order, double z, double lo, double hi, double rel_tol,
                                  int max_sub) {
  const double nu = order;
  const double q = 0.25 * z * z;
  auto logphi = [nu, q](double u) { return -nu * u - std::exp(u) - q * std::exp(-u); };
  const double ua = lo > 0.0 ? std::log(lo) : -kInf;
  const double ub = std::isfinite(hi) ? std::log(hi) : kInf;
  LogScaledIntegral res;
  if (!(ub > ua)) {
    res.out = {0.0, 0.0, true, 0};
    return res;
  }
  const double u_peak = std::log(0.5 * z * z / (std::sqrt(nu * nu + z * z) + nu));
  const double uc = std::clamp(u_peak, ua, ub);
  const double m = logphi(uc);
  constexpr double drop = 45.0;

  double left = ua;
  if (!(std::isfinite(ua) && logphi(ua) >= m - drop)) {
    double step = 1.0;
    while (logphi(uc - step) > m - drop) step *= 2.0;
    left = std::max(uc - step, ua);
  }
  double right = ub;
  if (!(std::isfinite(ub) && logphi(ub) >= m - drop)) {
    double step = 1.0;
    while (logphi(uc + step) > m - drop) step *= 2.0;
    right = std::min(uc + step, ub);
  }
  auto f = [&](double u) { return std::exp(logphi(u) - m); };
  res.out = detail::adaptive(f, left, right, 0.0, rel_tol, max_sub);
  res.log_scale = m + std::log(0.5) + nu * std::log(0.5 * z);
  return res;
}

void check_bessel_args(int order, double z) {
  if (order != 0 && order != 1) throw DomainError("bessel: order must be 0 or 1");
  if (!(z > 0.0)) throw DomainError("bessel: z must be positive");
}

SpecialValue finish(const LogScaledIntegral& r, const QuadratureSpec& q, const char* what) {
  if (r.out.value == 0.0) return {0.0, 0.0};
  return checked(r.out, q, std::exp(r.log_scale), what);
}

}  // namespace

namespace bessel {

double k_integral(int order, double z, double lo, double hi) {
  auto r = bessel_integral(order, z, lo, hi, 1e-13, 4000);
  if (!r.out.converged) throw ToleranceError("bessel integral did not converge", {r.out.value, r.out.error});
  return r.out.value == 0.0 ? 0.0 : r.out.value * std::exp(r.log_scale);
}

double log_k_integral(int order, double z, double lo, double hi) {
  auto r = bessel_integral(order, z, lo, hi, 1e-13, 4000);
  if (!r.out.converged) throw ToleranceError("bessel integral did not converge", {r.out.value, r.out.error});
  return r.log_scale + std::log(r.out.value);
}

namespace {
constexpr double kFullLogLo = -30.0;
const double kFullLogHi = std::log(700.0);

struct CompleteKTables {
  std::array<ChebyshevTable, 3> log_scaled;  // ln K_n(z) + z against ln z

  CompleteKTables() {
    for (int n = 0; n < 3; ++n) {
      log_scaled[n] = ChebyshevTable(
          [n](double l) {
            const double z = std::exp(l);
            return log_k_integral(n, z, 0.0, kInf) + z;
          },
          kFullLogLo, kFullLogHi, 1e-13, 1e-4, 1.0);
    }
  }
};
}  // namespace

double k_full(int order, double z) {
  if (order < 0 || order > 2) throw DomainError("bessel: order must be 0, 1 or 2");
  if (!(z > 0.0)) throw DomainError("bessel: z must be positive");
  static const CompleteKTables tables;
  const double l = std::log(z);
  if (l < kFullLogLo || l > kFullLogHi) return k_integral(order, z, 0.0, kInf);
  return std::exp(tables.log_scaled[order](l) - z);
}

namespace {
// e^{-x} I_n(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k(n) / x^k for large x.
double ine_asymptotic(int n, double x) {
  const double mu = 4.0 * n * n;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (k * 8.0 * x);
    sum += term;
    if (std::abs(term) < 1e-17) break;
  }
  return sum / std::sqrt(kTwoPi * x);
}
}  // namespace

double i0e(double x) {
  x = std::abs(x);
  if (x > 700.0) return ine_asymptotic(0, x);
  return std::cyl_bessel_i(0.0, x) * std::exp(-x);
}

double i1e(double x) {
  if (x < 0.0) return -i1e(-x);
  if (x > 700.0) return ine_asymptotic(1, x);
  return std::cyl_bessel_i(1.0, x) * std::exp(-x);
}

}  // namespace bessel

SpecialValue bessel_k(int order, double z, const QuadratureSpec& q) {
  q.validate();
  check_bessel_args(order, z);
  auto r = bessel_integral(order, z, 0.0, kInf, std::min(q.rel_tol, 1e-13), q.max_subdivisions);
  return finish(r, q, "bessel_k");
}

SpecialValue incomplete_bessel_k(int order, double z, double y, const QuadratureSpec& q) {
  q.validate();
  check_bessel_args(order, z);
  if (!(y >= 0.0)) throw DomainError("incomplete_bessel_k: y must be nonnegative");
  auto r = bessel_integral(order, z, y, kInf, std::min(q.rel_tol, 1e-13), q.max_subdivisions);
  return finish(r, q, "incomplete_bessel_k");
}

SpecialValue incomplete_bessel_k_lower(int order, double z, double y, const QuadratureSpec& q) {
  q.validate();
  check_bessel_args(order, z);
  if (!(y >= 0.0)) throw DomainError("incomplete_bessel_k_lower: y must be nonnegative");
  auto r = bessel_integral(order, z, 0.0, y, std::min(q.rel_tol, 1e-13), q.max_subdivisions);
  return finish(r, q, "incomplete_bessel_k_lower");
}

}  // namespace pointdiff
