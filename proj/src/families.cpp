#include "pointdiff/families.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "pointdiff/quadrature.hpp"
#include "pointdiff/specfun.hpp"

namespace pointdiff {

// ------------------------------------------------------------ FamilySpec

FamilySpec FamilySpec::gst(double theta, double T) { return {FamilyKind::gst, theta, T, 0.0, {}}; }
FamilySpec FamilySpec::leb(double theta, double T) { return {FamilyKind::leb, theta, T, 0.0, {}}; }
FamilySpec FamilySpec::dir(double theta, double T, double eps) {
  return {FamilyKind::dir, theta, T, eps, {}};
}
FamilySpec FamilySpec::gau(double theta, double T, double alpha) {
  return {FamilyKind::gau, theta, T, alpha, {}};
}

namespace {

double parse_number(const std::string& s, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DomainError("family selector: bad number in '" + context + "'");
  }
  if (used != s.size()) throw DomainError("family selector: bad number in '" + context + "'");
  return v;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FamilySpec FamilySpec::parse(const std::string& text, double theta, double T) {
  FamilySpec out;
  if (text == "gst") {
    out = gst(theta, T);
  } else if (text == "leb") {
    out = leb(theta, T);
  } else if (text.rfind("dir:eps=", 0) == 0) {
    out = dir(theta, T, parse_number(text.substr(8), text));
  } else if (text.rfind("gau:alpha=", 0) == 0) {
    out = gau(theta, T, parse_number(text.substr(10), text));
  } else {
    throw DomainError("unknown family selector '" + text +
                      "' (expected gst, leb, dir:eps=<f> or gau:alpha=<f>)");
  }
  out.validate();
  return out;
}

std::string FamilySpec::selector() const {
  switch (kind) {
    case FamilyKind::gst: return "gst";
    case FamilyKind::leb: return "leb";
    case FamilyKind::dir: return "dir:eps=" + format_number(param);
    case FamilyKind::gau: return "gau:alpha=" + format_number(param);
  }
  return "?";
}

void FamilySpec::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("family: theta must be positive");
  if (!(horizon_T > 0.0) || !std::isfinite(horizon_T)) throw DomainError("family: T must be positive");
  if (kind == FamilyKind::dir && !(param > 0.0 && param < horizon_T)) {
    if (param == 0.0) throw DivergenceError("Dirac family: the time kernel diverges without a cutoff");
    throw DomainError("Dirac family: cutoff must lie in (0, T)");
  }
  if (kind == FamilyKind::gau && !(param > 0.0)) throw DomainError("Gaussian family: alpha must be positive");
  quad.validate();
}

// ------------------------------------------------------ time kernels

double regularized_kernel_direct(double theta, double b, double c) {
  if (b <= 0.0) return 0.0;
  const double half = 0.5 * b;
  const double l_half = std::log(theta * half);
  // u = (b/2) e^{-w}, w = s / (1 - s): theta nu'(theta u) du = mu(theta u) dw.
  auto near = [&](double s) {
    if (s >= 1.0) return 0.0;
    const double w = s / (1.0 - s);
    const double u = half * std::exp(-w);
    return volterra::mu_log(l_half - w) / (b - u + c) / ((1.0 - s) * (1.0 - s));
  };
  auto far = [&](double u) { return volterra::mu_log(std::log(theta * u)) / u / (b - u + c); };
  return quad(near, 0.0, 1.0, 1e-13) + quad(far, half, b, 1e-13);
}

namespace {

constexpr double kRegLogLo = -700.0;
constexpr int kMaxProfiles = 64;
constexpr double kProfileRelTol = 1e-11;

// int_0^tp g_s(r) M(tp - s) ds, or its r-derivative when `deriv` is set.
template <class M>
double time_convolution(double tp, double r, const M& m, bool deriv, double rel_tol) {
  if (tp <= 0.0) return 0.0;
  const double half = 0.5 * tp;
  const double eta_hi = std::log(half);
  const double r2 = r * r;
  const double eta_lo = std::min(std::log(r2 / 100.0), eta_hi - 3.0);
  auto f1 = [&](double eta) {
    const double s = std::exp(eta);
    const double v = std::exp(-r2 / (2.0 * s)) / kTwoPi * m(tp - s);
    return deriv ? -v * r / s : v;
  };
  auto f2 = [&](double w) {
    const double b = half * std::exp(-w);
    const double s = tp - b;
    const double v = std::exp(-r2 / (2.0 * s)) / (kTwoPi * s) * m(b) * b;
    return deriv ? -v * r / s : v;
  };
  return quad(f1, eta_lo, eta_hi, rel_tol, 1e-300) + quad(f2, 0.0, 40.0, rel_tol, 1e-300);
}

}  // namespace

Family::Family(FamilySpec spec) : spec_(spec) {
  spec_.validate();
  if (spec_.kind == FamilyKind::dir || spec_.kind == FamilyKind::gau) {
    reg_lo_ = kRegLogLo;
    reg_hi_ = std::log(2.0 * spec_.horizon_T);
    const double theta = spec_.theta;
    const double c = spec_.param;
    reg_table_ = ChebyshevTable(
        [theta, c](double l) { return regularized_kernel_direct(theta, std::exp(l), c); }, reg_lo_,
        reg_hi_, 1e-12, 1e-5);
  }
}

std::shared_ptr<const Family> Family::get(const FamilySpec& spec) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const Family>> cache;
  const std::string key = spec.selector() + "|" + format_number(spec.theta) + "|" +
                          format_number(spec.horizon_T);
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[key];
  if (!slot) slot = std::make_shared<const Family>(spec);
  return slot;
}

double Family::regularized(double b) const {
  if (b <= 0.0) return 0.0;
  const double l = std::log(b);
  if (l >= reg_lo_ && l <= reg_hi_) return reg_table_(l);
  return regularized_kernel_direct(spec_.theta, b, spec_.param);
}

double Family::time_kernel(double a) const {
  if (a <= 0.0) return 0.0;
  switch (spec_.kind) {
    case FamilyKind::gst: return kPi * std::exp(spec_.theta * a);
    case FamilyKind::leb: return kTwoPi * volterra::nu(spec_.theta * a);
    case FamilyKind::dir: return a <= spec_.param ? 0.0 : regularized(a - spec_.param);
    case FamilyKind::gau: return regularized(a);
  }
  return 0.0;
}

double Family::shifted_kernel(double b) const { return time_kernel(b + time_shift()); }

double Family::V_direct(double t, double r) const {
  auto m = [this](double b) { return shifted_kernel(b); };
  return time_convolution(t - time_shift(), r, m, false, 1e-12);
}

double Family::V_dr_direct(double t, double r) const {
  auto m = [this](double b) { return shifted_kernel(b); };
  return time_convolution(t - time_shift(), r, m, true, 1e-12);
}

const Family::Profile* Family::profile(double t) const {
  const double tp = t - time_shift();
  if (tp <= 0.0) return nullptr;
  std::lock_guard<std::mutex> lock(mu_);
  auto it = profiles_.find(t);
  if (it != profiles_.end()) return it->second.get();
  if (static_cast<int>(profiles_.size()) >= kMaxProfiles) return nullptr;
  auto p = std::make_shared<Profile>();
  p->u_lo = std::log(1e-10);
  p->u_hi = std::log(30.0 * std::sqrt(tp));
  p->log_v = ChebyshevTable(
      [&](double u) {
        const double r = std::exp(u);
        return std::log(V_direct(t, r)) + r * r / (2.0 * tp);
      },
      p->u_lo, p->u_hi, kProfileRelTol, 1e-6, 1.0);
  p->slope = ChebyshevTable(
      [&](double u) {
        const double r = std::exp(u);
        return -r * V_dr_direct(t, r) / V_direct(t, r) - r * r / tp;
      },
      p->u_lo, p->u_hi, kProfileRelTol, 1e-6, 1.0);
  profiles_[t] = p;
  return p.get();
}

double Family::V(double t, double r) const {
  if (!(r > 0.0)) return kInf;
  if (t <= time_shift()) return 0.0;
  if (spec_.kind == FamilyKind::gst) {
    const double c = std::sqrt(2.0 * spec_.theta);
    return std::exp(spec_.theta * t) * bessel::k_integral(0, c * r, 0.0, spec_.theta * t);
  }
  const double tp = t - time_shift();
  const double u = std::log(r);
  if (const Profile* p = profile(t); p && u >= p->u_lo && u <= p->u_hi) {
    return std::exp(p->log_v(u) - r * r / (2.0 * tp));
  }
  return V_direct(t, r);
}

double Family::V_dr(double t, double r) const {
  if (t <= time_shift()) return 0.0;
  if (spec_.kind == FamilyKind::gst) {
    const double c = std::sqrt(2.0 * spec_.theta);
    return -c * std::exp(spec_.theta * t) * bessel::k_integral(1, c * r, 0.0, spec_.theta * t);
  }
  const double tp = t - time_shift();
  const double u = std::log(r);
  if (const Profile* p = profile(t); p && u >= p->u_lo && u <= p->u_hi) {
    const double v = std::exp(p->log_v(u) - r * r / (2.0 * tp));
    return -v * (p->slope(u) + r * r / tp) / r;
  }
  return V_dr_direct(t, r);
}

double Family::base(double t, double r) const {
  switch (spec_.kind) {
    case FamilyKind::gst: {
      const double c = std::sqrt(2.0 * spec_.theta);
      return std::exp(spec_.theta * t) * bessel::k_integral(0, c * r, spec_.theta * t, kInf);
    }
    case FamilyKind::leb: return 1.0;
    case FamilyKind::dir: return t > 0.0 ? heat_kernel_radial(t, r) : (r > 0.0 ? 0.0 : kInf);
    case FamilyKind::gau: return heat_kernel_radial(t + spec_.param, r);
  }
  return 0.0;
}

double Family::base_dr(double t, double r) const {
  switch (spec_.kind) {
    case FamilyKind::gst: {
      const double c = std::sqrt(2.0 * spec_.theta);
      return -c * std::exp(spec_.theta * t) * bessel::k_integral(1, c * r, spec_.theta * t, kInf);
    }
    case FamilyKind::leb: return 0.0;
    case FamilyKind::dir: return t > 0.0 ? -r / t * heat_kernel_radial(t, r) : 0.0;
    case FamilyKind::gau: {
      const double w = t + spec_.param;
      return -r / w * heat_kernel_radial(w, r);
    }
  }
  return 0.0;
}

double Family::base_drr(double t, double r) const {
  switch (spec_.kind) {
    case FamilyKind::gst: {
      const double c = std::sqrt(2.0 * spec_.theta);
      const double z = c * r;
      const double y = spec_.theta * t;
      const double k1 = bessel::k_integral(1, z, y, kInf);
      const double k2 = bessel::k_integral(2, z, y, kInf);
      return -c * c * std::exp(spec_.theta * t) * (k1 / z - k2);
    }
    case FamilyKind::leb: return 0.0;
    case FamilyKind::dir:
    case FamilyKind::gau: {
      const double w = spec_.kind == FamilyKind::dir ? t : t + spec_.param;
      if (w <= 0.0) return 0.0;
      return heat_kernel_radial(w, r) * (r * r / (w * w) - 1.0 / w);
    }
  }
  return 0.0;
}

double Family::h(double t, double r) const {
  if (!(r > 0.0)) return kInf;
  if (spec_.kind == FamilyKind::gst) {
    const double c = std::sqrt(2.0 * spec_.theta);
    return std::exp(spec_.theta * t) * bessel::k_full(0, c * r);
  }
  return base(t, r) + V(t, r);
}

double Family::h_dr(double t, double r) const {
  if (spec_.kind == FamilyKind::gst) {
    const double c = std::sqrt(2.0 * spec_.theta);
    return -c * std::exp(spec_.theta * t) * bessel::k_full(1, c * r);
  }
  return base_dr(t, r) + V_dr(t, r);
}

// ---------------------------------------------------- free operations

namespace {

void check_time(const FamilySpec& f, double t, bool allow_zero) {
  if (!(t >= 0.0) || t > f.horizon_T * (1.0 + 1e-12) || (!allow_zero && t == 0.0)) {
    throw DomainError("time outside the family horizon");
  }
}

}  // namespace

double h_eval(const FamilySpec& f, double t, PlanarPoint x) {
  check_time(f, t, true);
  const auto fam = Family::get(f);
  const double r = x.norm();
  if (r == 0.0) {
    if (f.kind == FamilyKind::gau && t == 0.0) return heat_kernel_radial(f.param, 0.0);
    if (f.kind == FamilyKind::leb && t == 0.0) return 1.0;
    return kInf;
  }
  return fam->h(t, r);
}

double volterra_V(const FamilySpec& f, double t, PlanarPoint x) {
  check_time(f, t, false);
  if (x.is_origin()) throw DivergenceError("volterra_V: infinite at the origin");
  return Family::get(f)->V(t, x.norm());
}

DriftVector drift_eval(const FamilySpec& f, double t, PlanarPoint x) {
  check_time(f, t, false);
  if (x.is_origin()) throw DivergenceError("drift is singular at the origin");
  const auto fam = Family::get(f);
  const double r = x.norm();
  const double b = fam->h_dr(t, r) / fam->h(t, r);
  return {b * x.unit(), b};
}

double base_conv(const FamilySpec& f, double t, PlanarPoint x) {
  if (!(t >= 0.0)) throw DomainError("base_conv: t must be nonnegative");
  f.validate();
  const double r = x.norm();
  if (r == 0.0) {
    if (f.kind == FamilyKind::leb) return 1.0;
    if (f.kind == FamilyKind::gau) return heat_kernel_radial(t + f.param, 0.0);
    if (f.kind == FamilyKind::dir && t > 0.0) return heat_kernel_radial(t, 0.0);
    if (f.kind == FamilyKind::gst && t > 0.0) {
      // (h_0 * g_t)(0) = e^{theta t} int_{theta t}^inf e^{-a} / (2a) da.
      return std::exp(f.theta * t) * 0.5 * exp_integral_E1(f.theta * t);
    }
    return kInf;
  }
  return Family::get(f)->base(t, r);
}

// ----------------------------------------------------- CompositeFamily

void CompositeFamily::add(double weight, const FamilySpec& spec) {
  if (!(weight > 0.0)) throw DomainError("composite family: weights must be positive");
  if (!parts_.empty()) {
    const auto& first = parts_.front().second->spec();
    if (first.theta != spec.theta || first.horizon_T != spec.horizon_T) {
      throw DomainError("composite family: components must share theta and T");
    }
  }
  parts_.emplace_back(weight, Family::get(spec));
}

double CompositeFamily::h(double t, PlanarPoint x) const {
  double s = 0.0;
  for (const auto& [w, f] : parts_) s += w * h_eval(f->spec(), t, x);
  return s;
}

double CompositeFamily::V(double t, PlanarPoint x) const {
  double s = 0.0;
  for (const auto& [w, f] : parts_) s += w * volterra_V(f->spec(), t, x);
  return s;
}

double CompositeFamily::base(double t, PlanarPoint x) const {
  double s = 0.0;
  for (const auto& [w, f] : parts_) s += w * base_conv(f->spec(), t, x);
  return s;
}

DriftVector CompositeFamily::drift(double t, PlanarPoint x) const {
  if (x.is_origin()) throw DivergenceError("drift is singular at the origin");
  const double r = x.norm();
  double num = 0.0;
  double den = 0.0;
  for (const auto& [w, f] : parts_) {
    num += w * f->h_dr(t, r);
    den += w * f->h(t, r);
  }
  const double b = num / den;
  return {b * x.unit(), b};
}

}  // namespace pointdiff
