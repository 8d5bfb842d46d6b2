#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "pointdiff/chebyshev.hpp"
#include "pointdiff/common.hpp"

namespace pointdiff {

enum class FamilyKind { gst, leb, dir, gau };

/// Selects a driving family. `param` is the Dirac cutoff for `dir` and the
/// Gaussian width alpha for `gau`; it is unused otherwise.
struct FamilySpec {
  FamilyKind kind = FamilyKind::gst;
  double theta = 1.0;
  double horizon_T = 1.0;
  double param = 0.0;
  QuadratureSpec quad{};

  static FamilySpec gst(double theta, double T);
  static FamilySpec leb(double theta, double T);
  static FamilySpec dir(double theta, double T, double eps);
  static FamilySpec gau(double theta, double T, double alpha);

  /// Parse `gst`, `leb`, `dir:eps=<f>` or `gau:alpha=<f>`.
  static FamilySpec parse(const std::string& text, double theta, double T);
  /// Canonical selector string (inverse of parse).
  std::string selector() const;

  void validate() const;
};

struct DriftVector {
  PlanarPoint components;
  double radial_part = 0.0;
};

/// Immutable evaluator for one family. Every family is written as
///   h_t(r) = B_t(r) + V_t(r),   V_t(r) = int_0^{t-d} g_s(r) M(t - d - s) ds,
/// with B_t = h_0 * g_t in closed form, d the time shift (the Dirac cutoff,
/// else 0) and M the family's time kernel. All radial functions take r > 0.
class Family {
 public:
  explicit Family(FamilySpec spec);

  /// Shared evaluator for `spec` (built once per distinct spec).
  static std::shared_ptr<const Family> get(const FamilySpec& spec);

  const FamilySpec& spec() const { return spec_; }
  double theta() const { return spec_.theta; }
  double horizon() const { return spec_.horizon_T; }

  double h(double t, double r) const;
  double h_dr(double t, double r) const;
  double V(double t, double r) const;
  double V_dr(double t, double r) const;
  /// B_t(r) = (h_0 * g_t)(r) and its first two radial derivatives.
  double base(double t, double r) const;
  double base_dr(double t, double r) const;
  double base_drr(double t, double r) const;

  /// Time kernel N(a) with V_t(r) = int_0^t g_s(r) N(t - s) ds.
  double time_kernel(double a) const;
  double time_shift() const { return spec_.kind == FamilyKind::dir ? spec_.param : 0.0; }

  /// Untabulated V and dV/dr (reference path).
  double V_direct(double t, double r) const;
  double V_dr_direct(double t, double r) const;

 private:
  struct Profile {
    double u_lo;
    double u_hi;
    ChebyshevTable log_v;   // ln V + r^2/(2t) against u = ln r
    ChebyshevTable slope;   // -r V_r / V - r^2 / t
  };

  double shifted_kernel(double b) const;  // M(b) = N(b + d)
  double regularized(double b) const;     // int_0^b theta nu'(theta u) / (b - u + c) du
  const Profile* profile(double t) const;

  FamilySpec spec_;
  ChebyshevTable reg_table_;  // regularized(b) against ln b for dir/gau
  double reg_lo_ = 0.0;
  double reg_hi_ = 0.0;

  mutable std::mutex mu_;
  mutable std::map<double, std::shared_ptr<const Profile>> profiles_;
};

/// Regularized kernel int_0^b theta nu'(theta u) / (b - u + c) du, direct quadrature.
double regularized_kernel_direct(double theta, double b, double c);

// ------------------------------------------------------ free operations

/// h_t(x); +inf at the origin for t > 0.
double h_eval(const FamilySpec& f, double t, PlanarPoint x);
double volterra_V(const FamilySpec& f, double t, PlanarPoint x);
/// grad log h_t(x); DivergenceError at the origin.
DriftVector drift_eval(const FamilySpec& f, double t, PlanarPoint x);
/// (h_0 * g_t)(x).
double base_conv(const FamilySpec& f, double t, PlanarPoint x);

/// Positive combination sum_i w_i h^(i) of families sharing theta and T.
class CompositeFamily {
 public:
  void add(double weight, const FamilySpec& spec);
  double h(double t, PlanarPoint x) const;
  double V(double t, PlanarPoint x) const;
  double base(double t, PlanarPoint x) const;
  DriftVector drift(double t, PlanarPoint x) const;
  std::size_t size() const { return parts_.size(); }

 private:
  std::vector<std::pair<double, std::shared_ptr<const Family>>> parts_;
};

}  // namespace pointdiff
