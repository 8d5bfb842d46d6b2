#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pointdiff {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A point of the plane. All densities in the library are radial in at
/// least one argument, so the polar helpers are used everywhere.
struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
  double angle() const { return std::atan2(y, x); }
  bool is_origin() const { return x == 0.0 && y == 0.0; }

  /// Unit vector along the point; (1, 0) at the origin.
  PlanarPoint unit() const {
    const double r = norm();
    return r > 0.0 ? PlanarPoint{x / r, y / r} : PlanarPoint{1.0, 0.0};
  }

  static PlanarPoint polar(double r, double phi) {
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  friend PlanarPoint operator+(PlanarPoint a, PlanarPoint b) { return {a.x + b.x, a.y + b.y}; }
  friend PlanarPoint operator-(PlanarPoint a, PlanarPoint b) { return {a.x - b.x, a.y - b.y}; }
  friend PlanarPoint operator*(double s, PlanarPoint a) { return {s * a.x, s * a.y}; }
  friend PlanarPoint operator*(PlanarPoint a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(PlanarPoint, PlanarPoint) = default;
};

inline double dot(PlanarPoint a, PlanarPoint b) { return a.x * b.x + a.y * b.y; }
inline double cross(PlanarPoint a, PlanarPoint b) { return a.x * b.y - a.y * b.x; }

/// Endpoint handling applied by `integrate`.
enum class EndpointRule {
  none,              ///< finite [a, b], integrated as is
  log_substitution,  ///< x = a + (b - a) e^{-w}: absorbs 1/(x log^2 x)-type left endpoints
  exp_tail,          ///< [a, inf) mapped onto [0, 1)
};

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;
  EndpointRule endpoint_rule = EndpointRule::none;

  void validate() const;
  /// Same rule with both tolerances scaled by `factor`.
  QuadratureSpec scaled(double factor) const;
  /// Accepted error for a result of magnitude |value|.
  double target(double value) const { return std::max(abs_tol, rel_tol * std::abs(value)); }
};

/// A value together with the truncation error reported by the scheme.
struct SpecialValue {
  double value = 0.0;
  double err_estimate = 0.0;
};

// ---------------------------------------------------------------- errors

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quadrature failed to reach the requested tolerance; the best estimate is kept.
class ToleranceError : public std::runtime_error {
 public:
  ToleranceError(const std::string& what, SpecialValue best)
      : std::runtime_error(what), best_(best) {}
  SpecialValue best() const { return best_; }

 private:
  SpecialValue best_;
};

/// The requested quantity is infinite (e.g. the interaction term with an
/// argument at the origin, or the unregularized Dirac time kernel).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// r -> r * H_t(r) was found non-monotone on an inversion bracket.
class HypothesisViolation : public std::runtime_error {
 public:
  HypothesisViolation(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo_(lo), hi_(hi) {}
  double bracket_lo() const { return lo_; }
  double bracket_hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// Sampling engine failure (envelope violation that survived a resweep,
/// stuck step controller, unsupported request).
class SamplerError : public std::runtime_error {
 public:
  explicit SamplerError(const std::string& what) : std::runtime_error(what) {}
  SamplerError(const std::string& what, PlanarPoint state, double time)
      : std::runtime_error(what), state_(state), time_(time), has_state_(true) {}
  bool has_state() const { return has_state_; }
  PlanarPoint state() const { return state_; }
  double time() const { return time_; }

 private:
  PlanarPoint state_{};
  double time_ = 0.0;
  bool has_state_ = false;
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw DomainError(msg);
}

}  // namespace pointdiff
