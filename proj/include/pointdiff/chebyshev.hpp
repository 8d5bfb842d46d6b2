#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace pointdiff {

/// Piecewise Chebyshev interpolant on [lo, hi]. Panels are bisected until
/// the trailing coefficients fall below `rel_tol` times the panel scale, so
/// the fit is accurate relative to the local magnitude of the function.
/// Panels whose values all lie below kNegligible are accepted as they are.
class ChebyshevTable {
 public:
  static constexpr int kOrder = 20;
  static constexpr double kNegligible = 1e-250;

  ChebyshevTable() = default;

  /// `scale_floor` turns the relative criterion into an absolute one for
  /// panels where |f| stays below it (useful for logarithms near zero).
  ChebyshevTable(const std::function<double(double)>& f, double lo, double hi, double rel_tol,
                 double min_width = 0.0, double scale_floor = 0.0, int max_panels = 20000)
      : lo_(lo), hi_(hi) {
    if (!(hi > lo)) throw std::invalid_argument("ChebyshevTable: empty range");
    fit(f, lo, hi, rel_tol, min_width, scale_floor, max_panels);
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool empty() const { return coeffs_.empty(); }
  std::size_t panels() const { return coeffs_.size(); }
  bool contains(double x) const { return x >= lo_ && x <= hi_; }

  double operator()(double x) const {
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    std::size_t i = it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
    if (i >= coeffs_.size()) i = coeffs_.size() - 1;
    const double a = breaks_[i];
    const double b = breaks_[i + 1];
    const double u = (2.0 * x - a - b) / (b - a);
    return clenshaw(coeffs_[i], u);
  }

 private:
  using Coeffs = std::array<double, kOrder>;

  static double clenshaw(const Coeffs& c, double u) {
    double b1 = 0.0;
    double b2 = 0.0;
    for (int j = kOrder - 1; j >= 1; --j) {
      const double t = 2.0 * u * b1 - b2 + c[j];
      b2 = b1;
      b1 = t;
    }
    return u * b1 - b2 + c[0];
  }

  static Coeffs coefficients(const std::function<double(double)>& f, double a, double b,
                             double& scale) {
    std::array<double, kOrder> vals{};
    scale = 0.0;
    for (int k = 0; k < kOrder; ++k) {
      const double th = M_PI * (k + 0.5) / kOrder;
      const double x = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(th);
      vals[k] = f(x);
      scale = std::max(scale, std::abs(vals[k]));
    }
    Coeffs c{};
    for (int j = 0; j < kOrder; ++j) {
      double s = 0.0;
      for (int k = 0; k < kOrder; ++k) s += vals[k] * std::cos(M_PI * j * (k + 0.5) / kOrder);
      c[j] = 2.0 * s / kOrder;
    }
    c[0] *= 0.5;
    return c;
  }

  void fit(const std::function<double(double)>& f, double lo, double hi, double rel_tol,
           double min_width, double scale_floor, int max_panels) {
    // Depth-first so that breaks_ comes out sorted.
    struct Pending {
      double a;
      double b;
    };
    std::vector<Pending> stack{{lo, hi}};
    breaks_.push_back(lo);
    while (!stack.empty()) {
      Pending p = stack.back();
      stack.pop_back();
      double scale = 0.0;
      Coeffs c = coefficients(f, p.a, p.b, scale);
      const double tail = std::abs(c[kOrder - 1]) + std::abs(c[kOrder - 2]) + std::abs(c[kOrder - 3]);
      const bool good = tail <= rel_tol * std::max(scale, scale_floor) || scale < kNegligible;
      const bool can_split = (p.b - p.a) > min_width &&
                             static_cast<int>(coeffs_.size() + stack.size()) < max_panels;
      if (good || !can_split) {
        if (!good) throw std::runtime_error("ChebyshevTable: panel budget exhausted");
        coeffs_.push_back(c);
        breaks_.push_back(p.b);
      } else {
        const double m = 0.5 * (p.a + p.b);
        stack.push_back({m, p.b});
        stack.push_back({p.a, m});
      }
    }
  }

  double lo_ = 0.0;
  double hi_ = 0.0;
  std::vector<double> breaks_;
  std::vector<Coeffs> coeffs_;
};

}  // namespace pointdiff
