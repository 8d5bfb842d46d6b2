#pragma once

// Globally adaptive Gauss-Kronrod (10/21 point) quadrature.
//
// The integrator keeps every subinterval in a max-heap ordered by local
// error and always bisects the worst one. Tolerances follow QuadratureSpec:
// the run stops when the summed error estimate drops below
// max(abs_tol, rel_tol * |I|). Exhausting max_subdivisions raises
// ToleranceError carrying the best estimate.

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "pointdiff/common.hpp"

namespace pointdiff {

namespace detail {

inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208931966148, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk21(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resk = fc * kWgk[10];
  double resg = 0.0;
  double resabs = std::abs(resk);
  std::array<double, 10> f1{};
  std::array<double, 10> f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double s = f1[j] + f2[j];
    resk += kWgk[j] * s;
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * s;
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - mean);
  for (int j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  }
  const double ah = std::abs(half);
  resk *= half;
  resabs *= ah;
  resasc *= ah;
  double err = std::abs((resk - resg * half));
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return {a, b, resk, err};
}

struct AdaptiveOutcome {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  int subdivisions = 0;
};

template <class F>
AdaptiveOutcome adaptive(F& f, double a, double b, double abs_tol, double rel_tol,
                         int max_subdivisions) {
  std::priority_queue<Segment> heap;
  Segment first = gk21(f, a, b);
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  int n = 1;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  // Segments too short to split are retired here; their error still counts.
  double frozen_err = 0.0;
  while (true) {
    const double goal = std::max(abs_tol, rel_tol * std::abs(total));
    if (total_err <= goal) return {total, total_err, true, n};
    if (heap.empty() || n >= max_subdivisions) break;
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const double scale = std::max(std::abs(worst.a), std::abs(worst.b));
    if (!(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 100.0 * eps * scale) {
      frozen_err += worst.error;
      if (frozen_err > goal) break;
      continue;
    }
    const Segment left = gk21(f, worst.a, mid);
    const Segment right = gk21(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++n;
  }
  const double goal = std::max(abs_tol, rel_tol * std::abs(total));
  return {total, total_err, total_err <= goal, n};
}

}  // namespace detail

/// Integrate f over [a, b] with the transformation selected by
/// `spec.endpoint_rule`. For `exp_tail` the upper limit is ignored and the
/// range is [a, inf). Throws ToleranceError on failure.
template <class F>
SpecialValue integrate(F&& f, double a, double b, const QuadratureSpec& spec) {
  detail::AdaptiveOutcome out;
  switch (spec.endpoint_rule) {
    case EndpointRule::none: {
      out = detail::adaptive(f, a, b, spec.abs_tol, spec.rel_tol, spec.max_subdivisions);
      break;
    }
    case EndpointRule::log_substitution: {
      // x = a + L e^{-w}, w = s / (1 - s), s in [0, 1).
      const double len = b - a;
      auto g = [&](double s) {
        if (s >= 1.0) return 0.0;
        const double w = s / (1.0 - s);
        const double ew = std::exp(-w);
        if (ew == 0.0) return 0.0;
        const double jac = len * ew / ((1.0 - s) * (1.0 - s));
        return f(a + len * ew) * jac;
      };
      out = detail::adaptive(g, 0.0, 1.0, spec.abs_tol, spec.rel_tol, spec.max_subdivisions);
      break;
    }
    case EndpointRule::exp_tail: {
      auto g = [&](double s) {
        if (s >= 1.0) return 0.0;
        const double x = a + s / (1.0 - s);
        return f(x) / ((1.0 - s) * (1.0 - s));
      };
      out = detail::adaptive(g, 0.0, 1.0, spec.abs_tol, spec.rel_tol, spec.max_subdivisions);
      break;
    }
  }
  if (!out.converged) {
    throw ToleranceError("quadrature did not converge within " +
                             std::to_string(spec.max_subdivisions) + " subdivisions",
                         {out.value, out.error});
  }
  return {out.value, out.error};
}

/// Plain finite-interval integration with explicit tolerances; the common
/// case inside the library.
template <class F>
double quad(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
            int max_subdivisions = 4000) {
  if (a == b) return 0.0;
  auto out = detail::adaptive(f, a, b, abs_tol, rel_tol, max_subdivisions);
  if (!out.converged) {
    throw ToleranceError("internal quadrature did not converge", {out.value, out.error});
  }
  return out.value;
}

}  // namespace pointdiff
