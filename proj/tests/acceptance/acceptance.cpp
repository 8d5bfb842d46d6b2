// Acceptance run: every criterion prints one PASS/FAIL line with the
// measured quantity, its target and the wall time. Exit status is nonzero
// if any criterion fails or overruns its time budget.

#include <boost/math/special_functions/bessel.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../support/radial_law.hpp"
#include "pointdiff/doob.hpp"
#include "pointdiff/hmap.hpp"
#include "pointdiff/kernel.hpp"
#include "pointdiff/quadrature.hpp"
#include "pointdiff/sampler.hpp"
#include "pointdiff/specfun.hpp"

using namespace pointdiff;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (detail.tellp() > 0) detail << "; ";
    detail << what << (ok ? "" : " [x]");
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

const double kC = std::sqrt(2.0);

// ---------------------------------------------------------------- criteria

void renewal(Outcome& o) {
  for (double x : {0.25, 1.0, 4.0}) {
    const double res = std::abs(renewal_integral(x) - std::exp(x)) / std::exp(x);
    o.require(res < 1e-6, "x=" + fmt(x) + " rel " + fmt(res) + " < 1e-6");
  }
}

void semigroup(Outcome& o) {
  const KernelParams unit{1.0, {}};
  const std::vector<std::pair<PlanarPoint, PlanarPoint>> pairs{{{1, 0}, {0, 1}}, {{2, 0}, {2, 0}}, {{0.3, 0}, {-1, 0.5}}};
  for (const auto& [x, y] : pairs) {
    const double r = semigroup_residual(unit, 0.5, 1.0, x, y);
    o.require(r < 5e-4, "theta=1 " + fmt(r) + " < 5e-4");
  }
  const double weak = semigroup_residual({1e-8, {}}, 0.5, 1.0, {1, 0}, {0, 1});
  o.require(weak < 1e-6, "theta=1e-8 " + fmt(weak) + " < 1e-6");
}

void eigenrelation(Outcome& o) {
  for (double theta : {1.0, 2.0}) {
    for (double t : {0.25, 0.5}) {
      const double r = gst_eigen_residual({theta, {}}, t, {1, 0});
      o.require(r < 1e-5, "theta=" + fmt(theta) + " t=" + fmt(t) + " " + fmt(r) + " < 1e-5");
    }
  }
}

void normalization(Outcome& o) {
  for (const auto& f : {FamilySpec::gst(1.0, 1.0), FamilySpec::leb(1.0, 1.0)}) {
    const double r = normalization_residual(DensityEval(f), 0.0, 0.5, {1, 0});
    o.require(r < 1e-4, f.selector() + " " + fmt(r) + " < 1e-4");
  }
}

void hit_normalization(Outcome& o) {
  for (const auto& f : {FamilySpec::gst(1.0, 1.0), FamilySpec::leb(1.0, 1.0), FamilySpec::gau(1.0, 1.0, 1.0)}) {
    const double r = std::abs(HitLaw(DensityEval(f), {1, 0}).total_mass() - 1.0);
    o.require(r < 1e-5, f.selector() + " " + fmt(r) + " < 1e-5");
  }
}

void gig_sampling(Outcome& o) {
  const DensityEval gst(FamilySpec::gst(1.0, 1.0));
  const HitLaw law(gst, {1, 0});
  std::vector<double> taus;
  long trials = 0;
  while (taus.size() < 200000) {
    Rng rng(2024, static_cast<std::uint64_t>(trials++));
    if (auto tau = sample_hit_time(law, rng)) taus.push_back(*tau);
  }
  // Reference: closed-form survival and the GIG density (2t)^{-1} e^{-t - 1/(2t)} / C.
  const double k0 = boost::math::cyl_bessel_k(0, kC);
  const double upper = incomplete_bessel_k(0, kC, 1.0).value;
  const double p_hit = 1.0 - upper / k0;
  const double frac = double(taus.size()) / trials;
  const double se = std::sqrt(p_hit * (1 - p_hit) / trials);
  o.require(std::abs(frac - p_hit) < 4 * se,
            "hit fraction " + fmt(frac) + " vs " + fmt(p_hit) + " (" + fmt(std::abs(frac - p_hit) / se) + " SE < 4)");

  auto dens = [](double t) { return t > 0 ? std::exp(-t - 1.0 / (2 * t)) / (2 * t) : 0.0; };
  const double c_norm = quad(dens, 0.0, 1.0, 1e-13, 0.0);
  auto cdf = [&](double t) { return quad(dens, 0.0, t, 1e-13, 0.0) / c_norm; };
  std::vector<double> edges{0.0};
  for (int k = 1; k < 20; ++k) {
    double a = 0.0;
    double b = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (a + b);
      (cdf(m) < k / 20.0 ? a : b) = m;
    }
    edges.push_back(0.5 * (a + b));
  }
  edges.push_back(1.0);
  std::vector<long> counts(20, 0);
  for (double t : taus) {
    const auto k = std::upper_bound(edges.begin(), edges.end(), t) - edges.begin() - 1;
    ++counts[std::clamp<long>(k, 0, 19)];
  }
  const auto chi = chi_square_test(counts, std::vector<double>(20, 0.05));
  o.require(chi.p_value > 0.01, "chi2 p " + fmt(chi.p_value) + " > 0.01");
}

void sampler_fidelity(Outcome& o) {
  for (const auto& f : {FamilySpec::gst(1.0, 1.0), FamilySpec::leb(1.0, 1.0)}) {
    const DensityEval d(f);
    SamplerStats st;
    const auto ys = sample_transitions(d, 0.0, 0.5, {1, 0}, 200000, 77, workers(), &st);
    std::vector<double> r;
    r.reserve(ys.size());
    for (const auto& y : ys) r.push_back(y.norm());
    const testsupport::RadialMarginal law(d, 0.0, 0.5, 1.0);
    const auto chi = testsupport::chi_square_quantile_bins(r, 20, 0.0, law.upper(),
                                                           [&](double a, double b) { return law.mass(a, b); });
    o.require(chi.p_value > 0.01, f.selector() + " chi2 p " + fmt(chi.p_value) + " > 0.01 (acceptance " +
                                      fmt(st.acceptance_rate()) + ")");
  }
}

void rn_reweighting(Outcome& o) {
  const DensityEval gst(FamilySpec::gst(1.0, 1.0));
  const DensityEval leb(FamilySpec::leb(1.0, 1.0));
  const PlanarPoint x0{1, 0};
  const long n = 100000;
  auto f = [](PlanarPoint y) { return std::exp(-y.norm2()); };
  const auto y_leb = sample_transitions(leb, 0.0, 1.0, x0, n, 501, workers());
  const auto y_gst = sample_transitions(gst, 0.0, 1.0, x0, n, 502, workers());
  std::vector<double> a, b;
  for (const auto& y : y_leb) a.push_back(f(y) * rn_derivative(gst, leb, x0, y));
  for (const auto& y : y_gst) b.push_back(f(y));
  const auto ea = estimate(a);
  const auto eb = estimate(b);
  const double se = std::hypot(ea.std_error, eb.std_error);
  const double gap = std::abs(ea.mean - eb.mean);
  o.require(gap < 3 * se, "E_Leb[f rn] " + fmt(ea.mean) + " vs E_GSt[f] " + fmt(eb.mean) + " (" + fmt(gap / se) +
                              " SE < 3)");
}

void conditional_laws(Outcome& o) {
  const long n = 50000;
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75};
  {
    const DensityEval leb(FamilySpec::leb(1.0, 1.0));
    std::vector<double> mx, my, vx, vy;
    for (long i = 0; i < n; ++i) {
      Rng rng(31, i);
      const auto p = sample_conditional_path(leb, {1, 0}, grid, rng);
      const PlanarPoint d = p.points[2] - p.points[1];
      mx.push_back(d.x);
      my.push_back(d.y);
      vx.push_back(d.x * d.x);
      vy.push_back(d.y * d.y);
    }
    double worst = 0.0;
    for (const auto& [vals, target] : std::vector<std::pair<std::vector<double>*, double>>{
             {&mx, 0.0}, {&my, 0.0}, {&vx, 0.25}, {&vy, 0.25}}) {
      const auto e = estimate(*vals);
      worst = std::max(worst, std::abs(e.mean - target) / e.std_error);
    }
    o.require(worst < 4, "Leb increment moments worst " + fmt(worst) + " SE < 4");
  }
  {
    const DensityEval dir(FamilySpec::dir(1.0, 1.0, 0.05));
    std::vector<std::vector<double>> xs(grid.size());
    for (long i = 0; i < n; ++i) {
      Rng rng(32, i);
      const auto p = sample_conditional_path(dir, {1, 0}, grid, rng);
      for (std::size_t k = 0; k < grid.size(); ++k) xs[k].push_back(p.points[k].x);
    }
    double worst = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
      const auto e = estimate(xs[k]);
      worst = std::max(worst, std::abs(e.mean - (1.0 - grid[k])) / e.std_error);
    }
    o.require(worst < 4, "Dir bridge mean worst " + fmt(worst) + " SE < 4");
  }
  {
    // Regress the increment over [0.5, 0.55] on the state at 0.5.
    const double alpha = 0.5;
    const DensityEval gau(FamilySpec::gau(1.0, 1.0, alpha));
    const std::vector<double> g{0.0, 0.5, 0.55};
    std::vector<double> xv, dv;
    for (long i = 0; i < n; ++i) {
      Rng rng(33, i);
      const auto p = sample_conditional_path(gau, {1, 0}, g, rng);
      xv.push_back(p.points[1].x);
      dv.push_back(p.points[2].x - p.points[1].x);
    }
    const auto mx = estimate(xv).mean;
    const auto md = estimate(dv).mean;
    double sxx = 0, sxd = 0;
    for (long i = 0; i < n; ++i) {
      sxx += (xv[i] - mx) * (xv[i] - mx);
      sxd += (xv[i] - mx) * (dv[i] - md);
    }
    const double slope = sxd / sxx;
    double rss = 0;
    for (long i = 0; i < n; ++i) {
      const double e = dv[i] - md - slope * (xv[i] - mx);
      rss += e * e;
    }
    const double se = std::sqrt(rss / (n - 2) / sxx);
    // Exact Gaussian step: X' = X (a + T - t1) / (a + T - t0) + noise.
    const double expected = (alpha + 1.0 - 0.55) / (alpha + 1.0 - 0.5) - 1.0;
    o.require(std::abs(slope - expected) < 3 * se, "Gau slope " + fmt(slope) + " vs " + fmt(expected) + " (drift -x/" +
                                                        fmt(alpha + 0.5) + " over dt 0.05; " +
                                                        fmt(std::abs(slope - expected) / se) + " SE < 3)");
  }
}

double gst_hmap_oracle(double t, double r) {
  auto f = [&](double u) {
    const double rho = std::exp(u);
    const double ring1 = std::exp(-(r - rho) * (r - rho) / (2 * t)) * boost::math::cyl_bessel_i(1, r * rho / t) *
                         std::exp(-r * rho / t) / t;
    return rho * rho * rho * boost::math::cyl_bessel_k(0, kC * rho) * ring1;
  };
  // Composite Simpson in u = ln rho.
  const double a = -40.0;
  const double b = std::log(r + 14 * std::sqrt(t));
  const int n = 40000;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0 / (std::exp(t) * boost::math::cyl_bessel_k(0, kC * r));
}

void hmap_machinery(Outcome& o) {
  const HEval gst(FamilySpec::gst(1.0, 1.0));
  const double t = 0.5;
  const double hx = h_map(gst, t, {1, 0}).x;
  const double ref = gst_hmap_oracle(t, 1.0);
  o.require(std::abs(hx - ref) / ref < 1e-4, "closed form vs convolution " + fmt(std::abs(hx - ref) / ref) + " < 1e-4");
  const auto j = jacobian_eigs(gst, t, {1, 0});
  const double d = 1e-5;
  const double rad = (h_map(gst, t, {1 + d, 0}).x - h_map(gst, t, {1 - d, 0}).x) / (2 * d);
  const double tan = (h_map(gst, t, {1, d}).y - h_map(gst, t, {1, -d}).y) / (2 * d);
  const double jerr = std::max(std::abs(j.lambda_radial - rad) / rad, std::abs(j.lambda_tangential - tan) / tan);
  o.require(jerr < 1e-5, "Jacobian vs FD " + fmt(jerr) + " < 1e-5");
  const PlanarPoint x = PlanarPoint::polar(2.0, 0.4);
  const double rt = (h_map_inverse(gst, t, h_map(gst, t, x)) - x).norm();
  o.require(rt < 1e-8, "inverse round trip " + fmt(rt) + " < 1e-8");
}

void moment_scaling(Outcome& o) {
  for (const auto& f : {FamilySpec::gst(1.0, 1.0), FamilySpec::leb(1.0, 1.0)}) {
    const HEval e(f);
    for (int m : {1, 2}) {
      double lo = kInf;
      double hi = 0.0;
      for (int k = 1; k <= 6; ++k) {
        const double dt = std::ldexp(1.0, -k);
        const auto est = moment_scaling_probe(e, m, 0.0, dt, {1, 0}, 20000, 900 + k, workers());
        lo = std::min(lo, est.mean);
        hi = std::max(hi, est.mean);
      }
      o.require(hi / lo < 10, f.selector() + " m=" + std::to_string(m) + " max/min " + fmt(hi / lo) + " < 10");
    }
  }
}

void submartingale(Outcome& o) {
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  for (const auto& f : {FamilySpec::gst(1.0, 1.0), FamilySpec::leb(1.0, 1.0)}) {
    const auto rows = submartingale_probe(DensityEval(f), {1, 0}, grid, 50000, 4242, workers());
    double worst = kInf;
    std::string means;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      means += (k ? "," : "") + fmt(rows[k].mean);
      if (k == 0) continue;
      const double se = std::hypot(rows[k].std_error, rows[k - 1].std_error);
      const double z = se > 0 ? (rows[k].mean - rows[k - 1].mean) / se : (rows[k].mean >= rows[k - 1].mean ? kInf : -kInf);
      worst = std::min(worst, z);
    }
    o.require(worst > -3, f.selector() + " means [" + means + "] min step " + fmt(worst) + " SE > -3");
  }
}

void asymptotic_bands(Outcome& o) {
  const auto gst = FamilySpec::gst(1.0, 1.0);
  const auto leb = FamilySpec::leb(1.0, 1.0);
  for (double r : {1e-6, 1e-8}) {
    for (double t : {0.5, 1.0}) {
      const double ratio = h_eval(gst, t, {r, 0}) / std::log(1 / r) / std::exp(t);
      o.require(std::abs(ratio - 1) < 0.10, "GSt r=" + fmt(r) + " t=" + fmt(t) + " ratio " + fmt(ratio));
    }
    const double ratio = h_eval(leb, 1.0, {r, 0}) / (2 * volterra::nu(1.0) * std::log(1 / r));
    o.require(std::abs(ratio - 1) < 0.15, "Leb r=" + fmt(r) + " ratio " + fmt(ratio));
  }
  double lo = kInf;
  double hi = 0.0;
  for (const auto& f : {gst, leb, FamilySpec::gau(1.0, 1.0, 0.5)}) {
    for (double r = 1e-8; r <= 1.0001e-4; r *= 10) {
      const double band = std::abs(drift_eval(f, 1.0, {r, 0}).radial_part) * r * std::log(1 / r);
      lo = std::min(lo, band);
      hi = std::max(hi, band);
    }
  }
  o.require(lo >= 0.5 && hi <= 2.0, "drift band [" + fmt(lo) + ", " + fmt(hi) + "] in [0.5, 2]");
  const double small = bessel_k(0, 1e-6).value / std::log(1e6);
  const double large = bessel_k(0, 20.0).value / (std::sqrt(kPi / 40.0) * std::exp(-20.0));
  o.require(small >= 0.9 && small <= 1.1, "K0 small-z ratio " + fmt(small));
  o.require(large >= 0.95 && large <= 1.05, "K0 large-z ratio " + fmt(large));
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "Volterra renewal identity", 10, renewal},
      {2, "semigroup property", 300, semigroup},
      {3, "ground-state eigenrelation", 120, eigenrelation},
      {4, "transition-density normalization", 120, normalization},
      {5, "hit-time density normalization", 30, hit_normalization},
      {6, "GIG hit-time sampling", 60, gig_sampling},
      {7, "rejection-sampler fidelity", 600, sampler_fidelity},
      {8, "RN cross-family reweighting", 600, rn_reweighting},
      {9, "conditional-law identifications", 120, conditional_laws},
      {10, "H-map machinery", 120, hmap_machinery},
      {11, "Kolmogorov moment scaling", 600, moment_scaling},
      {12, "submartingale mean probe", 600, submartingale},
      {13, "asymptotic bands", 30, asymptotic_bands},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < c.budget_s, "time " + fmt(secs) + " s < " + fmt(c.budget_s) + " s");
    failures += !o.pass;
    std::printf("[%s] %2d %-34s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
