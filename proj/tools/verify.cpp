#include <cstdio>
#include <functional>
#include <iostream>

#include "cli_support.hpp"
#include "pointdiff/doob.hpp"
#include "pointdiff/gof.hpp"
#include "pointdiff/hmap.hpp"
#include "pointdiff/kernel.hpp"
#include "pointdiff/quadrature.hpp"
#include "pointdiff/sampler.hpp"
#include "pointdiff/specfun.hpp"

namespace cli {

using namespace pointdiff;

namespace {

enum class Sense { below, above, within };

class Report {
 public:
  void check(const std::string& name, double measured, double target, Sense sense = Sense::below) {
    bool ok = false;
    std::string shown;
    switch (sense) {
      case Sense::below:
        ok = measured < target;
        shown = "< " + fmt(target);
        break;
      case Sense::above:
        ok = measured > target;
        shown = "> " + fmt(target);
        break;
      case Sense::within:  // |measured| <= target, measured in standard errors
        ok = std::abs(measured) <= target;
        shown = "|z| <= " + fmt(target);
        break;
    }
    print(name, shown, fmt(measured), ok);
  }

  void flag(const std::string& name, const std::string& target, const std::string& measured, bool ok) {
    print(name, target, measured, ok);
  }

  void error(const std::string& name, const std::exception& e) { print(name, "no error", e.what(), false); }

  int failures() const { return failures_; }

 private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
  }

  void print(const std::string& name, const std::string& target, const std::string& measured, bool ok) {
    failures_ += !ok;
    std::printf("%-44s %-16s %-24s %s\n", name.c_str(), target.c_str(), measured.c_str(), ok ? "PASS" : "FAIL");
    std::fflush(stdout);
  }

  int failures_ = 0;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

void suite_specfun(Report& rep, const RunConfig&) {
  for (double x : {0.25, 1.0, 4.0}) {
    rep.check("specfun.renewal_identity x=" + format_double(x), rel(renewal_integral(x), std::exp(x)), 1e-6);
  }
  for (double a : {0.01, 1.0, 50.0}) {
    rep.check("specfun.nu_table_vs_quadrature a=" + format_double(a), rel(volterra::nu(a), volterra_nu(a).value),
              1e-8);
  }
  const double z = std::sqrt(2.0);
  const double split = incomplete_bessel_k(0, z, 1.0).value + incomplete_bessel_k_lower(0, z, 1.0).value;
  rep.check("specfun.incomplete_k_complement", rel(split, bessel_k(0, z).value), 1e-10);
  rep.check("specfun.k0_small_z_band", std::abs(bessel_k(0, 1e-6).value / std::log(1e6) - 1.0), 0.1);
  rep.check("specfun.k0_large_z_band",
            std::abs(bessel_k(0, 20.0).value / (std::sqrt(kPi / 40.0) * std::exp(-20.0)) - 1.0), 0.05);
}

void suite_kernel(Report& rep, const RunConfig& cfg) {
  const KernelParams kp{cfg.theta, cfg.quad()};
  const double semigroup_target = cfg.theta <= 1e-6 ? 1e-6 : 5e-4;
  rep.check("kernel.semigroup_residual", semigroup_residual(kp, 0.5, 1.0, {1, 0}, {0, 1}), semigroup_target);
  rep.check("kernel.gst_eigen_residual", gst_eigen_residual(kp, 0.5, {1, 0}), 1e-5);
  const PlanarPoint x{0.7, 0.2};
  const PlanarPoint y{-0.4, 1.1};
  rep.check("kernel.symmetry", rel(full_kernel(kp, 0.5, x, y), full_kernel(kp, 0.5, y, x)), 1e-12);
  double worst = kInf;
  for (double r : {0.1, 0.5, 1.0, 2.0}) {
    const PlanarPoint a{r, 0};
    const PlanarPoint b{0, 1};
    worst = std::min(worst, full_kernel(kp, 0.5, a, b) / heat_kernel(0.5, a - b) - 1.0);
  }
  rep.check("kernel.gaussian_lower_bound (K/g - 1)", worst, 0.0, Sense::above);
}

void suite_families(Report& rep, const RunConfig& cfg) {
  const FamilySpec f = cfg.family_spec();
  const double t = 0.5 * cfg.horizon_T;
  const double d = 1e-5;
  const double fd = (std::log(h_eval(f, t, {1 + d, 0})) - std::log(h_eval(f, t, {1 - d, 0}))) / (2 * d);
  rep.check("families.drift_vs_finite_difference", rel(drift_eval(f, t, {1, 0}).radial_part, fd), 1e-5);
  rep.check("families.h_dominates_base (h/B - 1)", h_eval(f, t, {1, 0}) / base_conv(f, t, {1, 0}) - 1.0, 0.0,
            Sense::above);
  if (f.kind != FamilyKind::dir) {
    double lo = kInf;
    double hi = 0.0;
    for (double r : {1e-8, 1e-6, 1e-4}) {
      const double band = std::abs(drift_eval(f, cfg.horizon_T, {r, 0}).radial_part) * r * std::log(1 / r);
      lo = std::min(lo, band);
      hi = std::max(hi, band);
    }
    char span[64];
    std::snprintf(span, sizeof span, "[%.4g, %.4g]", lo, hi);
    rep.flag("families.drift_blowup_band", "in [0.5, 2]", span, lo >= 0.5 && hi <= 2.0);
  }
}

void suite_doob(Report& rep, const RunConfig& cfg) {
  const DensityEval d(cfg.family_spec(), cfg.quad());
  const double T = cfg.horizon_T;
  rep.check("doob.normalization_residual", normalization_residual(d, 0.0, 0.5 * T, {1, 0}), 1e-4);
  rep.check("doob.chapman_kolmogorov_residual",
            chapman_kolmogorov_residual(d, 0.0, 0.5 * T, T, {1, 0}, {0, 1}), 5e-4);
  const HitLaw law(d, {1, 0});
  rep.check("doob.hit_density_mass", std::abs(law.total_mass() - 1.0), 1e-5);
  const double p = survival_probability(d, T, {1, 0});
  rep.flag("doob.survival_in_unit_interval", "in (0, 1)", format_double(p), p > 0.0 && p < 1.0);
  if (d.family().kind == FamilyKind::gst) {
    const double c = std::sqrt(2.0 * cfg.theta);
    const double closed = incomplete_bessel_k(0, c, cfg.theta * T).value / bessel_k(0, c).value;
    rep.check("doob.gst_survival_closed_form", rel(p, closed), 1e-8);
  }
}

void suite_hmap(Report& rep, const RunConfig& cfg) {
  const HEval e(cfg.family_spec(), cfg.quad());
  const double t = 0.5 * cfg.horizon_T;
  if (e.family().kind == FamilyKind::dir) {
    rep.check("hmap.dirac_map_vanishes", h_map(e, t, {1, 0}).norm(), 1e-300);
    bool threw = false;
    try {
      h_map_inverse(e, t, {1, 0});
    } catch (const HypothesisViolation&) {
      threw = true;
    }
    rep.flag("hmap.dirac_inverse_rejected", "HypothesisViolation", threw ? "raised" : "not raised", threw);
    return;
  }
  const PlanarPoint x = PlanarPoint::polar(1.5, 0.3);
  rep.check("hmap.inverse_round_trip", (h_map_inverse(e, t, h_map(e, t, x)) - x).norm(), 1e-8);
  const auto j = jacobian_eigs(e, t, {1, 0});
  const double d = 1e-5;
  const double fd = (h_map(e, t, {1 + d, 0}).x - h_map(e, t, {1 - d, 0}).x) / (2 * d);
  rep.check("hmap.jacobian_vs_finite_difference", rel(j.lambda_radial, fd), 1e-5);
  const auto h = harmonicity_residual(e, 0.0, t, {1, 0});
  rep.check("hmap.h_harmonicity_residual", h.h_residual, 5e-4);
  rep.check("hmap.H_harmonicity_residual", h.H_residual, 1e-3);
}

void suite_sampler(Report& rep, const RunConfig& cfg) {
  const DensityEval d(cfg.family_spec(), cfg.quad());
  const double T = cfg.horizon_T;
  const PlanarPoint x0{1, 0};
  const long n = std::max(cfg.n_paths, 20000L);

  SamplerStats stats;
  const auto ys = sample_transitions(d, 0.0, 0.5 * T, x0, n, cfg.seed, cfg.workers, &stats);
  std::vector<double> radii;
  for (const auto& y : ys) radii.push_back(y.norm());
  const RadialTransitionLaw law(d, 0.0, 0.5 * T, 1.0);
  rep.check("sampler.transition_chi2_p (n=" + std::to_string(n) + ")", radial_chi_square(law, radii).p_value, 0.01,
            Sense::above);
  rep.check("sampler.acceptance_rate", stats.acceptance_rate(), 0.01, Sense::above);

  const auto again = sample_transitions(d, 0.0, 0.5 * T, x0, 200, cfg.seed, cfg.workers == 1 ? 3 : 1);
  bool same = true;
  for (std::size_t i = 0; i < again.size(); ++i) same = same && again[i] == ys[i];
  rep.flag("sampler.worker_count_reproducibility", "identical", same ? "identical" : "differs", same);

  if (d.family().kind == FamilyKind::gst) {
    // Hit times are generalized inverse Gaussian: density ~ e^{-theta t - 1/(2t)} / t on [0, T].
    const HitLaw hit(d, x0);
    std::vector<double> taus;
    for (long i = 0; i < n; ++i) {
      Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL, static_cast<std::uint64_t>(i));
      if (auto tau = sample_hit_time(hit, rng)) taus.push_back(*tau);
    }
    const double c = std::sqrt(2.0 * cfg.theta);
    const double p_hit = 1.0 - incomplete_bessel_k(0, c, cfg.theta * T).value / bessel_k(0, c).value;
    const double frac = double(taus.size()) / n;
    rep.check("sampler.gig_hit_fraction_z", (frac - p_hit) / std::sqrt(p_hit * (1 - p_hit) / n), 4.0,
              Sense::within);
    auto dens = [&](double t) { return t > 0 ? std::exp(-cfg.theta * t - 1.0 / (2 * t)) / t : 0.0; };
    const double mass = quad(dens, 0.0, T, 1e-12, 0.0);
    std::vector<double> edges{0.0};
    const int bins = 20;
    for (int k = 1; k < bins; ++k) {
      double a = 0.0;
      double b = T;
      for (int it = 0; it < 50; ++it) {
        const double m = 0.5 * (a + b);
        (quad(dens, 0.0, m, 1e-12, 0.0) / mass < double(k) / bins ? a : b) = m;
      }
      edges.push_back(0.5 * (a + b));
    }
    edges.push_back(T);
    std::vector<long> counts(bins, 0);
    for (double t : taus) {
      const auto k = std::upper_bound(edges.begin(), edges.end(), t) - edges.begin() - 1;
      ++counts[std::clamp<long>(k, 0, bins - 1)];
    }
    rep.check("sampler.gig_hit_time_chi2_p", chi_square_test(counts, std::vector<double>(bins, 1.0 / bins)).p_value,
              0.01, Sense::above);
  }

  // Dirac paths end at the origin, where the survival functional is 0 by
  // convention, so that family is probed strictly before the horizon.
  const double last = d.family().kind == FamilyKind::dir ? 0.75 * T : T;
  const auto means = submartingale_probe(d, x0, {0.0, 0.5 * T, last}, 2000, cfg.seed + 1, cfg.workers);
  double worst = kInf;
  for (std::size_t k = 1; k < means.size(); ++k) {
    const double se = std::hypot(means[k].std_error, means[k - 1].std_error);
    worst = std::min(worst, se > 0 ? (means[k].mean - means[k - 1].mean) / se : 0.0);
  }
  rep.check("sampler.submartingale_min_step_z", worst, -3.0, Sense::above);
}

}  // namespace

int cmd_verify(const RunConfig& cfg, const std::string& suite) {
  const std::vector<std::pair<std::string, std::function<void(Report&, const RunConfig&)>>> suites{
      {"specfun", suite_specfun}, {"kernel", suite_kernel}, {"families", suite_families},
      {"doob", suite_doob},       {"hmap", suite_hmap},     {"sampler", suite_sampler},
  };
  bool known = suite == "all";
  for (const auto& s : suites) known = known || s.first == suite;
  if (!known) throw UsageError("unknown suite '" + suite + "'");
  cfg.family_spec();  // reject bad grammar before any output

  Report rep;
  std::printf("%-44s %-16s %-24s %s\n", "check", "target", "measured", "result");
  for (const auto& [name, run] : suites) {
    if (suite != "all" && suite != name) continue;
    try {
      run(rep, cfg);
    } catch (const std::exception& e) {
      rep.error(name + ".suite", e);
    }
  }
  return rep.failures() ? 1 : 0;
}

}  // namespace cli
