#include "pointdiff/sampler.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include "pointdiff/kernel.hpp"
#include "pointdiff/specfun.hpp"

namespace pointdiff {

// ------------------------------------------------------------------ RNG

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t master, std::uint64_t index)
    : seed_(derive_seed(master, index)), engine_(seed_) {}

double Rng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_(engine_); }

McEstimate estimate(const std::vector<double>& values) {
  McEstimate e;
  e.n = static_cast<long>(values.size());
  if (e.n == 0) return e;
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  e.mean = sum / e.n;
  if (e.n > 1) {
    double ss = 0.0;
    comp = 0.0;
    for (double v : values) {
      const double y = (v - e.mean) * (v - e.mean) - comp;
      const double t = ss + y;
      comp = (t - ss) - y;
      ss = t;
    }
    e.std_error = std::sqrt(ss / (e.n - 1) / e.n);
  }
  return e;
}

// ------------------------------------------------------ interaction sources

InteractionSource InteractionSource::radial(double theta, double tau, double rx) {
  auto ri = std::make_shared<const kernel::RadialInteraction>(theta, rx, tau, 1e-9);
  return {[ri, tau](double rho) { return (*ri)(tau, rho); }, 0.0, kInf};
}

InteractionSource InteractionSource::table(double theta, double tau, double rx) {
  auto tab = kernel::interaction_table(theta, tau);
  const double sq = std::sqrt(tab->t());
  return {[tab, rx](double rho) { return (*tab)(rx, rho); }, 1e-6 * sq, 40.0 * sq};
}

// ------------------------------------------------------ TransitionSampler

namespace {
constexpr double kWeightNear = 0.45;
constexpr double kWeightWide = 0.45;
constexpr double kWeightOrigin = 0.1;
constexpr double kSafety = 1.5;
constexpr int kMaxResweeps = 2;
}  // namespace

TransitionSampler::TransitionSampler(const DensityEval& d, double s, double t, PlanarPoint x,
                                     InteractionSource source)
    : fam_(d.evaluator_ptr()),
      T_(d.horizon()),
      s_(s),
      t_(t),
      tau_(t - s),
      x_(x),
      source_(std::move(source)) {
  if (!(s >= 0.0 && s < t && t <= T_ * (1.0 + 1e-12))) throw DomainError("sampler: need 0 <= s < t <= T");
  if (x.is_origin()) throw DomainError("sampler: start point must be nonzero");
  hx_ = fam_->h(T_ - s_, x.norm());
  wide_var_ = tau_ + std::min(x.norm2(), 1.0);
  log_r_ = 0.5 * std::log(tau_);
  const double m = sweep(1);
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw SamplerError("sampler: target density vanishes or is not finite on the sweep");
  }
  stats_.envelope = kSafety * m;
}

double TransitionSampler::target(PlanarPoint y) const {
  const double rho = y.norm();
  if (rho == 0.0) return kInf;
  const double k = heat_kernel(tau_, x_ - y) + source_.v(rho);
  return fam_->h(T_ - t_, rho) / hx_ * k;
}

double TransitionSampler::proposal(PlanarPoint y) const {
  const double rho = y.norm();
  double q = kWeightNear * heat_kernel(tau_, y - x_) + kWeightWide * heat_kernel(wide_var_, y);
  const double l = log_r_ - std::log(rho);
  if (l > 0.0) q += kWeightOrigin * 2.0 * l * l / (kPi * std::exp(2.0 * log_r_));
  return q;
}

double TransitionSampler::sweep(int refinement) const {
  const double sq = std::sqrt(tau_);
  const double rx = x_.norm();
  const double rho_lo = std::max(source_.rho_lo * 1.0001, 1e-9 * sq);
  const double rho_hi = std::min(source_.rho_hi * 0.9999, rx + 8.0 * sq);
  double worst = 0.0;
  auto consider = [&](PlanarPoint y) {
    const double f = target(y);
    const double q = proposal(y);
    if (std::isfinite(f) && q > 0.0) worst = std::max(worst, f / q);
  };
  const int nr = 24 * refinement;
  const int na = 16 * refinement;
  const double phi0 = x_.angle();
  for (int i = 0; i < nr; ++i) {
    const double rho = rho_lo * std::pow(rho_hi / rho_lo, double(i) / (nr - 1));
    for (int j = 0; j < na; ++j) consider(PlanarPoint::polar(rho, phi0 + kTwoPi * j / na));
  }
  const int nl = 4 * refinement;
  for (int i = -nl; i <= nl; ++i) {
    for (int j = -nl; j <= nl; ++j) {
      const PlanarPoint y = x_ + PlanarPoint{6.0 * sq * i / nl, 6.0 * sq * j / nl};
      if (y.norm() >= rho_lo && y.norm() <= std::max(rho_hi, rx)) consider(y);
    }
  }
  return worst;
}

PlanarPoint TransitionSampler::draw(Rng& rng) {
  const double sq = std::sqrt(tau_);
  const double sw = std::sqrt(wide_var_);
  for (;;) {
    PlanarPoint y;
    const double u = rng.uniform();
    if (u < kWeightNear) {
      y = x_ + PlanarPoint{sq * rng.normal(), sq * rng.normal()};
    } else if (u < kWeightNear + kWeightWide) {
      y = PlanarPoint{sw * rng.normal(), sw * rng.normal()};
    } else {
      // |y| = R e^{-W} with W ~ Gamma(3, rate 2).
      const double w = -0.5 * (std::log(rng.uniform()) + std::log(rng.uniform()) + std::log(rng.uniform()));
      y = PlanarPoint::polar(std::exp(log_r_ - w), kTwoPi * rng.uniform());
    }
    if (y.is_origin()) continue;
    ++stats_.proposals;
    const double f = target(y);
    const double q = proposal(y);
    const double ratio = f / (stats_.envelope * q);
    if (ratio > 1.0) {
      if (stats_.resweeps >= kMaxResweeps) {
        throw SamplerError("sampler: envelope still violated after a finer resweep");
      }
      ++stats_.resweeps;
      stats_.envelope = kSafety * std::max(sweep(2 * stats_.resweeps), f / q);
      continue;
    }
    if (rng.uniform() < ratio) {
      ++stats_.accepted;
      return y;
    }
  }
}

namespace {
// h_0 of the Dirac family is a point mass at the origin, so d_{s,T}(x, .) is
// that point mass and the transition needs no sampling.
bool pinned_at_horizon(const DensityEval& d, double t) {
  return d.family().kind == FamilyKind::dir && t >= d.horizon() * (1.0 - 1e-12);
}
}  // namespace

PlanarPoint sample_transition(const DensityEval& d, double s, double t, PlanarPoint x, Rng& rng) {
  if (pinned_at_horizon(d, t) && !x.is_origin() && s < t) return {0.0, 0.0};
  TransitionSampler sampler(d, s, t, x, InteractionSource::radial(d.theta(), t - s, x.norm()));
  return sampler.draw(rng);
}

std::vector<PlanarPoint> sample_transitions(const DensityEval& d, double s, double t, PlanarPoint x,
                                            long n, std::uint64_t seed, int workers,
                                            SamplerStats* stats) {
  if (pinned_at_horizon(d, t)) {
    if (x.is_origin() || !(s >= 0.0 && s < t)) throw DomainError("sampler: need 0 <= s < t and a nonzero start");
    return std::vector<PlanarPoint>(static_cast<std::size_t>(std::max(n, 0L)), PlanarPoint{});
  }
  const auto source = InteractionSource::radial(d.theta(), t - s, x.norm());
  std::mutex mu;
  std::vector<std::shared_ptr<TransitionSampler>> samplers;
  auto out = parallel_map_with<PlanarPoint>(
      n, workers,
      [&] {
        auto sampler = std::make_shared<TransitionSampler>(d, s, t, x, source);
        std::lock_guard<std::mutex> lock(mu);
        samplers.push_back(sampler);
        return sampler;
      },
      [&](std::shared_ptr<TransitionSampler>& sampler, long i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        return sampler->draw(rng);
      });
  if (stats) {
    *stats = SamplerStats{};
    for (const auto& sampler : samplers) {
      const SamplerStats& st = sampler->stats();
      stats->proposals += st.proposals;
      stats->accepted += st.accepted;
      stats->resweeps += st.resweeps;
      stats->envelope = std::max(stats->envelope, st.envelope);
    }
  }
  return out;
}

// ------------------------------------------------------------------ paths

namespace {

void check_grid(const DensityEval& d, const std::vector<double>& grid) {
  if (grid.size() < 2 || grid.front() != 0.0) throw DomainError("grid must start at 0 and have two points");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw DomainError("grid must be increasing");
  }
  if (grid.back() > d.horizon() * (1.0 + 1e-12)) throw DomainError("grid exceeds the horizon");
}

}  // namespace

PathSample sample_path_marginal(const DensityEval& d, PlanarPoint x0, const std::vector<double>& grid,
                                Rng& rng) {
  check_grid(d, grid);
  if (x0.is_origin()) throw DomainError("path start must be nonzero");
  PathSample path;
  path.grid = grid;
  path.mode = PathMode::marginal_exact;
  path.seed = rng.seed();
  path.points.reserve(grid.size());
  path.points.push_back(x0);
  PlanarPoint x = x0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (pinned_at_horizon(d, grid[i + 1])) {
      x = {0.0, 0.0};
      path.points.push_back(x);
      continue;
    }
    const double tau = grid[i + 1] - grid[i];
    TransitionSampler sampler(d, grid[i], grid[i + 1], x,
                              InteractionSource::table(d.theta(), tau, x.norm()));
    x = sampler.draw(rng);
    path.points.push_back(x);
  }
  return path;
}

PathSample sample_conditional_path(const DensityEval& d, PlanarPoint x0, const std::vector<double>& grid,
                                   Rng& rng, double euler_step) {
  check_grid(d, grid);
  if (x0.is_origin()) throw DomainError("path start must be nonzero");
  if (!(euler_step > 0.0)) throw DomainError("euler_step must be positive");
  const FamilySpec& f = d.family();
  const double T = d.horizon();
  PathSample path;
  path.grid = grid;
  path.seed = rng.seed();
  path.mode = f.kind == FamilyKind::gst ? PathMode::euler_approx : PathMode::conditional_exact;
  path.points.push_back(x0);
  PlanarPoint x = x0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double t0 = grid[i];
    const double t1 = grid[i + 1];
    const double dt = t1 - t0;
    switch (f.kind) {
      case FamilyKind::leb: {
        const double sd = std::sqrt(dt);
        x = x + PlanarPoint{sd * rng.normal(), sd * rng.normal()};
        break;
      }
      case FamilyKind::dir:
      case FamilyKind::gau: {
        // Gaussian bridge towards the origin with remaining-time offset a.
        const double a = f.kind == FamilyKind::dir ? 0.0 : f.param;
        const double shrink = (a + T - t1) / (a + T - t0);
        const double sd = std::sqrt(dt * shrink);
        x = shrink * x + PlanarPoint{sd * rng.normal(), sd * rng.normal()};
        break;
      }
      case FamilyKind::gst: {
        double t = t0;
        long steps = 0;
        while (t < t1) {
          const double b = conditional_drift(d, T - t, x).radial_part;
          const double cap = b != 0.0 ? 0.1 * x.norm() / std::abs(b) : kInf;
          const double h = std::min({euler_step, t1 - t, cap});
          if (h < 1e-14 * std::max(1.0, t1) || ++steps > 100000000L) {
            throw SamplerError("conditional sampler: step controller stuck near the origin", x, t);
          }
          const double sd = std::sqrt(h);
          x = x + (b * h) * x.unit() + PlanarPoint{sd * rng.normal(), sd * rng.normal()};
          t = (t1 - t - h <= 0.0) ? t1 : t + h;
        }
        break;
      }
    }
    path.points.push_back(x);
  }
  return path;
}

std::optional<double> sample_hit_time(const HitLaw& law, Rng& rng) {
  if (rng.uniform() < law.survive_prob()) return std::nullopt;
  return law.quantile(rng.uniform());
}

std::optional<double> sample_hit_time(const DensityEval& d, PlanarPoint x0, Rng& rng) {
  return sample_hit_time(HitLaw(d, x0), rng);
}

// ------------------------------------------------------------- probes

std::vector<McEstimate> submartingale_probe(const DensityEval& d, PlanarPoint x0,
                                            const std::vector<double>& grid, long n_paths,
                                            std::uint64_t seed, int workers) {
  check_grid(d, grid);
  const double T = d.horizon();
  auto rows = parallel_map<std::vector<double>>(n_paths, workers, [&](long i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    const PathSample p = sample_path_marginal(d, x0, grid, rng);
    std::vector<double> s(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      s[k] = survival_probability(d, std::max(0.0, T - grid[k]), p.points[k]);
    }
    return s;
  });
  std::vector<McEstimate> out;
  std::vector<double> column(static_cast<std::size_t>(n_paths));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t i = 0; i < rows.size(); ++i) column[i] = rows[i][k];
    out.push_back(estimate(column));
  }
  return out;
}

std::vector<ExcursionRow> excursion_diagnostics(const DensityEval& d, PlanarPoint x0,
                                                const std::vector<double>& grid,
                                                const std::vector<double>& eps, long n_paths,
                                                std::uint64_t seed, int workers) {
  check_grid(d, grid);
  const double T = d.horizon();
  const Family& fam = d.evaluator();
  const std::size_t m = eps.size();
  // Per path: [drift integral, occupation_0, excursions_0, occupation_1, ...].
  auto rows = parallel_map<std::vector<double>>(n_paths, workers, [&](long i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    const PathSample p = sample_path_marginal(d, x0, grid, rng);
    std::vector<double> r(1 + 2 * m, 0.0);
    std::vector<bool> outside(m);
    for (std::size_t e = 0; e < m; ++e) outside[e] = p.points[0].norm() > 2.0 * eps[e];
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      const double dt = grid[k + 1] - grid[k];
      const double rho = p.points[k].norm();
      const double tt = T - grid[k];
      r[0] += std::abs(fam.h_dr(tt, rho) / fam.h(tt, rho)) * dt;
      for (std::size_t e = 0; e < m; ++e) {
        if (rho <= eps[e]) r[1 + 2 * e] += dt;
        const double next = p.points[k + 1].norm();
        if (outside[e] && next <= eps[e]) {
          r[2 + 2 * e] += 1.0;
          outside[e] = false;
        } else if (next > 2.0 * eps[e]) {
          outside[e] = true;
        }
      }
    }
    return r;
  });
  auto column = [&](std::size_t c) {
    std::vector<double> v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) v[i] = rows[i][c];
    return estimate(v);
  };
  std::vector<ExcursionRow> out;
  const McEstimate drift = column(0);
  for (std::size_t e = 0; e < m; ++e) out.push_back({eps[e], drift, column(1 + 2 * e), column(2 + 2 * e)});
  return out;
}

ChiSquareResult chi_square_test(const std::vector<long>& observed, const std::vector<double>& probs) {
  if (observed.size() != probs.size() || observed.size() < 2) {
    throw DomainError("chi_square_test: need matching bins, at least two");
  }
  long n = 0;
  for (long o : observed) n += o;
  ChiSquareResult r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = probs[i] * n;
    if (!(e > 0.0)) throw DomainError("chi_square_test: empty expected cell");
    r.statistic += (observed[i] - e) * (observed[i] - e) / e;
  }
  r.dof = static_cast<int>(observed.size()) - 1;
  r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
  return r;
}

}  // namespace pointdiff
