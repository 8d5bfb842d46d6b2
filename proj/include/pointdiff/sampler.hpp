#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "pointdiff/common.hpp"
#include "pointdiff/doob.hpp"

namespace pointdiff {

// ------------------------------------------------------------------ RNG

/// splitmix64 finalizer; mixes (master, index) into a stream seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Per-path random stream. The seed is a pure function of the master seed
/// and the path index, so parallel runs are reproducible for any worker count.
class Rng {
 public:
  Rng(std::uint64_t master, std::uint64_t index);

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// ------------------------------------------------------------- results

enum class PathMode { marginal_exact, conditional_exact, euler_approx };

struct PathSample {
  std::vector<double> grid;
  std::vector<PlanarPoint> points;
  std::optional<double> tau;
  PathMode mode = PathMode::marginal_exact;
  std::uint64_t seed = 0;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
};

/// Mean and standard error (sample std / sqrt(n)) with compensated summation.
McEstimate estimate(const std::vector<double>& values);

/// Runs f(state, i) for i in [0, n) on `workers` threads and returns the
/// results in index order. Worker w owns one state built by make_state() and
/// handles the indices i = w mod workers. The first exception thrown by any
/// task is rethrown.
template <class R, class MakeState, class F>
std::vector<R> parallel_map_with(long n, int workers, MakeState&& make_state, F&& f);

/// Stateless form of parallel_map_with.
template <class R, class F>
std::vector<R> parallel_map(long n, int workers, F&& f) {
  return parallel_map_with<R>(n, workers, [] { return 0; }, [&](int&, long i) { return f(i); });
}

// ------------------------------------------------------ rejection sampler

struct SamplerStats {
  long proposals = 0;
  long accepted = 0;
  int resweeps = 0;
  double envelope = 0.0;
  double acceptance_rate() const { return proposals ? double(accepted) / proposals : 0.0; }
};

/// v_{t-s}(|x|, rho) for the fixed starting radius, with the radius range
/// on which evaluation is cheap.
struct InteractionSource {
  std::function<double(double)> v;
  double rho_lo = 0.0;
  double rho_hi = kInf;

  /// One-dimensional profile for a fixed start point (built in ~30 ms).
  static InteractionSource radial(double theta, double tau, double rx);
  /// Lookup in the cached two-dimensional table for (theta, tau).
  static InteractionSource table(double theta, double tau, double rx);
};

/// Exact draws from y -> d_{s,t}(x, y) for one fixed (s, t, x) by rejection
/// from the mixture
///   0.45 N(x, tau I) + 0.45 N(0, (tau + min(|x|^2, 1)) I) + 0.1 L_R,
/// where L_R has density 2 ln^2(R/|y|) / (pi R^2) on |y| < R = sqrt(tau) and
/// dominates the ln^2 growth of the target at the origin. The envelope
/// constant is 1.5 times the largest target/proposal ratio found on a sweep.
class TransitionSampler {
 public:
  TransitionSampler(const DensityEval& d, double s, double t, PlanarPoint x, InteractionSource source);

  PlanarPoint draw(Rng& rng);
  /// d_{s,t}(x, y) as used by the sampler.
  double target(PlanarPoint y) const;
  double proposal(PlanarPoint y) const;
  const SamplerStats& stats() const { return stats_; }

 private:
  double sweep(int refinement) const;

  std::shared_ptr<const Family> fam_;
  double T_;
  double s_;
  double t_;
  double tau_;
  PlanarPoint x_;
  double hx_;
  double wide_var_;
  double log_r_;  // ln R of the origin component
  InteractionSource source_;
  SamplerStats stats_;
};

/// One draw from d_{s,t}(x, .). Builds a fresh sampler; use TransitionSampler
/// directly for batches. For the Dirac family d_{s,T}(x, .) is the point mass
/// at the origin, which is returned without sampling (also in the batch and
/// path samplers below).
PlanarPoint sample_transition(const DensityEval& d, double s, double t, PlanarPoint x, Rng& rng);

/// n independent draws from d_{s,t}(x, .); draw i uses the stream (seed, i).
/// Each worker builds its own sampler, so the output depends only on the
/// seed unless an envelope resweep occurs.
std::vector<PlanarPoint> sample_transitions(const DensityEval& d, double s, double t, PlanarPoint x,
                                            long n, std::uint64_t seed, int workers = 1,
                                            SamplerStats* stats = nullptr);

/// Exact finite-dimensional sample along `grid` (grid[0] = 0) by sequential
/// transitions. Hitting between grid points is not resolved.
PathSample sample_path_marginal(const DensityEval& d, PlanarPoint x0, const std::vector<double>& grid,
                                Rng& rng);

/// Path of the survival-conditioned motion along `grid`. Leb, Dir and Gau
/// use exact Gaussian transitions; GSt uses Euler-Maruyama with substeps
/// min(euler_step, remaining grid step, 0.1 |x| / |b(x)|), so a single drift
/// move never exceeds a tenth of the distance to the origin. A step below
/// 1e-14 raises SamplerError carrying the stuck state.
PathSample sample_conditional_path(const DensityEval& d, PlanarPoint x0, const std::vector<double>& grid,
                                   Rng& rng, double euler_step = 1e-2);

/// With probability survive_prob returns nothing; otherwise a hitting time
/// drawn by inverse-CDF bisection on the conditional hit law.
std::optional<double> sample_hit_time(const HitLaw& law, Rng& rng);
std::optional<double> sample_hit_time(const DensityEval& d, PlanarPoint x0, Rng& rng);

/// Monte Carlo means of S_t = p_{T-t}(X_t) at every grid time under the
/// marginal path law.
std::vector<McEstimate> submartingale_probe(const DensityEval& d, PlanarPoint x0,
                                            const std::vector<double>& grid, long n_paths,
                                            std::uint64_t seed, int workers = 1);

/// Path diagnostics for one ball radius eps, averaged over paths.
struct ExcursionRow {
  double eps = 0.0;
  McEstimate drift_integral;  // int |b_{T-s}(X_s)| ds (left Riemann sum)
  McEstimate occupation;      // int 1{|X_s| <= eps} ds
  McEstimate excursions;      // entries into B_eps after leaving B_{2 eps}
};

std::vector<ExcursionRow> excursion_diagnostics(const DensityEval& d, PlanarPoint x0,
                                                const std::vector<double>& grid,
                                                const std::vector<double>& eps, long n_paths,
                                                std::uint64_t seed, int workers = 1);

// ----------------------------------------------------------- goodness of fit

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
};

/// Pearson test of counts against cell probabilities (which must sum to 1).
ChiSquareResult chi_square_test(const std::vector<long>& observed, const std::vector<double>& probs);

// -------------------------------------------------------- implementation

template <class R, class MakeState, class F>
std::vector<R> parallel_map_with(long n, int workers, MakeState&& make_state, F&& f) {
  std::vector<R> out(static_cast<std::size_t>(std::max(n, 0L)));
  workers = std::max(1, std::min<int>(workers, static_cast<int>(std::max(n, 1L))));
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto run = [&](int w) {
    try {
      auto state = make_state();
      for (long i = w; i < n; i += workers) out[static_cast<std::size_t>(i)] = f(state, i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace pointdiff
