#pragma once
// Goodness-of-fit helpers shared by the unit and acceptance tests.

#include <algorithm>
#include <functional>
#include <vector>

#include "pointdiff/doob.hpp"
#include "pointdiff/quadrature.hpp"
#include "pointdiff/sampler.hpp"

namespace testsupport {

/// Density of |Y| for Y ~ d_{s,t}(x, .), integrated over angles:
///   m(rho) = rho h_{T-t}(rho) / h_{T-s}(|x|) * [ring_heat(tau, |x|, rho) + 2 pi v_tau(|x|, rho)].
class RadialMarginal {
 public:
  RadialMarginal(const pointdiff::DensityEval& d, double s, double t, double rx)
      : fam_(d.evaluator_ptr()),
        v_(d.theta(), rx, t - s, 1e-10),
        T_(d.horizon()),
        s_(s),
        t_(t),
        rx_(rx),
        hx_(fam_->h(d.horizon() - s, rx)) {}

  double operator()(double rho) const {
    if (rho <= 0.0) return 0.0;
    const double tau = t_ - s_;
    return rho * fam_->h(T_ - t_, rho) / hx_ *
           (pointdiff::kernel::ring_heat(tau, rx_, rho) + pointdiff::kTwoPi * v_(tau, rho));
  }

  double mass(double a, double b) const { return pointdiff::quad(*this, a, b, 1e-10, 1e-300); }
  double upper() const { return rx_ + 14.0 * std::sqrt(t_ - s_); }

 private:
  std::shared_ptr<const pointdiff::Family> fam_;
  pointdiff::kernel::RadialInteraction v_;
  double T_, s_, t_, rx_, hx_;
};

/// Pearson test of samples against a law on [0, upper] given through its
/// cell masses. Edges are the empirical k/bins quantiles of the samples,
/// so every cell is well populated.
inline pointdiff::ChiSquareResult chi_square_quantile_bins(std::vector<double> samples, int bins, double lower,
                                                           double upper,
                                                           const std::function<double(double, double)>& mass) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  std::vector<double> edges{lower};
  for (int k = 1; k < bins; ++k) edges.push_back(samples[k * n / bins]);
  edges.push_back(std::max(upper, samples.back()));
  std::vector<double> probs;
  double total = 0.0;
  for (int k = 0; k < bins; ++k) {
    probs.push_back(mass(edges[k], edges[k + 1]));
    total += probs.back();
  }
  for (double& p : probs) p /= total;
  std::vector<long> observed(bins, 0);
  for (double v : samples) {
    const auto k = std::upper_bound(edges.begin(), edges.end(), v) - edges.begin() - 1;
    ++observed[std::clamp<long>(k, 0, bins - 1)];
  }
  return pointdiff::chi_square_test(observed, probs);
}

}  // namespace testsupport
