#include "pointdiff/gof.hpp"

#include <algorithm>

#include "pointdiff/quadrature.hpp"

namespace pointdiff {

RadialTransitionLaw::RadialTransitionLaw(const DensityEval& d, double s, double t, double rx)
    : fam_(d.evaluator_ptr()),
      v_(d.theta(), rx, t - s, 1e-10),
      T_(d.horizon()),
      s_(s),
      t_(t),
      rx_(rx),
      hx_(fam_->h(d.horizon() - s, rx)) {
  if (!(s >= 0.0 && s < t && rx > 0.0)) throw DomainError("RadialTransitionLaw: need 0 <= s < t and |x| > 0");
}

double RadialTransitionLaw::density(double rho) const {
  if (rho <= 0.0) return 0.0;
  const double tau = t_ - s_;
  return rho * fam_->h(T_ - t_, rho) / hx_ * (kernel::ring_heat(tau, rx_, rho) + kTwoPi * v_(tau, rho));
}

double RadialTransitionLaw::mass(double a, double b) const {
  return quad([this](double rho) { return density(rho); }, a, b, 1e-10, 1e-300);
}

ChiSquareResult radial_chi_square(const RadialTransitionLaw& law, std::vector<double> radii, int bins) {
  if (bins < 2 || radii.size() < static_cast<std::size_t>(5 * bins)) {
    throw DomainError("radial_chi_square: need at least 5 samples per bin");
  }
  std::sort(radii.begin(), radii.end());
  const std::size_t n = radii.size();
  std::vector<double> edges{0.0};
  for (int k = 1; k < bins; ++k) edges.push_back(radii[k * n / bins]);
  edges.push_back(std::max(law.upper(), radii.back()));

  std::vector<double> probs;
  double total = 0.0;
  for (int k = 0; k < bins; ++k) {
    probs.push_back(law.mass(edges[k], edges[k + 1]));
    total += probs.back();
  }
  for (double& p : probs) p /= total;
  std::vector<long> observed(bins, 0);
  for (double r : radii) {
    const auto k = std::upper_bound(edges.begin(), edges.end(), r) - edges.begin() - 1;
    ++observed[std::clamp<long>(k, 0, bins - 1)];
  }
  return chi_square_test(observed, probs);
}

}  // namespace pointdiff
