#pragma once

#include <cstdint>
#include <vector>

#include "pointdiff/doob.hpp"
#include "pointdiff/sampler.hpp"

namespace pointdiff {

/// Law of |Y| for Y ~ d_{s,t}(x, .), obtained by integrating the density
/// over angles. Support is truncated at |x| + 14 sqrt(t - s).
class RadialTransitionLaw {
 public:
  RadialTransitionLaw(const DensityEval& d, double s, double t, double rx);

  double density(double rho) const;
  double mass(double a, double b) const;
  double upper() const { return rx_ + 14.0 * std::sqrt(t_ - s_); }

 private:
  std::shared_ptr<const Family> fam_;
  kernel::RadialInteraction v_;
  double T_, s_, t_, rx_, hx_;
};

/// Pearson test of radii against the radial law, with `bins` cells cut at
/// the empirical quantiles of the sample.
ChiSquareResult radial_chi_square(const RadialTransitionLaw& law, std::vector<double> radii, int bins = 20);

}  // namespace pointdiff
