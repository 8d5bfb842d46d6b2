#pragma once

#include <cstdint>
#include <memory>

#include "pointdiff/common.hpp"
#include "pointdiff/doob.hpp"
#include "pointdiff/families.hpp"
#include "pointdiff/sampler.hpp"

namespace pointdiff {

/// Evaluation context for the space-time harmonic map
///   H_t(x) = (x h0 * g_t)(x) / h_t(x) = Hbar_t(|x|) x.
class HEval {
 public:
  explicit HEval(const FamilySpec& family, const QuadratureSpec& quad = {});

  const FamilySpec& family() const { return family_; }
  const QuadratureSpec& quad() const { return quad_; }
  const Family& evaluator() const { return *fam_; }

  /// Radial profile Hbar_t(r) = [B_t(r) + t B_t'(r) / r] / h_t(r), where
  /// B_t = h0 * g_t.
  double profile(double t, double r) const;
  /// d Hbar_t / dr, analytic.
  double profile_dr(double t, double r) const;

 private:
  FamilySpec family_;
  QuadratureSpec quad_;
  std::shared_ptr<const Family> fam_;
};

struct JacobianEigs {
  double lambda_radial = 0.0;
  double lambda_tangential = 0.0;
};

/// H_t(x); H_t(0) = 0.
PlanarPoint h_map(const HEval& e, double t, PlanarPoint x);

/// Eigenvalues of DH_t(x): Hbar + r Hbar' along x-hat and Hbar across it.
JacobianEigs jacobian_eigs(const HEval& e, double t, PlanarPoint x);

/// Solves r Hbar_t(r) = |y| by bracketing bisection and Newton polish and
/// returns r y-hat. Raises HypothesisViolation (carrying the bracket) when
/// r Hbar_t(r) is not strictly increasing on the bracket or no bracket exists.
PlanarPoint h_map_inverse(const HEval& e, double t, PlanarPoint y);

struct HarmonicityResidual {
  double h_residual = 0.0;  // |int K_{t-s}(x,y) h_{T-t}(y) dy - h_{T-s}(x)| / h_{T-s}(x)
  double H_residual = 0.0;  // |int d_{s,t}(x,y) H_{T-t}(y) dy - H_{T-s}(x)| / |H_{T-s}(x)|
};

/// Both residuals reduce to radial quadratures. In the H identity the
/// interaction term integrates to zero against the odd field y Hbar(|y|),
/// so only the Gaussian part is integrated.
HarmonicityResidual harmonicity_residual(const HEval& e, double s, double t, PlanarPoint x);

/// Monte Carlo estimate of E|H_{T-t}(Y) - H_{T-s}(x)|^{2m} / (t - s)^m with
/// Y ~ d_{s,t}(x, .), m in {1, 2}.
McEstimate moment_scaling_probe(const HEval& e, int m, double s, double t, PlanarPoint x, long n_paths,
                                std::uint64_t seed, int workers = 1);

}  // namespace pointdiff
