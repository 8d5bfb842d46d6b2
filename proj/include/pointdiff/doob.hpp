#pragma once

#include <memory>

#include "pointdiff/chebyshev.hpp"
#include "pointdiff/common.hpp"
#include "pointdiff/families.hpp"
#include "pointdiff/kernel.hpp"

namespace pointdiff {

/// Bundles a driving family with the kernel it transforms. The two share
/// theta; construction enforces it.
class DensityEval {
 public:
  explicit DensityEval(const FamilySpec& family, const QuadratureSpec& quad = {});
  DensityEval(const FamilySpec& family, const KernelParams& kernel, const QuadratureSpec& quad);

  const FamilySpec& family() const { return family_; }
  const KernelParams& kernel() const { return kernel_; }
  const QuadratureSpec& quad() const { return quad_; }
  const Family& evaluator() const { return *fam_; }
  std::shared_ptr<const Family> evaluator_ptr() const { return fam_; }
  double theta() const { return family_.theta; }
  double horizon() const { return family_.horizon_T; }

 private:
  FamilySpec family_;
  KernelParams kernel_;
  QuadratureSpec quad_;
  std::shared_ptr<const Family> fam_;
};

struct DensityValue {
  double value = 0.0;
  bool approximate = false;
};

/// d_{s,t}(x, y) = h_{T-t}(y) / h_{T-s}(x) * K_{t-s}(x, y).
/// x = 0 is handled through the radial limit (see transition_density_from_origin);
/// y = 0 raises DivergenceError.
double transition_density(const DensityEval& d, double s, double t, PlanarPoint x, PlanarPoint y);

/// Limit of d_{s,t}(x, y) as x -> 0, extrapolated from |x| in
/// {1e-4, 5e-5, 2.5e-5} (averaged over +-x) in the variable |x|^2. Always
/// flagged approximate.
DensityValue transition_density_from_origin(const DensityEval& d, double s, double t, PlanarPoint y);

/// Density of the survival-conditioned motion:
/// (h0 * g_{T-t})(y) / (h0 * g_{T-s})(x) * g_{t-s}(x - y).
double conditional_density(const DensityEval& d, double s, double t, PlanarPoint x, PlanarPoint y);

/// p_t(x) = (h0 * g_t)(x) / h_t(x); 0 at the origin.
double survival_probability(const DensityEval& d, double t, PlanarPoint x);

/// Law of the hitting time of the origin from x0 under the Doob-transformed
/// measure. The density is conditional on hitting before T.
class HitLaw {
 public:
  HitLaw(const DensityEval& d, PlanarPoint x0);

  PlanarPoint x0() const { return x0_; }
  double survive_prob() const { return survive_; }
  double horizon() const { return horizon_; }
  /// True when the law depends on the Dirac cutoff.
  bool cutoff_dependent() const { return cutoff_dependent_; }

  double density(double t) const;
  double cdf(double t) const;
  /// Inverse CDF by bisection to 1e-10 in CDF value.
  double quantile(double u) const;
  /// int_0^T density, by adaptive quadrature independent of the CDF table.
  double total_mass(double rel_tol = 1e-12) const;

 private:
  double cdf_direct(double t) const;
  double xi_of(double t) const;
  double t_of(double xi) const;

  std::shared_ptr<const Family> fam_;
  PlanarPoint x0_;
  double r_ = 0.0;
  double horizon_ = 0.0;
  double survive_ = 0.0;
  double norm_ = 0.0;  // V_T(x0)
  bool cutoff_dependent_ = false;
  double xi_lo_ = 0.0;
  double xi_hi_ = 0.0;
  double cdf_scale_ = 1.0;
  ChebyshevTable cdf_table_;
};

HitLaw hit_time_law(const DensityEval& d, PlanarPoint x0);

/// dP^h / dP^hbar on paths from x0 to xT over [0, T]:
/// [h0(xT) / hbar0(xT)] * [hbar_T(x0) / h_T(x0)].
double rn_derivative(const DensityEval& dh, const DensityEval& dhbar, PlanarPoint x0, PlanarPoint xT);

/// grad log (h0 * g_t)(x), the drift of the survival-conditioned motion at
/// remaining time t.
DriftVector conditional_drift(const DensityEval& d, double t, PlanarPoint x);

/// h_{T-t}(x) / (h0 * g_{T-t})(x) = 1 / p_{T-t}(x).
double reweighting_factor(const DensityEval& d, double t, PlanarPoint x);

// ------------------------------------------------------------- diagnostics

/// |int d_{s,t}(x, y) dy - 1|, the y-integral in polar coordinates.
double normalization_residual(const DensityEval& d, double s, double t, PlanarPoint x);

/// Relative Chapman-Kolmogorov residual of d at s < u < t. The h factors of
/// the intermediate point cancel, so this is the kernel's semigroup residual.
double chapman_kolmogorov_residual(const DensityEval& d, double s, double u, double t, PlanarPoint x,
                                   PlanarPoint y);

/// Finite-difference residual of the forward equation in (t, y), relative
/// to the largest term.
double forward_equation_residual(const DensityEval& d, double s, double t, PlanarPoint x, PlanarPoint y);

/// Finite-difference residual of dp/dt = 1/2 Lap p + b . grad p, relative.
double survival_pde_residual(const DensityEval& d, double t, PlanarPoint x);

/// Relative gap between grad p (finite differences) and p (b_conditional - b).
double survival_gradient_residual(const DensityEval& d, double t, PlanarPoint x);

}  // namespace pointdiff
