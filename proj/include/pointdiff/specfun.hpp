#pragma once

#include "pointdiff/common.hpp"

namespace pointdiff {

// ------------------------------------------------------------ heat kernel

/// g_t(x) = exp(-|x|^2 / (2t)) / (2 pi t).
double heat_kernel(double t, PlanarPoint x);
/// g_t evaluated at a point of modulus r.
double heat_kernel_radial(double t, double r);

// ------------------------------------------------------- Volterra function

/// nu(a) = int_0^inf a^s / Gamma(s+1) ds.
SpecialValue volterra_nu(double a, const QuadratureSpec& q = {});
/// nu'(a) = int_0^inf s a^(s-1) / Gamma(s+1) ds, a > 0.
SpecialValue volterra_nu_prime(double a, const QuadratureSpec& q = {});

/// Tabulated evaluations used inside nested quadratures. Accuracy is about
/// 1e-12 relative everywhere; arguments are given through their logarithm
/// so that arbitrarily small a never underflows.
namespace volterra {
/// nu(e^l).
double nu_log(double l);
/// a * nu'(a) at a = e^l.
double mu_log(double l);
/// nu(a) for a >= 0.
double nu(double a);
/// nu'(a) for a > 0.
double nu_prime(double a);
/// Untabulated reference quadratures (slow, used to build and check tables).
double nu_log_direct(double l);
double mu_log_direct(double l);
}  // namespace volterra

// ---------------------------------------------------- exponential integral

/// E1(x) = int_x^inf e^{-b} / b db.
double exp_integral_E1(double x);
/// E(x) = e^x E1(x).
double renorm_E(double x);

/// int_0^x nu'(b) E(x - b) db, which equals e^x. The 1/(b ln^2 b) behaviour
/// at b = 0 is integrated in w = -1/ln b and the logarithmic singularity of
/// E at b = x in ln(x - b).
double renewal_integral(double x);

// --------------------------------------------------------- Bessel functions

/// K_order(z) for order in {0, 1}, from its integral representation.
SpecialValue bessel_k(int order, double z, const QuadratureSpec& q = {});

/// Upper incomplete K_order(z, y) = 1/2 (z/2)^order int_y^inf a^(-order-1) e^{-a - z^2/(4a)} da.
SpecialValue incomplete_bessel_k(int order, double z, double y, const QuadratureSpec& q = {});

/// The complementary lower piece, 1/2 (z/2)^order int_0^y (same integrand).
SpecialValue incomplete_bessel_k_lower(int order, double z, double y,
                                       const QuadratureSpec& q = {});

namespace bessel {
/// Same integrals without tolerance bookkeeping; orders 0, 1, 2 are accepted.
/// `lo` may be 0 and `hi` may be +inf.
double k_integral(int order, double z, double lo, double hi);
/// log of the same integral, for values that underflow.
double log_k_integral(int order, double z, double lo, double hi);
/// Complete K_order(z) for order in {0, 1, 2}, from a table of ln K + z
/// against ln z built once from k_integral; direct outside [e^-30, 700].
double k_full(int order, double z);
/// e^{-x} I_0(x) and e^{-x} I_1(x) for x >= 0.
double i0e(double x);
double i1e(double x);
}  // namespace bessel

}  // namespace pointdiff
