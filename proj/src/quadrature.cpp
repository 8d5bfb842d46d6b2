#include "pointdiff/quadrature.hpp"

namespace pointdiff {

void QuadratureSpec::validate() const {
  if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0) || abs_tol + rel_tol <= 0.0) {
    throw DomainError("QuadratureSpec: tolerances must be nonnegative with a positive sum");
  }
  if (max_subdivisions <= 0) throw DomainError("QuadratureSpec: max_subdivisions must be positive");
}

QuadratureSpec QuadratureSpec::scaled(double factor) const {
  QuadratureSpec out = *this;
  out.abs_tol *= factor;
  out.rel_tol *= factor;
  return out;
}

}  // namespace pointdiff
