#pragma once

#include "lgsq/core.hpp"

namespace lgsq::special {

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
///
/// Weideman's rational expansion (N = 40) in the upper half plane, reflected
/// into the lower half plane. Relative accuracy is ~1e-14 for Im z >= 0; in the
/// lower half plane w grows like exp(-z^2) and is only as accurate as that term.
cplx faddeeva_w(cplx z);

/// Complex error function. Uses the Taylor series near the origin and
/// erf(z) = sgn(Re z) (1 - exp(-z^2) w(i sgn(Re z) z)) elsewhere.
cplx erf(cplx z);

/// erfc(z) for Re z >= 0 written as exp(-z^2) w(iz), the form that stays
/// bounded along the Fresnel diagonals.
cplx erfc_right(cplx z);

/// Integral of exp(kappa x^2) over the real interval [u, v] for Re kappa < 0.
cplx gauss_interval(cplx kappa, double u, double v);

}  // namespace lgsq::special
