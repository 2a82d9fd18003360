#include "lgsq/core.hpp"

#include <cmath>
#include <string>

#include "lgsq/errors.hpp"

namespace lgsq {

double reduce_angle(double phi) {
  // remainder() maps to [-pi/2, pi/2]; fold the lower endpoint up.
  double reduced = std::remainder(phi, kPi);
  if (reduced <= -kPi / 2) reduced += kPi;
  return reduced;
}

SqueezeParams::SqueezeParams(double r, double phi) {
  if (!std::isfinite(r) || !std::isfinite(phi)) {
    throw InvalidParameter("squeeze parameters must be finite");
  }
  if (r < 0.0) {
    throw InvalidParameter("squeezing amplitude r must be >= 0, got " + std::to_string(r));
  }
  r_ = r;
  phi_ = reduce_angle(phi);
}

cplx SqueezeParams::z() const { return std::polar(std::tanh(r_), 2.0 * phi_); }

PolarForm polar_decompose(const SqueezeParams& p) {
  // 1 - z written with a cancellation-free real part: 1 - t cos 2phi > 0.
  const double t = std::tanh(p.r());
  const double re = 1.0 - t * std::cos(2.0 * p.phi());
  const double im = -t * std::sin(2.0 * p.phi());
  return {std::hypot(re, im), std::atan2(im, re)};
}

void ToleranceConfig::validate() const {
  if (!(series_tail_tol > 0.0) || !(quadrature_rel_tol > 0.0) || !(singular_threshold > 0.0)) {
    throw InvalidParameter("tolerances must be strictly positive");
  }
  if (max_terms < 1) throw InvalidParameter("max_terms must be >= 1");
}

}  // namespace lgsq
