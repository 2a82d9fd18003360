#include "lgsq/kernel.hpp"

#include <cmath>
#include <string>

#include "lgsq/errors.hpp"

namespace lgsq {

bool GaussKernel::integrable() const {
  const double a = 2.0 * c_tilde.real();
  const double d = 2.0 * c_bar.real();
  const double b = c_cross.real();
  return a < 0.0 && d < 0.0 && a * d - b * b > 0.0;
}

void DecoherenceChannel::validate() const {
  if (!std::isfinite(xi) || xi < 0.0) {
    throw InvalidParameter("decoherence strength xi must be finite and >= 0");
  }
}

double det_m_magnitude(const SqueezeParams& a, const SqueezeParams& b) {
  const PolarForm pa = polar_decompose(a);
  const PolarForm pb = polar_decompose(b);
  return 128.0 * pa.rho * pb.rho * std::abs(std::sin(pa.theta - pb.theta));
}

GaussKernel kernel_coefficients(const SqueezeParams& a, const SqueezeParams& b,
                                double singular_threshold) {
  const PolarForm pa = polar_decompose(a);
  const PolarForm pb = polar_decompose(b);
  const double delta = pa.theta - pb.theta;
  const double s = std::sin(delta);
  if (128.0 * pa.rho * pb.rho * std::abs(s) < singular_threshold) {
    throw SingularConfiguration("det M vanishes for (r_a, phi_a) = (" + std::to_string(a.r()) +
                                ", " + std::to_string(a.phi()) + "), (r_b, phi_b) = (" +
                                std::to_string(b.r()) + ", " + std::to_string(b.phi()) + ")");
  }
  const cplx I(0.0, 1.0);
  const double cot_half = 0.5 * std::cos(delta) / s;
  const double ch = std::cosh(a.r()) * std::cosh(b.r());

  GaussKernel k;
  k.c_tilde = 0.5 - std::cos(pa.theta) / pa.rho +
              I * (-std::sin(pa.theta) / pa.rho + std::cos(pb.theta) / (pa.rho * s) - cot_half);
  k.c_bar = 0.5 - std::cos(pb.theta) / pb.rho +
            I * (std::sin(pb.theta) / pb.rho + std::cos(pa.theta) / (pb.rho * s) - cot_half);
  k.c_cross = -I / (pa.rho * pb.rho * s * ch);
  // (i sin delta)^(-1/2) on the principal branch; for sin delta > 0 this is
  // exp(-i pi/4) sin^(-1/2), for sin delta < 0 it is exp(+i pi/4) |sin|^(-1/2).
  const cplx phase = std::polar(1.0, 0.5 * delta);
  k.prefactor = phase / std::sqrt(I * s) / (kPi * std::sqrt(2.0) * pa.rho * pb.rho * ch);
  return k;
}

GaussKernel apply_decoherence(const GaussKernel& k, const DecoherenceChannel& ch) {
  ch.validate();
  GaussKernel out = k;
  out.c_tilde -= 0.5 * ch.xi;
  out.c_bar -= 0.5 * ch.xi;
  out.c_cross += ch.cross_sign == CrossSign::paper_literal ? -ch.xi : ch.xi;
  return out;
}

}  // namespace lgsq
