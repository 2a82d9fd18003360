#pragma once

#include <complex>
#include <numbers>

namespace lgsq {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Squeezing amplitude and angle of the state at one measurement time.
///
/// The state depends on the angle only through exp(2i phi), so the angle is
/// stored reduced to (-pi/2, pi/2].
class SqueezeParams {
 public:
  /// Throws InvalidParameter if r < 0 or either argument is not finite.
  SqueezeParams(double r, double phi);

  double r() const { return r_; }
  double phi() const { return phi_; }

  /// z = exp(2i phi) tanh r, the complex squeezing variable (|z| < 1).
  cplx z() const;

  friend bool operator==(const SqueezeParams&, const SqueezeParams&) = default;

 private:
  double r_;
  double phi_;
};

/// Reduces an angle to (-pi/2, pi/2].
double reduce_angle(double phi);

/// rho * exp(i theta) = 1 - tanh(r) exp(2i phi).
struct PolarForm {
  double rho;
  double theta;
};

PolarForm polar_decompose(const SqueezeParams& p);

/// Numeric tolerances shared by every evaluation path.
struct ToleranceConfig {
  double series_tail_tol = 1e-10;
  double quadrature_rel_tol = 1e-8;
  double singular_threshold = 1e-8;
  int max_terms = 10000;

  /// Throws InvalidParameter unless all tolerances are positive and max_terms >= 1.
  void validate() const;
};

}  // namespace lgsq
