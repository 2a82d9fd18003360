#include "lgsq/lgi.hpp"

#include <cmath>

#include "lgsq/errors.hpp"

namespace lgsq {
namespace {

Classification classify(double k, double margin) {
  if (k > 1.0 + margin) return Classification::upper_violation;
  if (k < -3.0 - margin) return Classification::lower_violation;
  return Classification::classical;
}

}  // namespace

void Protocol3::validate() const {
  spec.validate();
  channel.validate();
}

std::string_view classification_name(Classification c) {
  switch (c) {
    case Classification::classical:
      return "classical";
    case Classification::upper_violation:
      return "upper_violation";
    case Classification::lower_violation:
      return "lower_violation";
  }
  return "unknown";
}

LgiStrings strings_from_correlators(double c_ab, double c_bc, double c_ac, double margin) {
  if (!(margin >= 0.0)) throw InvalidParameter("margin must be >= 0");
  LgiStrings s;
  s.k3 = c_ab + c_bc - c_ac;
  s.k3_prime = -c_ab - c_bc - c_ac;
  s.margin = margin;
  s.k3_class = classify(s.k3, margin);
  s.k3_prime_class = classify(s.k3_prime, margin);
  return s;
}

LgiStrings k3_protocol(const Protocol3& p, const ToleranceConfig& tol, double margin_factor) {
  p.validate();
  const CorrelatorResult ab = correlator(p.a, p.b, p.spec, p.channel, tol);
  const CorrelatorResult bc = correlator(p.b, p.c, p.spec, p.channel, tol);
  const CorrelatorResult ac = correlator(p.a, p.c, p.spec, p.channel, tol);
  const double err = ab.err_estimate + bc.err_estimate + ac.err_estimate;
  LgiStrings s = strings_from_correlators(ab.value, bc.value, ac.value, margin_factor * err);
  s.error = err;
  return s;
}

double qubit_k3(double omega_tau) { return 2.0 * std::cos(omega_tau) - std::cos(2.0 * omega_tau); }

}  // namespace lgsq
