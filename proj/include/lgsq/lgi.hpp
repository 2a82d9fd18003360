#pragma once
// Three-time Leggett-Garg strings
//
//   K3  =  C_ab + C_bc - C_ac
//   K3' = -C_ab - C_bc - C_ac
//
// Both are confined to [-3, 1] by any macrorealist model.

#include <string_view>

#include "lgsq/core.hpp"
#include "lgsq/correlator.hpp"
#include "lgsq/kernel.hpp"

namespace lgsq {

/// Measurement configurations at the three times t_a, t_b, t_c.
struct Protocol3 {
  SqueezeParams a;
  SqueezeParams b;
  SqueezeParams c;
  MeasurementSpec spec;
  DecoherenceChannel channel;

  void validate() const;
};

enum class Classification { classical, upper_violation, lower_violation };

std::string_view classification_name(Classification c);

struct LgiStrings {
  double k3 = 0.0;
  double k3_prime = 0.0;
  Classification k3_class = Classification::classical;
  Classification k3_prime_class = Classification::classical;
  double error = 0.0;   // propagated absolute error of either string
  double margin = 0.0;  // a bound is only reported broken beyond this distance
};

/// Strings and classification; a string counts as violating only when it
/// leaves [-3 - margin, 1 + margin].
LgiStrings strings_from_correlators(double c_ab, double c_bc, double c_ac, double margin = 0.0);

/// Correlators through the dispatcher, then the strings. The error is the sum
/// of the three correlator error estimates and the margin is margin_factor times it.
LgiStrings k3_protocol(const Protocol3& p, const ToleranceConfig& tol = {},
                       double margin_factor = 3.0);

/// Two-level reference model, 2 cos(w tau) - cos(2 w tau).
double qubit_k3(double omega_tau);

}  // namespace lgsq
