#pragma once

// Gaussian kernel of the two-time correlator.
//
// C_ab = Re[ prefactor * sum_{n,m} (-1)^{n+m} \int\int_{cell} exp(q(Qt, Qb)) ]
// with q = c_tilde Qt^2 + c_bar Qb^2 + c_cross Qb Qt.

#include "lgsq/core.hpp"

namespace lgsq {

struct GaussKernel {
  cplx prefactor;
  cplx c_tilde;
  cplx c_bar;
  cplx c_cross;

  /// True when Re q is a negative definite form, i.e. the full-plane integral converges.
  bool integrable() const;
};

enum class CrossSign { paper_literal, physical_channel };

struct DecoherenceChannel {
  double xi = 0.0;
  CrossSign cross_sign = CrossSign::paper_literal;

  /// Throws InvalidParameter unless xi is finite and >= 0.
  void validate() const;
};

/// |det M| written through the polar forms, 128 rho_a rho_b |sin(theta_a - theta_b)|.
double det_m_magnitude(const SqueezeParams& a, const SqueezeParams& b);

/// Closed-form kernel for the pair (a, b).
///
/// Throws SingularConfiguration when |det M| < singular_threshold (equal
/// states, or both squeezing variables real); a limit formula applies there.
GaussKernel kernel_coefficients(const SqueezeParams& a, const SqueezeParams& b,
                                double singular_threshold = 1e-8);

/// Position-dephasing channel exp[-xi (Qt -+ Qb)^2 / 2] folded into the kernel.
GaussKernel apply_decoherence(const GaussKernel& k, const DecoherenceChannel& ch);

}  // namespace lgsq
