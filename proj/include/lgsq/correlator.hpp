#pragma once

// Two-time correlator C_ab(ell) of the coarse-grained sign operator.

#include <string_view>

#include "lgsq/core.hpp"
#include "lgsq/engines.hpp"
#include "lgsq/kernel.hpp"

namespace lgsq {

/// Bin width ell of the sign operator; infinity selects the sign of Q itself.
struct MeasurementSpec {
  double ell = 1.0;

  static MeasurementSpec infinite();
  bool is_infinite() const;
  /// Throws InvalidParameter unless ell > 0 (infinity allowed).
  void validate() const;
};

enum class Method { general_series, zero_angle_series, plateau, equal_time };

std::string_view method_name(Method m);

struct CorrelatorResult {
  double value = 0.0;
  double err_estimate = 0.0;
  Method method = Method::general_series;
};

/// Series over ell x ell cells of the Gaussian kernel.
///
/// Throws SingularConfiguration on the det M = 0 manifold and InvalidParameter for
/// ell = infinity. The engine argument overrides the automatic engine choice.
CorrelatorResult correlator_general(const SqueezeParams& a, const SqueezeParams& b,
                                    const MeasurementSpec& spec, const DecoherenceChannel& ch,
                                    const ToleranceConfig& tol = {},
                                    engine::Engine engine = engine::Engine::automatic);

/// Limit of real squeezing variables (both angles zero): a single series of erf
/// differences. Arguments are the amplitudes r_a, r_b >= 0. ell may be infinite.
CorrelatorResult correlator_zero_angle(double r_a, double r_b, const MeasurementSpec& spec,
                                       const ToleranceConfig& tol = {});

/// Same series for signed log-scales: the squeezing variable tanh(r) e^{2i phi} is
/// real with phi = 0 (scale r) or phi = pi/2 (scale -r).
CorrelatorResult correlator_real_squeezing(double s_a, double s_b, const MeasurementSpec& spec,
                                           const ToleranceConfig& tol = {});

/// ell -> infinity closed form. Throws SingularConfiguration, and BranchAmbiguity if
/// the arctanh argument lies on its branch cut.
CorrelatorResult correlator_plateau(const SqueezeParams& a, const SqueezeParams& b,
                                    const DecoherenceChannel& ch, const ToleranceConfig& tol = {});

/// Near-singular evaluation: phi_b is moved by delta and 4 delta, and the
/// sqrt(delta) leading behaviour is extrapolated away.
CorrelatorResult correlator_nudged(const SqueezeParams& a, const SqueezeParams& b,
                                   const MeasurementSpec& spec, const DecoherenceChannel& ch,
                                   const ToleranceConfig& tol = {}, double delta = 1e-4);

/// Dispatcher over equal-time, zero-angle, plateau and general evaluation.
CorrelatorResult correlator(const SqueezeParams& a, const SqueezeParams& b,
                            const MeasurementSpec& spec, const DecoherenceChannel& ch = {},
                            const ToleranceConfig& tol = {});

/// True when tanh(r) e^{2i phi} is real (r = 0, or phi reduced to 0 or pi/2).
bool has_real_squeezing(const SqueezeParams& p);

}  // namespace lgsq
