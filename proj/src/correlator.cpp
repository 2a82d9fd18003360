#include "lgsq/correlator.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "lgsq/errors.hpp"

namespace lgsq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const double kRightAngle = reduce_angle(kPi / 2);

// erf(b) - erf(a) without cancellation in the tails.
double erf_diff(double a, double b) {
  if (a >= 0.0 && b >= 0.0) return std::erfc(a) - std::erfc(b);
  if (a <= 0.0 && b <= 0.0) return std::erfc(-b) - std::erfc(-a);
  return std::erf(b) - std::erf(a);
}

int parity(long long n) { return (n % 2 == 0) ? 1 : -1; }

double real_scale(const SqueezeParams& p) { return p.phi() == kRightAngle ? -p.r() : p.r(); }

}  // namespace

MeasurementSpec MeasurementSpec::infinite() { return {kInf}; }

bool MeasurementSpec::is_infinite() const { return std::isinf(ell) && ell > 0.0; }

void MeasurementSpec::validate() const {
  if (std::isnan(ell) || !(ell > 0.0)) throw InvalidParameter("ell must be > 0");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::general_series:
      return "general_series";
    case Method::zero_angle_series:
      return "zero_angle_series";
    case Method::plateau:
      return "plateau";
    case Method::equal_time:
      return "equal_time";
  }
  return "unknown";
}

bool has_real_squeezing(const SqueezeParams& p) {
  return p.r() == 0.0 || p.phi() == 0.0 || p.phi() == kRightAngle;
}

CorrelatorResult correlator_general(const SqueezeParams& a, const SqueezeParams& b,
                                    const MeasurementSpec& spec, const DecoherenceChannel& ch,
                                    const ToleranceConfig& tol, engine::Engine engine) {
  spec.validate();
  ch.validate();
  tol.validate();
  if (spec.is_infinite()) throw InvalidParameter("the general series needs a finite ell");
  const GaussKernel k = apply_decoherence(kernel_coefficients(a, b, tol.singular_threshold), ch);
  const double scale = std::abs(k.prefactor);
  const engine::SeriesSum s = engine::alternating_sum(k, spec.ell, tol.series_tail_tol / scale,
                                                      tol.quadrature_rel_tol, tol.max_terms, engine);
  return {(k.prefactor * s.value).real(), scale * s.error, Method::general_series};
}

CorrelatorResult correlator_real_squeezing(double s_a, double s_b, const MeasurementSpec& spec,
                                           const ToleranceConfig& tol) {
  spec.validate();
  tol.validate();
  if (!std::isfinite(s_a) || !std::isfinite(s_b)) throw InvalidParameter("scales must be finite");
  if (spec.is_infinite() || s_a == s_b) return {1.0, 0.0, Method::zero_angle_series};
  // The bin map below assumes the Q-tilde cells are the narrower ones after
  // rescaling; the correlator is symmetric, so order the pair.
  if (s_a > s_b) std::swap(s_a, s_b);
  const double ell = spec.ell;
  const double ea = std::exp(s_a);
  const double eb = std::exp(s_b);
  const double ratio = std::exp(s_a - s_b);

  // Terms with |e^{s_a} n ell| beyond the erfc radius are below tolerance.
  double radius = 1.0;
  while (std::erfc(radius) > 0.25 * tol.series_tail_tol) radius += 0.5;
  const double n_max = std::ceil(radius / (ea * ell)) + 1.0;
  if (n_max > tol.max_terms) {
    throw ConvergenceFailure("zero-angle series needs more than max_terms terms");
  }
  const auto N = static_cast<long long>(n_max);

  double sum = 0.0;
  double comp = 0.0;
  for (long long n = -N; n <= N; ++n) {
    const auto k = static_cast<long long>(std::floor(ratio * static_cast<double>(n)));
    const double a0 = ea * static_cast<double>(n) * ell;
    const double a1 = ea * static_cast<double>(n + 1) * ell;
    double cn;
    if (std::exp(s_b - s_a) * static_cast<double>(k + 1) < static_cast<double>(n + 1)) {
      const double edge = eb * static_cast<double>(k + 1) * ell;
      cn = 0.5 * parity(k) * (erf_diff(a0, edge) - erf_diff(edge, a1));
    } else {
      cn = 0.5 * parity(k) * erf_diff(a0, a1);
    }
    const double term = parity(n) * cn - comp;
    const double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  const double tail = std::erfc(ea * static_cast<double>(N) * ell);
  return {sum, tail + 1e-15 * static_cast<double>(2 * N + 1), Method::zero_angle_series};
}

CorrelatorResult correlator_zero_angle(double r_a, double r_b, const MeasurementSpec& spec,
                                       const ToleranceConfig& tol) {
  if (!(r_a >= 0.0) || !(r_b >= 0.0)) throw InvalidParameter("squeezing amplitudes must be >= 0");
  return correlator_real_squeezing(r_a, r_b, spec, tol);
}

CorrelatorResult correlator_plateau(const SqueezeParams& a, const SqueezeParams& b,
                                    const DecoherenceChannel& ch, const ToleranceConfig& tol) {
  ch.validate();
  tol.validate();
  const GaussKernel k = apply_decoherence(kernel_coefficients(a, b, tol.singular_threshold), ch);
  const std::optional<cplx> quadrants = engine::signed_quadrant_integral(k);
  if (!quadrants) throw BranchAmbiguity("plateau arctanh argument lies on its branch cut");
  const cplx v = k.prefactor * *quadrants;
  return {v.real(), 1e-14 * std::max(1.0, std::abs(v)), Method::plateau};
}

CorrelatorResult correlator_nudged(const SqueezeParams& a, const SqueezeParams& b,
                                   const MeasurementSpec& spec, const DecoherenceChannel& ch,
                                   const ToleranceConfig& tol, double delta) {
  if (!(delta > 0.0)) throw InvalidParameter("nudge must be positive");
  auto eval = [&](double d) {
    const SqueezeParams bd(b.r(), b.phi() + d);
    return spec.is_infinite() ? correlator_plateau(a, bd, ch, tol)
                              : correlator_general(a, bd, spec, ch, tol);
  };
  // Near the det M = 0 manifold C(delta) = C0 + c sqrt(delta) + O(delta).
  const CorrelatorResult near = eval(delta);
  const CorrelatorResult far = eval(4.0 * delta);
  CorrelatorResult out;
  out.value = 2.0 * near.value - far.value;
  out.err_estimate = std::abs(near.value - far.value) + 2.0 * near.err_estimate + far.err_estimate;
  out.method = near.method;
  return out;
}

CorrelatorResult correlator(const SqueezeParams& a, const SqueezeParams& b,
                            const MeasurementSpec& spec, const DecoherenceChannel& ch,
                            const ToleranceConfig& tol) {
  spec.validate();
  ch.validate();
  tol.validate();
  if (a == b && ch.xi == 0.0) return {1.0, 0.0, Method::equal_time};
  if (has_real_squeezing(a) && has_real_squeezing(b)) {
    if (ch.xi > 0.0) {
      throw UnsupportedCombination(
          "the zero-angle series has no decoherence variant; use correlator_nudged explicitly");
    }
    return correlator_real_squeezing(real_scale(a), real_scale(b), spec, tol);
  }
  if (det_m_magnitude(a, b) < tol.singular_threshold) return correlator_nudged(a, b, spec, ch, tol);
  if (spec.is_infinite()) return correlator_plateau(a, b, ch, tol);
  return correlator_general(a, b, spec, ch, tol);
}

}  // namespace lgsq
