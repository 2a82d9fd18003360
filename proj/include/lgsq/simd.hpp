#pragma once

// Data-parallel inner loops of the rectangle quadrature.
//
// Every kernel has a scalar reference implementation (std::exp, std::sin,
// std::cos) and, on x86-64, an AVX2+FMA implementation with its own
// polynomial exp/sincos. The active variant is picked once at startup from
// CPUID; LGSQ_SIMD=scalar|avx2 in the environment overrides the choice.

#include <span>
#include <string_view>

#include "lgsq/core.hpp"

namespace lgsq::simd {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);

/// True when the variant is compiled in and supported by this CPU.
bool backend_available(Backend b);

/// Variant used by the dispatching entry points.
Backend active_backend();

/// Overrides the active variant (tests, benchmarks). Not thread-safe: call
/// before worker threads start. Throws InvalidParameter if unavailable.
void set_backend(Backend b);

/// Coefficients of q(x, y) = ct x^2 + cb y^2 + cx x y.
struct QuadForm {
  cplx ct;
  cplx cb;
  cplx cx;
};

/// sum_i sum_j wx[i] wy[j] exp(q(xs[i], ys[j])).
///
/// xs/wx and ys/wy must have equal lengths. Terms whose real exponent is below
/// -708 contribute exactly zero in every variant.
cplx gauss_tensor_sum(const QuadForm& q, std::span<const double> xs, std::span<const double> wx,
                      std::span<const double> ys, std::span<const double> wy);

cplx gauss_tensor_sum_scalar(const QuadForm& q, std::span<const double> xs,
                             std::span<const double> wx, std::span<const double> ys,
                             std::span<const double> wy);

#if defined(__x86_64__) || defined(_M_X64)
cplx gauss_tensor_sum_avx2(const QuadForm& q, std::span<const double> xs, std::span<const double> wx,
                           std::span<const double> ys, std::span<const double> wy);

/// Lane-wise exp and sincos used by the AVX2 kernel, exposed for accuracy tests.
/// Each array holds four doubles.
void exp4_avx2(const double* in, double* out);
void sincos4_avx2(const double* in, double* sin_out, double* cos_out);
#endif

}  // namespace lgsq::simd
