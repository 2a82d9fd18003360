#pragma once

// Evaluators for the alternating cell sum
//
//   S(ell) = sum_{n,m} (-1)^{n+m} \int_{n ell}^{(n+1) ell} \int_{m ell}^{(m+1) ell} exp(q(x, y)) dy dx
//
// with q(x, y) = c_tilde x^2 + c_bar y^2 + c_cross x y. The correlator is Re[prefactor * S].
//
// Three independent engines compute the same quantity:
//   fourier        square-wave Fourier expansion; every term is a closed-form Gaussian
//                  integral, so the cost falls as ell shrinks.
//   rectangles     adaptive tensor Gauss-Legendre on each cell (the SIMD inner loop).
//   semi_analytic  the y integral done in closed form (erf), the x integral along
//                  steepest-descent rays; robust for strongly oscillating kernels.
//   closed_form    once ell exceeds the Gaussian support only the four cells
//                  around the origin survive, and their sum is an arctanh.
// The automatic choice takes closed_form when it applies and otherwise the
// cheapest of the rest by an a-priori cost model.

#include <cstdint>
#include <optional>
#include <string_view>

#include "lgsq/core.hpp"
#include "lgsq/kernel.hpp"
#include "lgsq/simd.hpp"

namespace lgsq::engine {

enum class Engine { automatic, fourier, rectangles, semi_analytic, closed_form };

std::string_view engine_name(Engine e);

struct SeriesSum {
  cplx value{0.0, 0.0};
  double error = 0.0;  // absolute bound on |S - value|
  std::int64_t evaluations = 0;
  Engine engine = Engine::automatic;
};

/// Work estimates in units of one vectorised complex exponential; infinite when the engine cannot
/// meet the tolerance within max_terms.
struct CostModel {
  double fourier;
  double rectangles;
  double semi_analytic;
};

CostModel estimate_costs(const GaussKernel& k, double ell, double abs_tol, int max_terms);

/// Picks the engine with the lowest estimated cost.
Engine choose_engine(const GaussKernel& k, double ell, double abs_tol, int max_terms);

/// \int\int sign(x) sign(y) exp(q) over the plane, -4 artanh(w) / root with
/// root = sqrt(c_cross^2 - 4 c_tilde c_bar) and w = c_cross / root on principal
/// branches. Empty when w lies on the artanh branch cut.
std::optional<cplx> signed_quadrant_integral(const GaussKernel& k);

/// Evaluates S with the requested engine. abs_tol bounds the truncation error
/// of the infinite sums; rel_tol is the per-cell quadrature tolerance of the
/// rectangle engine. Throws ConvergenceFailure if the engine's budget is exceeded,
/// InvalidParameter if the kernel is not integrable or ell is not positive, and
/// UnsupportedCombination if closed_form is forced where it does not apply.
SeriesSum alternating_sum(const GaussKernel& k, double ell, double abs_tol, double rel_tol,
                          int max_terms, Engine engine = Engine::automatic);

/// \int_{x0}^{x1} \int_{y0}^{y1} exp(q) by adaptive tensor Gauss-Legendre.
///
/// Panels start no wider than the local oscillation length of q and are split
/// dyadically until a 12-point and an 8-point rule agree to
/// max(abs_tol, rel_tol |I|). Throws ConvergenceFailure beyond max_depth.
cplx rectangle_integral(const simd::QuadForm& q, double x0, double x1, double y0, double y1,
                        double rel_tol, double abs_tol = 0.0, int max_depth = 20,
                        double* error_out = nullptr);

/// Radius X with scale * erfc(sqrt(c) X) <= tol (0 if scale <= tol); c > 0.
double gaussian_tail_radius(double c, double scale, double tol);

}  // namespace lgsq::engine
