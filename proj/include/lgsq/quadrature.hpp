#pragma once

#include <functional>
#include <span>
#include <vector>

#include "lgsq/core.hpp"

namespace lgsq::quad {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule (Newton iteration on P_n). Thread-safe.
const GaussRule& gauss_legendre(int n);

struct Estimate {
  cplx value{0.0, 0.0};
  double error = 0.0;
  int evaluations = 0;
};

using ComplexFn = std::function<cplx(double)>;

/// Globally adaptive Gauss-Kronrod (7/15) integration of a complex function on
/// [a, b]. Splits the interval with the largest error until the summed error
/// meets max(abs_tol, rel_tol * |I|). Throws ConvergenceFailure once
/// max_intervals is exceeded.
Estimate gauss_kronrod(const ComplexFn& f, double a, double b, double abs_tol, double rel_tol,
                       int max_intervals = 2000);

}  // namespace lgsq::quad
