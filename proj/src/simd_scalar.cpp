#include <cmath>

#include "lgsq/simd.hpp"

namespace lgsq::simd {

cplx gauss_tensor_sum_scalar(const QuadForm& q, std::span<const double> xs,
                             std::span<const double> wx, std::span<const double> ys,
                             std::span<const double> wy) {
  double acc_re = 0.0;
  double acc_im = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double ax_re = q.ct.real() * x * x;
    const double ax_im = q.ct.imag() * x * x;
    const double bx_re = q.cx.real() * x;
    const double bx_im = q.cx.imag() * x;
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double y = ys[j];
      const double re = ax_re + q.cb.real() * y * y + bx_re * y;
      if (re < -708.0) continue;
      const double im = ax_im + q.cb.imag() * y * y + bx_im * y;
      const double mag = wx[i] * wy[j] * std::exp(re);
      acc_re += mag * std::cos(im);
      acc_im += mag * std::sin(im);
    }
  }
  return {acc_re, acc_im};
}

}  // namespace lgsq::simd
