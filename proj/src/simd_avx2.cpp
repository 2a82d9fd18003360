// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include <algorithm>
#include <array>
#include <cstdint>

#include "lgsq/simd.hpp"

namespace lgsq::simd {
namespace {

// exp: Cody-Waite reduction by ln 2 and a (3,3) Pade-type rational on |r| <= ln2/2.
inline __m256d exp_pd(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125e-1), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212e-6), r);
  const __m256d rr = _mm256_mul_pd(r, r);

  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);
  __m256d qd = _mm256_set1_pd(3.00198505138664455042e-6);
  qd = _mm256_fmadd_pd(qd, rr, _mm256_set1_pd(2.52448340349684104192e-3));
  qd = _mm256_fmadd_pd(qd, rr, _mm256_set1_pd(2.27265548208155028766e-1));
  qd = _mm256_fmadd_pd(qd, rr, _mm256_set1_pd(2.00000000000000000009e0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(qd, p));
  e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  // Scale by 2^n through the exponent field.
  const __m128i n32 = _mm256_cvtpd_epi32(n);
  const __m256i n64 = _mm256_cvtepi32_epi64(n32);
  const __m256i bits = _mm256_add_epi64(_mm256_castpd_si256(e), _mm256_slli_epi64(n64, 52));
  const __m256d scaled = _mm256_castsi256_pd(bits);
  return _mm256_andnot_pd(underflow, scaled);
}

// sin and cos: reduction by pi/2 with a three-part split, minimax polynomials on [-pi/4, pi/4].
inline void sincos_pd(__m256d x, __m256d& s_out, __m256d& c_out) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d sign_x = _mm256_and_pd(x, sign_mask);
  const __m256d ax = _mm256_andnot_pd(sign_mask, x);

  // Quadrant index k = round(|x| * 2/pi); z = |x| - k pi/2.
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(ax, _mm256_set1_pd(0.63661977236758134308)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d z = _mm256_fnmadd_pd(k, _mm256_set1_pd(2.0 * 7.85398125648498535156e-1), ax);
  z = _mm256_fnmadd_pd(k, _mm256_set1_pd(2.0 * 3.77489470793079817668e-8), z);
  z = _mm256_fnmadd_pd(k, _mm256_set1_pd(2.0 * 2.69515142907905952645e-15), z);
  const __m256d zz = _mm256_mul_pd(z, z);

  __m256d ps = _mm256_set1_pd(1.58962301576546568060e-10);
  ps = _mm256_fmadd_pd(ps, zz, _mm256_set1_pd(-2.50507477628578072866e-8));
  ps = _mm256_fmadd_pd(ps, zz, _mm256_set1_pd(2.75573136213857245213e-6));
  ps = _mm256_fmadd_pd(ps, zz, _mm256_set1_pd(-1.98412698295895385996e-4));
  ps = _mm256_fmadd_pd(ps, zz, _mm256_set1_pd(8.33333333332211858878e-3));
  ps = _mm256_fmadd_pd(ps, zz, _mm256_set1_pd(-1.66666666666666307295e-1));
  const __m256d sin_z = _mm256_fmadd_pd(_mm256_mul_pd(ps, zz), z, z);

  __m256d pc = _mm256_set1_pd(-1.13585365213876817300e-11);
  pc = _mm256_fmadd_pd(pc, zz, _mm256_set1_pd(2.08757008419747316778e-9));
  pc = _mm256_fmadd_pd(pc, zz, _mm256_set1_pd(-2.75573141792967388112e-7));
  pc = _mm256_fmadd_pd(pc, zz, _mm256_set1_pd(2.48015872888517045348e-5));
  pc = _mm256_fmadd_pd(pc, zz, _mm256_set1_pd(-1.38888888888730564116e-3));
  pc = _mm256_fmadd_pd(pc, zz, _mm256_set1_pd(4.16666666666665929218e-2));
  __m256d cos_z = _mm256_mul_pd(_mm256_mul_pd(pc, zz), zz);
  cos_z = _mm256_add_pd(_mm256_fnmadd_pd(_mm256_set1_pd(0.5), zz, _mm256_set1_pd(1.0)), cos_z);

  // Quadrant q = k mod 4 selects (sin, cos) = (s, c), (c, -s), (-s, -c), (-c, s).
  const __m128i k32 = _mm256_cvtpd_epi32(k);
  const __m256i q = _mm256_cvtepi32_epi64(_mm_and_si128(k32, _mm_set1_epi32(3)));
  const __m256d odd = _mm256_castsi256_pd(
      _mm256_cmpeq_epi64(_mm256_and_si256(q, _mm256_set1_epi64x(1)), _mm256_set1_epi64x(1)));
  const __m256d swap_s = _mm256_blendv_pd(sin_z, cos_z, odd);
  const __m256d swap_c = _mm256_blendv_pd(cos_z, sin_z, odd);
  // sin negated for q in {2, 3}; cos negated for q in {1, 2}.
  const __m256i q_bit1 = _mm256_and_si256(q, _mm256_set1_epi64x(2));
  const __m256d neg_s = _mm256_castsi256_pd(_mm256_slli_epi64(q_bit1, 62));
  const __m256i q_plus1 = _mm256_and_si256(_mm256_add_epi64(q, _mm256_set1_epi64x(1)),
                                           _mm256_set1_epi64x(2));
  const __m256d neg_c = _mm256_castsi256_pd(_mm256_slli_epi64(q_plus1, 62));
  s_out = _mm256_xor_pd(_mm256_xor_pd(swap_s, neg_s), sign_x);
  c_out = _mm256_xor_pd(swap_c, neg_c);
}

constexpr std::size_t kLanes = 4;
constexpr std::size_t kMaxNodes = 256;

}  // namespace

void exp4_avx2(const double* in, double* out) { _mm256_storeu_pd(out, exp_pd(_mm256_loadu_pd(in))); }

void sincos4_avx2(const double* in, double* sin_out, double* cos_out) {
  __m256d s;
  __m256d c;
  sincos_pd(_mm256_loadu_pd(in), s, c);
  _mm256_storeu_pd(sin_out, s);
  _mm256_storeu_pd(cos_out, c);
}

cplx gauss_tensor_sum_avx2(const QuadForm& q, std::span<const double> xs, std::span<const double> wx,
                           std::span<const double> ys, std::span<const double> wy) {
  // y nodes are staged in fixed blocks, zero-weight padded to a multiple of four lanes.
  alignas(32) std::array<double, kMaxNodes> ybuf{};
  alignas(32) std::array<double, kMaxNodes> wbuf{};
  alignas(32) std::array<double, kMaxNodes> y2buf{};

  const __m256d cb_re = _mm256_set1_pd(q.cb.real());
  const __m256d cb_im = _mm256_set1_pd(q.cb.imag());
  const __m256d floor_re = _mm256_set1_pd(-708.0);
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();

  for (std::size_t base = 0; base < ys.size(); base += kMaxNodes) {
    const std::size_t ny = std::min(kMaxNodes, ys.size() - base);
    const std::size_t padded = (ny + kLanes - 1) / kLanes * kLanes;
    for (std::size_t j = 0; j < padded; ++j) {
      const bool live = j < ny;
      ybuf[j] = live ? ys[base + j] : 0.0;
      wbuf[j] = live ? wy[base + j] : 0.0;
      y2buf[j] = ybuf[j] * ybuf[j];
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = xs[i];
      const __m256d ax_re = _mm256_set1_pd(q.ct.real() * x * x);
      const __m256d ax_im = _mm256_set1_pd(q.ct.imag() * x * x);
      const __m256d bx_re = _mm256_set1_pd(q.cx.real() * x);
      const __m256d bx_im = _mm256_set1_pd(q.cx.imag() * x);
      const __m256d wxi = _mm256_set1_pd(wx[i]);
      for (std::size_t j = 0; j < padded; j += kLanes) {
        const __m256d y = _mm256_load_pd(&ybuf[j]);
        const __m256d y2 = _mm256_load_pd(&y2buf[j]);
        const __m256d re = _mm256_fmadd_pd(bx_re, y, _mm256_fmadd_pd(cb_re, y2, ax_re));
        const __m256d keep = _mm256_cmp_pd(re, floor_re, _CMP_GE_OQ);
        if (_mm256_movemask_pd(keep) == 0) continue;
        const __m256d im = _mm256_fmadd_pd(bx_im, y, _mm256_fmadd_pd(cb_im, y2, ax_im));
        const __m256d w = _mm256_and_pd(keep, _mm256_mul_pd(wxi, _mm256_load_pd(&wbuf[j])));
        const __m256d mag = _mm256_mul_pd(w, exp_pd(re));
        __m256d s;
        __m256d c;
        sincos_pd(im, s, c);
        acc_re = _mm256_fmadd_pd(mag, c, acc_re);
        acc_im = _mm256_fmadd_pd(mag, s, acc_im);
      }
    }
  }
  alignas(32) std::array<double, kLanes> lanes_re{};
  alignas(32) std::array<double, kLanes> lanes_im{};
  _mm256_store_pd(lanes_re.data(), acc_re);
  _mm256_store_pd(lanes_im.data(), acc_im);
  return {(lanes_re[0] + lanes_re[1]) + (lanes_re[2] + lanes_re[3]),
          (lanes_im[0] + lanes_im[1]) + (lanes_im[2] + lanes_im[3])};
}

}  // namespace lgsq::simd
