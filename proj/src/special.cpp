#include "lgsq/special.hpp"

#include <array>
#include <cmath>

namespace lgsq::special {
namespace {

constexpr int kWeidemanN = 40;

struct WeidemanTable {
  double L;
  std::array<double, kWeidemanN> coeff;  // highest power first
};

// Coefficients of the expansion in Z = (L + iz)/(L - iz), obtained from the
// discrete Fourier transform of exp(-t^2)(L^2 + t^2) sampled on t = L tan(theta/2).
WeidemanTable build_table() {
  constexpr int M = 2 * kWeidemanN;
  constexpr int M2 = 2 * M;
  WeidemanTable tab{};
  tab.L = std::sqrt(kWeidemanN / std::sqrt(2.0));
  std::array<double, M2> f{};
  // f[0] corresponds to theta = -pi (t = -inf), the remaining samples to k = -M+1 .. M-1.
  for (int k = -M + 1; k < M; ++k) {
    const double theta = k * kPi / M;
    const double t = tab.L * std::tan(theta / 2.0);
    f[static_cast<std::size_t>(k + M)] = std::exp(-t * t) * (tab.L * tab.L + t * t);
  }
  // fftshift followed by a forward DFT; only the real parts of bins 1..N are used.
  std::array<double, M2> shifted{};
  for (int i = 0; i < M2; ++i) shifted[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>((i + M) % M2)];
  for (int n = 1; n <= kWeidemanN; ++n) {
    double acc = 0.0;
    for (int i = 0; i < M2; ++i) {
      acc += shifted[static_cast<std::size_t>(i)] * std::cos(2.0 * kPi * n * i / M2);
    }
    tab.coeff[static_cast<std::size_t>(kWeidemanN - n)] = acc / M2;
  }
  return tab;
}

const WeidemanTable& table() {
  static const WeidemanTable tab = build_table();
  return tab;
}

cplx faddeeva_upper(cplx z) {
  const auto& tab = table();
  const cplx iz(-z.imag(), z.real());
  const cplx denom = tab.L - iz;
  const cplx Z = (tab.L + iz) / denom;
  cplx p = 0.0;
  for (double c : tab.coeff) p = p * Z + c;
  return 2.0 * p / (denom * denom) + (1.0 / std::sqrt(kPi)) / denom;
}

cplx erf_taylor(cplx z) {
  const cplx z2 = z * z;
  cplx term = z;
  cplx sum = z;
  for (int n = 1; n < 60; ++n) {
    term *= -z2 / static_cast<double>(n);
    const cplx add = term / static_cast<double>(2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-17 * std::abs(sum)) break;
  }
  return sum * (2.0 / std::sqrt(kPi));
}

}  // namespace

cplx faddeeva_w(cplx z) {
  if (z.imag() >= 0.0) return faddeeva_upper(z);
  return 2.0 * std::exp(-z * z) - faddeeva_upper(-z);
}

cplx erfc_right(cplx z) {
  const cplx iz(-z.imag(), z.real());
  return std::exp(-z * z) * faddeeva_w(iz);
}

cplx erf(cplx z) {
  if (std::abs(z) < 0.5) return erf_taylor(z);
  if (z.real() >= 0.0) return 1.0 - erfc_right(z);
  return erfc_right(-z) - 1.0;
}

cplx gauss_interval(cplx kappa, double u, double v) {
  const cplx s = std::sqrt(-kappa);
  return std::sqrt(kPi) / (2.0 * s) * (erf(s * v) - erf(s * u));
}

}  // namespace lgsq::special
