#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lgsq/errors.hpp"
#include "lgsq/quadrature.hpp"
#include "lgsq/simd.hpp"

using namespace lgsq;

namespace {

struct BackendGuard {
  simd::Backend saved = simd::active_backend();
  ~BackendGuard() { simd::set_backend(saved); }
};

}  // namespace

TEST_CASE("scalar backend is always available") {
  BackendGuard g;
  CHECK(simd::backend_available(simd::Backend::scalar));
  simd::set_backend(simd::Backend::scalar);
  CHECK(simd::active_backend() == simd::Backend::scalar);
  CHECK(simd::backend_name(simd::Backend::avx2) == "avx2");
}

#if defined(__x86_64__) || defined(_M_X64)

TEST_CASE("vector exp and sincos match libm") {
  if (!simd::backend_available(simd::Backend::avx2)) return;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ex(-700.0, 700.0);
  std::uniform_real_distribution<double> ang(-1e4, 1e4);
  double worst_exp = 0.0;
  double worst_trig = 0.0;
  for (int rep = 0; rep < 20000; ++rep) {
    alignas(32) double in[4], out[4], s[4], c[4];
    for (double& v : in) v = ex(rng);
    simd::exp4_avx2(in, out);
    for (int i = 0; i < 4; ++i) worst_exp = std::max(worst_exp, std::abs(out[i] / std::exp(in[i]) - 1.0));
    for (double& v : in) v = ang(rng);
    simd::sincos4_avx2(in, s, c);
    for (int i = 0; i < 4; ++i) {
      worst_trig = std::max({worst_trig, std::abs(s[i] - std::sin(in[i])), std::abs(c[i] - std::cos(in[i]))});
    }
  }
  CHECK(worst_exp < 4e-16 * 8);
  CHECK(worst_trig < 2e-15);
  alignas(32) double tiny[4] = {-800.0, -745.0, 0.0, 1.0};
  alignas(32) double out[4];
  simd::exp4_avx2(tiny, out);
  CHECK(out[0] == 0.0);
  CHECK(out[2] == 1.0);
}

TEST_CASE("tensor sum: AVX2 agrees with the scalar reference") {
  if (!simd::backend_available(simd::Backend::avx2)) return;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const simd::QuadForm q{{-0.5 + 0.4 * u(rng), 3.0 * u(rng)}, {-0.7 + 0.4 * u(rng), 3.0 * u(rng)},
                           {0.3 * u(rng), 2.0 * u(rng)}};
    const int nx = 1 + rep % 13;
    const int ny = 1 + (rep * 7) % 300;  // crosses the internal block size
    std::vector<double> xs(nx), wx(nx), ys(ny), wy(ny);
    for (int i = 0; i < nx; ++i) {
      xs[i] = 3.0 * u(rng);
      wx[i] = 1.0 + u(rng);
    }
    for (int j = 0; j < ny; ++j) {
      ys[j] = 3.0 * u(rng);
      wy[j] = 1.0 + u(rng);
    }
    const cplx a = simd::gauss_tensor_sum_scalar(q, xs, wx, ys, wy);
    const cplx b = simd::gauss_tensor_sum_avx2(q, xs, wx, ys, wy);
    double mag = 0.0;
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j)
        mag += std::abs(wx[i] * wy[j]) *
               std::exp((q.ct * xs[i] * xs[i] + q.cb * ys[j] * ys[j] + q.cx * xs[i] * ys[j]).real());
    CHECK(std::abs(a - b) <= 1e-14 * mag + 1e-300);
  }
}

TEST_CASE("dispatcher routes to the selected backend") {
  if (!simd::backend_available(simd::Backend::avx2)) return;
  BackendGuard g;
  const simd::QuadForm q{{-1.0, 0.5}, {-0.5, -0.2}, {0.1, 0.3}};
  const auto& r = quad::gauss_legendre(12);
  simd::set_backend(simd::Backend::scalar);
  const cplx s = simd::gauss_tensor_sum(q, r.nodes, r.weights, r.nodes, r.weights);
  simd::set_backend(simd::Backend::avx2);
  const cplx v = simd::gauss_tensor_sum(q, r.nodes, r.weights, r.nodes, r.weights);
  CHECK(std::abs(s - v) < 1e-14);
}

#endif
