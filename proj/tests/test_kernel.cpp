#include <doctest.h>

#include <cmath>
#include <random>

#include "lgsq/errors.hpp"
#include "lgsq/kernel.hpp"
#include "lgsq/oracle.hpp"

using namespace lgsq;

TEST_CASE("closed-form kernel equals the appendix integrand pointwise") {
  const auto cases = oracle::random_fixture_cases(101, 300);
  double worst = 0.0;
  for (const auto& fc : cases) {
    const GaussKernel k = kernel_coefficients(fc.a, fc.b);
    const cplx v = k.prefactor * std::exp(k.c_tilde * fc.Qt * fc.Qt + k.c_bar * fc.Qb * fc.Qb +
                                          k.c_cross * fc.Qt * fc.Qb);
    const cplx ref = oracle::integrand(fc.a, fc.b, fc.Qt, fc.Qb);
    worst = std::max(worst, std::abs(v - ref) / std::abs(ref));
  }
  CHECK(worst < 1e-11);
}

TEST_CASE("det M magnitude matches the closed determinant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> r(0.0, 2.5), phi(-2.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    const SqueezeParams a(r(rng), phi(rng));
    const SqueezeParams b(r(rng), phi(rng));
    const double m = det_m_magnitude(a, b);
    const double ref = std::abs(oracle::det_M_closed(a, b));
    CHECK(std::abs(m - ref) <= 1e-12 * std::max(1.0, ref));
  }
}

TEST_CASE("kernel is integrable off the singular manifold") {
  const auto cases = oracle::random_fixture_cases(7, 200, 1e-3);
  for (const auto& fc : cases) CHECK(kernel_coefficients(fc.a, fc.b).integrable());
}

TEST_CASE("singular configurations are refused") {
  const SqueezeParams a(1.0, 0.4);
  CHECK_THROWS_AS(kernel_coefficients(a, a), SingularConfiguration);
  CHECK_THROWS_AS(kernel_coefficients({1.0, 0.0}, {0.5, 0.0}), SingularConfiguration);
  CHECK_THROWS_AS(kernel_coefficients({0.0, 0.3}, {0.0, -0.2}), SingularConfiguration);
  CHECK_NOTHROW(kernel_coefficients({1.0, 0.4}, {0.7, 0.1}));
}

TEST_CASE("kernel coefficients under swapping the two times") {
  // C(b, a) is the complex conjugate of C(a, b) with the roles of the variables swapped.
  const SqueezeParams a(1.2, 0.3), b(0.4, -0.9);
  const GaussKernel ab = kernel_coefficients(a, b);
  const GaussKernel ba = kernel_coefficients(b, a);
  CHECK(std::abs(ab.c_tilde - std::conj(ba.c_bar)) < 1e-13);
  CHECK(std::abs(ab.c_bar - std::conj(ba.c_tilde)) < 1e-13);
  CHECK(std::abs(ab.c_cross - std::conj(ba.c_cross)) < 1e-13);
  CHECK(std::abs(ab.prefactor - std::conj(ba.prefactor)) < 1e-13);
}

TEST_CASE("decoherence shifts") {
  const GaussKernel k = kernel_coefficients({1.0, 0.4}, {0.7, 0.1});
  const GaussKernel p = apply_decoherence(k, {0.6, CrossSign::paper_literal});
  const GaussKernel q = apply_decoherence(k, {0.6, CrossSign::physical_channel});
  CHECK(p.c_tilde == k.c_tilde - 0.3);
  CHECK(p.c_bar == k.c_bar - 0.3);
  CHECK(p.c_cross == k.c_cross - 0.6);
  CHECK(q.c_cross == k.c_cross + 0.6);
  CHECK(p.prefactor == k.prefactor);
  CHECK(p.integrable());
  CHECK(q.integrable());
  const GaussKernel id = apply_decoherence(k, {});
  CHECK(id.c_cross == k.c_cross);
  CHECK_THROWS_AS(apply_decoherence(k, {-0.1}), InvalidParameter);
}
