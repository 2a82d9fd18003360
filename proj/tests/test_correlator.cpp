#include <doctest.h>

#include <cmath>
#include <random>

#include "lgsq/correlator.hpp"
#include "lgsq/errors.hpp"
#include "lgsq/oracle.hpp"

using namespace lgsq;

TEST_CASE("equal times give exactly one") {
  for (double r : {0.0, 0.5, 1.3}) {
    for (double phi : {0.0, 0.4, -1.2}) {
      const SqueezeParams a(r, phi);
      for (double ell : {0.1, 1.0, 7.0}) {
        const CorrelatorResult c = correlator(a, a, {ell});
        CHECK(c.value == 1.0);
        CHECK(c.method == Method::equal_time);
      }
      CHECK(correlator(a, a, MeasurementSpec::infinite()).value == 1.0);
    }
  }
}

TEST_CASE("zero-angle series golden values") {
  const auto a = correlator({1.0, 0.0}, {0.5, 0.0}, {2.0});
  CHECK(a.method == Method::zero_angle_series);
  CHECK(a.value == doctest::Approx(0.9999937760638211).epsilon(1e-13));
  CHECK(correlator_zero_angle(0.0, 2.0, {1.0}).value == doctest::Approx(0.6947129056989680).epsilon(1e-13));
  CHECK(correlator_zero_angle(0.5, 1.0, {1.0}).value == doctest::Approx(0.9607967820549169).epsilon(1e-13));
  CHECK(correlator_zero_angle(0.5, 1.0, MeasurementSpec::infinite()).value == 1.0);
  CHECK_THROWS_AS(correlator_zero_angle(-1.0, 1.0, {1.0}), InvalidParameter);
}

TEST_CASE("real-squeezing series matches the overlap integral, including phi = pi/2") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> s(-2.0, 2.0), l(0.2, 5.0);
  for (int i = 0; i < 30; ++i) {
    const double sa = s(rng), sb = s(rng), ell = l(rng);
    CHECK(std::abs(correlator_real_squeezing(sa, sb, {ell}).value - oracle::zero_angle_overlap(sa, sb, ell)) < 1e-10);
  }
  // phi = pi/2 carries the negative scale through the dispatcher.
  const double v = correlator({0.8, kPi / 2}, {0.3, 0.0}, {1.5}).value;
  CHECK(v == doctest::Approx(correlator_real_squeezing(-0.8, 0.3, {1.5}).value).epsilon(1e-14));
  CHECK(correlator({0.0, 0.7}, {0.4, 0.0}, {1.5}).value ==
        doctest::Approx(correlator_zero_angle(0.0, 0.4, {1.5}).value).epsilon(1e-14));
}

TEST_CASE("plateau golden value and ell -> infinity limit") {
  const SqueezeParams a(1.0, 0.4), b(0.7, 0.1);
  const CorrelatorResult p = correlator(a, b, MeasurementSpec::infinite());
  CHECK(p.method == Method::plateau);
  CHECK(p.value == doctest::Approx(0.4722813886522028).epsilon(1e-12));
  CHECK(std::abs(correlator(a, b, {30.0}).value - p.value) < 1e-10);
}

TEST_CASE("general series golden value and oracle agreement") {
  const SqueezeParams a(1.0, 0.4), b(0.7, 0.1);
  const CorrelatorResult c = correlator(a, b, {1.0});
  CHECK(c.method == Method::general_series);
  CHECK(c.value == doctest::Approx(-0.002143113717760).epsilon(1e-9));
  CHECK(c.err_estimate < 1e-8);
  CHECK_THROWS_AS(correlator_general(a, b, MeasurementSpec::infinite(), {}), InvalidParameter);
}

TEST_CASE("bounded and symmetric") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> r(0.0, 2.0), phi(-1.5, 1.5), l(0.2, 5.0);
  for (int i = 0; i < 60; ++i) {
    const SqueezeParams a(r(rng), phi(rng)), b(r(rng), phi(rng));
    const double ell = l(rng);
    const CorrelatorResult ab = correlator(a, b, {ell});
    const CorrelatorResult ba = correlator(b, a, {ell});
    CHECK(std::abs(ab.value) <= 1.0 + ab.err_estimate);
    CHECK(std::abs(ab.value - ba.value) <= ab.err_estimate + ba.err_estimate);
  }
}

TEST_CASE("near the singular manifold") {
  const SqueezeParams a(0.9, 0.3);
  // The nudged evaluation extrapolates the sqrt(delta) approach to the limit.
  const CorrelatorResult n = correlator_nudged(a, a, {1.0}, {});
  CHECK(std::abs(n.value - 1.0) < 1e-3);
  CHECK(n.err_estimate > std::abs(n.value - 1.0));
  // Below the singular threshold the dispatcher nudges by itself.
  const CorrelatorResult d = correlator(a, SqueezeParams(0.9, 0.3 + 1e-12), {1.0});
  CHECK(std::abs(d.value - 1.0) < 1e-3);
  CHECK_THROWS_AS(correlator_nudged(a, a, {1.0}, {}, {}, 0.0), InvalidParameter);
}

TEST_CASE("decoherence on real squeezing is an unsupported combination") {
  CHECK_THROWS_AS(correlator({1.0, 0.0}, {0.5, 0.0}, {1.0}, {0.5}), UnsupportedCombination);
}

TEST_CASE("decoherence damps the correlator towards zero") {
  const SqueezeParams a(1.0, 0.4), b(0.7, 0.1);
  double prev = 1.0;
  for (double xi : {10.0, 100.0, 1000.0, 10000.0}) {
    const double v = std::abs(correlator(a, b, MeasurementSpec::infinite(), {xi}).value);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("measurement spec validation") {
  CHECK_THROWS_AS(correlator({1.0, 0.4}, {0.7, 0.1}, {0.0}), InvalidParameter);
  CHECK_THROWS_AS(correlator({1.0, 0.4}, {0.7, 0.1}, {-2.0}), InvalidParameter);
  CHECK(MeasurementSpec::infinite().is_infinite());
  CHECK(method_name(Method::plateau) == "plateau");
}
