#include <doctest.h>

#include <cmath>
#include <limits>

#include "lgsq/core.hpp"
#include "lgsq/errors.hpp"

using namespace lgsq;

TEST_CASE("angles reduce into (-pi/2, pi/2]") {
  CHECK(reduce_angle(0.0) == 0.0);
  CHECK(reduce_angle(kPi / 2) == doctest::Approx(kPi / 2));
  CHECK(reduce_angle(-kPi / 2) == doctest::Approx(kPi / 2));
  CHECK(reduce_angle(kPi) == doctest::Approx(0.0));
  CHECK(reduce_angle(0.4 + 3 * kPi) == doctest::Approx(0.4).epsilon(1e-14));
  for (double phi = -10.0; phi < 10.0; phi += 0.137) {
    const double r = reduce_angle(phi);
    CHECK(r > -kPi / 2);
    CHECK(r <= kPi / 2);
  }
}

TEST_CASE("squeezing variable is pi-periodic in the angle") {
  for (double phi : {-1.3, -0.2, 0.0, 0.4, 1.1}) {
    const SqueezeParams p(0.8, phi);
    const SqueezeParams q(0.8, phi + kPi);
    CHECK(std::abs(p.z() - q.z()) < 4 * std::numeric_limits<double>::epsilon());
    CHECK(std::abs(p.z()) < 1.0);
  }
}

TEST_CASE("invalid squeeze parameters are rejected") {
  CHECK_THROWS_AS(SqueezeParams(-0.1, 0.0), InvalidParameter);
  CHECK_THROWS_AS(SqueezeParams(std::nan(""), 0.0), InvalidParameter);
  CHECK_THROWS_AS(SqueezeParams(1.0, std::numeric_limits<double>::infinity()), InvalidParameter);
  CHECK_NOTHROW(SqueezeParams(0.0, 0.0));
}

TEST_CASE("polar form reproduces 1 - z") {
  for (double r : {0.0, 0.3, 1.0, 2.5}) {
    for (double phi : {-1.0, 0.0, 0.4, kPi / 2}) {
      const SqueezeParams p(r, phi);
      const PolarForm f = polar_decompose(p);
      const cplx back = std::polar(f.rho, f.theta);
      CHECK(std::abs(back - (1.0 - p.z())) < 1e-14);
      CHECK(f.rho > 0.0);
    }
  }
}

TEST_CASE("tolerance validation") {
  CHECK_NOTHROW(ToleranceConfig{}.validate());
  CHECK_THROWS_AS((ToleranceConfig{0.0, 1e-8, 1e-8, 10}).validate(), InvalidParameter);
  CHECK_THROWS_AS((ToleranceConfig{1e-10, -1.0, 1e-8, 10}).validate(), InvalidParameter);
  CHECK_THROWS_AS((ToleranceConfig{1e-10, 1e-8, 1e-8, 0}).validate(), InvalidParameter);
}
