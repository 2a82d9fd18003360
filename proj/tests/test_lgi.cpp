#include <doctest.h>

#include <cmath>

#include "lgsq/lgi.hpp"

using namespace lgsq;

TEST_CASE("strings from correlators") {
  const LgiStrings s = strings_from_correlators(1.0, 1.0, 1.0);
  CHECK(s.k3 == 1.0);
  CHECK(s.k3_prime == -3.0);
  CHECK(s.k3_class == Classification::classical);
  CHECK(s.k3_prime_class == Classification::classical);

  const LgiStrings t = strings_from_correlators(1.0, 1.0, -1.0);
  CHECK(t.k3 == 3.0);
  CHECK(t.k3_class == Classification::upper_violation);

  const LgiStrings u = strings_from_correlators(0.9, 0.9, 0.6);
  CHECK(u.k3 == doctest::Approx(1.2));
  CHECK(u.k3_class == Classification::upper_violation);
  // A margin larger than the excess keeps the string classical.
  CHECK(strings_from_correlators(0.9, 0.9, 0.6, 0.5).k3_class == Classification::classical);
  // -3 itself is on the bound.
  CHECK(strings_from_correlators(-1.0, -1.0, 1.0, 0.0).k3_class == Classification::classical);
  CHECK(strings_from_correlators(-1.0, -1.0, 1.1, 0.0).k3_class == Classification::lower_violation);
}

TEST_CASE("K3 + K3' = -2 C_ac") {
  for (double ab : {-0.7, 0.1, 0.9}) {
    for (double bc : {-0.2, 0.5}) {
      for (double ac : {-0.9, 0.0, 0.3}) {
        const LgiStrings s = strings_from_correlators(ab, bc, ac);
        CHECK(s.k3 + s.k3_prime == doctest::Approx(-2.0 * ac));
      }
    }
  }
}

TEST_CASE("degenerate protocol") {
  const SqueezeParams a(1.0, 0.4);
  const LgiStrings s = k3_protocol({a, a, a, {1.0}, {}});
  CHECK(s.k3 == 1.0);
  CHECK(s.k3_prime == -3.0);
  CHECK(s.error == 0.0);
}

TEST_CASE("a violating protocol and its margin") {
  const Protocol3 p{{1.0, 0.4}, {1.5, 0.4}, {1.8, 0.4}, {2.1856054285672}, {}};
  const LgiStrings s = k3_protocol(p);
  CHECK(s.k3 == doctest::Approx(1.04614717194821).epsilon(1e-9));
  CHECK(s.k3_class == Classification::upper_violation);
  CHECK(s.margin == doctest::Approx(3.0 * s.error));
  CHECK(s.k3 > 1.0 + s.margin);
}

TEST_CASE("no violation with vanishing angles on a coarse grid") {
  double worst = -10.0;
  for (double ra = 0.0; ra <= 3.0; ra += 0.75)
    for (double rb = 0.0; rb <= 3.0; rb += 0.75)
      for (double rc = 0.0; rc <= 3.0; rc += 0.75)
        for (double ell : {0.1, 0.8, 6.4}) {
          const LgiStrings s = k3_protocol({{ra, 0.0}, {rb, 0.0}, {rc, 0.0}, {ell}, {}});
          worst = std::max({worst, s.k3, s.k3_prime});
        }
  CHECK(worst <= 1.0 + 1e-6);
}

TEST_CASE("qubit reference model") {
  CHECK(qubit_k3(kPi / 3) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(qubit_k3(0.0) == 1.0);
  CHECK(qubit_k3(kPi / 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(classification_name(Classification::upper_violation) == "upper_violation");
}
