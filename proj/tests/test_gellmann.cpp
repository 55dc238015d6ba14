#include <doctest.h>

#include "qmfg/gellmann.hpp"

using namespace qmfg;

TEST_CASE("qubit family is i times the Pauli matrices") {
  const auto fam = gell_mann_family(1);
  REQUIRE(fam.count() == 3);
  CHECK(max_abs(fam.generators[0] - kI * pauli_x()) < 1e-15);
  CHECK(max_abs(fam.generators[1] - kI * pauli_y()) < 1e-15);
  CHECK(max_abs(fam.generators[2] - kI * pauli_z()) < 1e-15);
}

TEST_CASE("family size n^2 + 2n and anti-Hermiticity") {
  for (int n = 1; n <= 3; ++n) {
    const auto fam = gell_mann_family(n);
    CHECK(fam.count() == n * n + 2 * n);
    for (const auto& g : fam.generators) CHECK(is_anti_hermitian(g));
  }
  CHECK_THROWS_AS(gell_mann_family(0), std::invalid_argument);
}

TEST_CASE("trace orthogonality") {
  const auto fam = gell_mann_family(2);
  for (int a = 0; a < fam.count(); ++a)
    for (int b = 0; b < fam.count(); ++b) {
      const Complex ip =
          (fam.generators[a].adjoint() * fam.generators[b]).trace();
      if (a == b)
        CHECK(ip.real() == doctest::Approx(2.0));
      else
        CHECK(std::abs(ip) < 1e-14);
    }
}
