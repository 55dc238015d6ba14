#include <doctest.h>

#include "qmfg/interaction.hpp"

using namespace qmfg;

namespace {

// Independent 4-index contraction: loops written directly from the kernel
// definition, no shared code with InteractionTensor::contract_eta_bar.
CMat contraction_oracle(const InteractionTensor& a, const CMat& eta) {
  const int d = a.dim();
  CMat out = CMat::Zero(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      for (int j2 = 0; j2 < d; ++j2)
        for (int k2 = 0; k2 < d; ++k2)
          out(j, j2) += a.at(j, k, j2, k2) * std::conj(eta(k, k2));
  return out;
}

}  // namespace

TEST_CASE("exchange tensor") {
  const auto ex = InteractionTensor::exchange();
  CHECK(ex.violation().empty());
  CHECK(ex.hs_norm() == doctest::Approx(std::sqrt(2.0)));
  SUBCASE("contraction with |0><0| vanishes") {
    CMat eta = CMat::Zero(2, 2);
    eta(0, 0) = 1.0;
    CHECK(max_abs(ex.contract_eta_bar(eta)) < 1e-15);
    CHECK(max_abs(contraction_oracle(ex, eta)) < 1e-15);
  }
  SUBCASE("contraction with |+><+| gives sigma_x / 2") {
    CMat eta(2, 2);
    eta << 0.5, 0.5, 0.5, 0.5;
    CHECK(max_abs(ex.contract_eta_bar(eta) - 0.5 * pauli_x()) < 1e-15);
    CHECK(max_abs(contraction_oracle(ex, eta) - 0.5 * pauli_x()) < 1e-15);
  }
}

TEST_CASE("zero tensor contracts to zero") {
  InteractionTensor z(2);
  CMat eta(2, 2);
  eta << 0.3, Complex(0.1, 0.2), Complex(0.1, -0.2), 0.7;
  CHECK(max_abs(z.contract_eta_bar(eta)) == 0.0);
}

TEST_CASE("contraction properties on random symmetric tensors") {
  SequenceRng rng(101);
  for (int rep = 0; rep < 50; ++rep) {
    const int d = 2 + rng.uniform_int(2);
    const auto a = InteractionTensor::random_symmetric(rng, d);
    CHECK(a.violation().empty());
    // Hermitian output for Hermitian eta
    CMat eta = CMat::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) eta(i, j) = Complex(rng.normal(), rng.normal());
    eta = hermitize(eta);
    const CMat c = a.contract_eta_bar(eta);
    CHECK(is_hermitian(c, 1e-10 * std::max(1.0, max_abs(c))));
    CHECK(max_abs(c - contraction_oracle(a, eta)) < 1e-12);
    // linearity in eta
    CMat eta2 = hermitize(((CMat)CMat::Random(d, d)));
    const CMat lhs = a.contract_eta_bar(2.0 * eta - 3.0 * eta2);
    const CMat rhs = 2.0 * a.contract_eta_bar(eta) - 3.0 * a.contract_eta_bar(eta2);
    CHECK(max_abs(lhs - rhs) < 1e-11 * std::max(1.0, max_abs(rhs)));
  }
}

TEST_CASE("symmetry violations are named") {
  InteractionTensor bad(2);
  bad.at(1, 0, 0, 1) = 1.0;  // pair-symmetric partner missing
  CHECK(bad.violation().find("pair symmetry") != std::string::npos);
  InteractionTensor bad2(2);
  bad2.at(1, 0, 0, 1) = Complex(0, 1);
  bad2.at(0, 1, 1, 0) = Complex(0, 1);  // self-adjointness fails
  CHECK(bad2.violation().find("self-adjointness") != std::string::npos);
}

TEST_CASE("diagonal potential tensor") {
  Eigen::MatrixXd v(2, 2);
  v << 1.0, -0.5, -0.5, 2.0;
  const auto a = InteractionTensor::diagonal_potential(v);
  CHECK(a.violation().empty());
  CHECK(a.at(0, 1, 0, 1) == Complex(-0.5));
  CHECK(a.at(1, 1, 1, 1) == Complex(2.0));
  CHECK(a.at(0, 1, 1, 0) == Complex(0.0));
}

TEST_CASE("cancellation identity") {
  SUBCASE("exchange tensor with |0>") {
    CVec v(2);
    v << 1.0, 0.0;
    CHECK(cancellation_check(InteractionTensor::exchange(), WaveFunction(v)) <
          1e-14);
  }
  SUBCASE("zero tensor") {
    CVec v(2);
    v << 1.0, 0.0;
    CHECK(cancellation_check(InteractionTensor(2), WaveFunction(v)) == 0.0);
  }
  SUBCASE("1000 random tensor/state draws stay below 1e-10") {
    SequenceRng rng(2024);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
      const int d = 2 + (rep % 2);
      const auto a = InteractionTensor::random_symmetric(rng, d);
      const auto phi = random_wave(rng, d);
      worst = std::max(worst, cancellation_check(a, phi));
    }
    CHECK(worst <= 1e-10);
  }
}
