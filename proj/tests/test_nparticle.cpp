#include <doctest.h>

#include "qmfg/gellmann.hpp"
#include "qmfg/nparticle.hpp"

using namespace qmfg;

namespace {

WaveFunction plus() {
  CVec v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return WaveFunction(v);
}

}  // namespace

TEST_CASE("N = 1 reduces exactly to step_linear_belavkin") {
  SequenceRng rng(3);
  const auto fam = gell_mann_family(1);
  const CMat h = 0.4 * pauli_z() + 0.2 * pauli_x();
  const CMat hhat = 0.3 * pauli_y();
  for (int rep = 0; rep < 10; ++rep) {
    const auto chi = random_wave(rng, 2);
    std::vector<double> dy{0.01 * rng.normal(), 0.01 * rng.normal(),
                           0.01 * rng.normal()};
    const double u = rng.uniform(-1, 1);
    const auto a = step_linear_belavkin(chi, h, fam.generators, u, hhat, dy, 1e-3);
    NParticleWave psi = wrap_single(chi);
    const auto b = step_nparticle(psi, h, hhat, InteractionTensor(), fam.generators,
                                  {FeedbackControl::constant(u)}, 10.0, 0.0, dy,
                                  1e-3);
    CHECK(max_abs(a.amps - b.amps) == 0.0);  // same arithmetic, bitwise
  }
}

TEST_CASE("pair term oracle on two sites") {
  // H = Hhat = L = 0, exchange tensor: dPsi = -(i/2) A_12 Psi dt;
  // on |01> this gives |01> - (i/2) dt |10>
  NParticleWave psi(2, 2);
  psi.amps[1] = 1.0;  // |01>
  const double dt = 1e-3;
  const auto out = step_nparticle(
      psi, CMat::Zero(2, 2), CMat::Zero(2, 2), InteractionTensor::exchange(),
      {}, {FeedbackControl{}, FeedbackControl{}}, 1.0, 0.0, {}, dt);
  CHECK(std::abs(out.amps[1] - Complex(1.0)) < 1e-15);
  CHECK(std::abs(out.amps[2] - Complex(0, -0.5 * dt)) < 1e-18);
  CHECK(std::abs(out.amps[0]) == 0.0);
  CHECK(std::abs(out.amps[3]) == 0.0);
}

TEST_CASE("decoupled sites evolve as independent single atoms") {
  // A = 0: the joint step of a product state stays the product of the
  // individually stepped factors (site-factored noise, identical controls)
  SequenceRng rng(5);
  const auto fam = gell_mann_family(1);
  const CMat h = 0.5 * pauli_z();
  const int n = 3;
  const auto phi = random_wave(rng, 2);
  NParticleWave psi = product_state(phi, n);
  std::vector<double> dy(n * 3);
  for (auto& v : dy) v = 0.03 * rng.normal();
  const auto out =
      step_nparticle(psi, h, CMat::Zero(2, 2), InteractionTensor(),
                     fam.generators,
                     std::vector<FeedbackControl>(n, FeedbackControl{}), 1.0,
                     0.0, dy, 1e-3);
  // factor-step each site and compare the drift+noise product expansion:
  // deterministic part matches pathwise at O(dt * dY)
  std::vector<WaveFunction> stepped;
  for (int j = 0; j < n; ++j) {
    std::vector<double> dyj(dy.begin() + 3 * j, dy.begin() + 3 * j + 3);
    stepped.push_back(
        step_linear_belavkin(phi, h, fam.generators, 0.0, CMat::Zero(2, 2), dyj, 1e-3));
  }
  NParticleWave prod(2, n);
  for (long idx = 0; idx < prod.dim(); ++idx) {
    Complex a = 1.0;
    long rem = idx;
    for (int s = n - 1; s >= 0; --s) {
      a *= stepped[s].amps[rem % 2];
      rem /= 2;
    }
    prod.amps[idx] = a;
  }
  CHECK(max_abs(out.amps - prod.amps) < 1e-3);  // O(dt * dY) cross terms

  SUBCASE("deterministic part: marginals match the single-site step") {
    std::vector<double> zero_dy(n * 3, 0.0);
    const auto det =
        step_nparticle(psi, h, CMat::Zero(2, 2), InteractionTensor(),
                       fam.generators,
                       std::vector<FeedbackControl>(n, FeedbackControl{}), 1.0,
                       0.0, zero_dy, 1e-3);
    auto single = step_linear_belavkin(phi, h, fam.generators, 0.0,
                                       CMat::Zero(2, 2), {0.0, 0.0, 0.0}, 1e-3);
    NParticleWave dnorm = det;
    dnorm.normalize();
    single.normalize();
    for (int j = 0; j < n; ++j)
      CHECK(max_abs(partial_trace_site(dnorm, j) - pure_density(single)) <
            1e-5);
  }
}

TEST_CASE("exchangeability under site permutation") {
  // permuting the sites of the initial state and the noise permutes the
  // output (up to floating-point addition reordering)
  SequenceRng rng(11);
  const auto fam = gell_mann_family(1);
  const auto a = InteractionTensor::exchange();
  NParticleWave psi = random_nparticle_wave(rng, 2, 3);
  // symmetrize noise handling: swap sites 0 and 1
  auto swap01 = [&](const NParticleWave& p) {
    NParticleWave q = p;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) q.amps[4 * j + 2 * i + k] = p.amps[4 * i + 2 * j + k];
    return q;
  };
  std::vector<double> dy(9);
  for (auto& v : dy) v = 0.02 * rng.normal();
  std::vector<double> dy_sw = dy;
  for (int p = 0; p < 3; ++p) std::swap(dy_sw[p], dy_sw[3 + p]);
  const auto out = step_nparticle(
      psi, 0.5 * pauli_z(), CMat::Zero(2, 2), a, fam.generators,
      std::vector<FeedbackControl>(3, FeedbackControl{}), 1.0, 0.0, dy, 1e-3);
  const auto out_sw = step_nparticle(
      swap01(psi), 0.5 * pauli_z(), CMat::Zero(2, 2), a, fam.generators,
      std::vector<FeedbackControl>(3, FeedbackControl{}), 1.0, 0.0, dy_sw, 1e-3);
  CHECK(max_abs(swap01(out).amps - out_sw.amps) < 1e-12);
}

TEST_CASE("controls are evaluated on the site marginals") {
  // feedback u(gamma) = tr(sz gamma): for |0> x |1>, site 0 sees u = +1,
  // site 1 sees u = -1
  std::vector<double> seen;
  FeedbackControl probe{[&seen](double, const CMat& g) {
                          const double u = (pauli_z() * g).trace().real();
                          seen.push_back(u);
                          return u;
                        },
                        1.0};
  NParticleWave psi(2, 2);
  psi.amps[1] = 1.0;  // |01>
  step_nparticle(psi, CMat::Zero(2, 2), 0.5 * pauli_x(), InteractionTensor(),
                 {}, {probe, probe}, 2.0, 0.0, {}, 1e-3);
  REQUIRE(seen.size() == 2);
  CHECK(seen[0] == doctest::Approx(1.0));
  CHECK(seen[1] == doctest::Approx(-1.0));
}

TEST_CASE("simulator renormalizes and reports the defect") {
  const auto fam = gell_mann_family(1);
  NParticleSimulator sim(2, 2, 0.5 * pauli_z(), CMat::Zero(2, 2),
                         InteractionTensor::exchange(), fam.generators, true);
  NParticleWave psi = product_state(plus(), 2);
  std::vector<double> us(2, 0.0);
  std::vector<double> dy(6, 0.01);
  const double defect = sim.step(psi, us, dy.data(), 1e-3);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(defect > 0.0);
  CHECK(defect < 1e-2);
}

TEST_CASE("memory guard") {
  CHECK_THROWS_AS(NParticleWave(2, 30), std::invalid_argument);
}
