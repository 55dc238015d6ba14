#include <doctest.h>

#include "qmfg/gellmann.hpp"
#include "qmfg/meanfield.hpp"

using namespace qmfg;

namespace {

WaveFunction plus() {
  CVec v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return WaveFunction(v);
}

WaveFunction ket0() {
  CVec v(2);
  v << 1.0, 0.0;
  return WaveFunction(v);
}

}  // namespace

TEST_CASE("theorem_bound") {
  SUBCASE("t = 0 returns alpha0") {
    CHECK(theorem_bound(0.0, 1.3, 0.5, 2.0, 0.37, 9,
                        BoundVariant::LipschitzFeedback) == doctest::Approx(0.37));
  }
  SUBCASE("exchange tensor value at t = 0.1, N = 100") {
    const double hs = std::sqrt(2.0);
    const double want = (std::exp(0.7 * hs) - 1.0) / 10.0;
    CHECK(theorem_bound(0.1, hs, 0.0, 0.0, 0.0, 100,
                        BoundVariant::Uncontrolled) == doctest::Approx(want));
  }
  SUBCASE("kappa = 0 makes the variants agree") {
    for (double t : {0.1, 0.5, 1.0})
      CHECK(theorem_bound(t, 1.1, 0.0, 3.0, 0.2, 7, BoundVariant::Uncontrolled) ==
            doctest::Approx(
                theorem_bound(t, 1.1, 0.0, 3.0, 0.2, 7,
                              BoundVariant::LipschitzFeedback)));
  }
  SUBCASE("negative input rejected") {
    CHECK_THROWS_AS(theorem_bound(-1.0, 1, 0, 0, 0, 2, BoundVariant::Uncontrolled),
                    std::invalid_argument);
  }
}

TEST_CASE("solve_nonlinear_lindblad") {
  const auto fam = gell_mann_family(1);
  SUBCASE("A = 0, L = 0, commuting initial state: constant") {
    const auto etas = solve_nonlinear_lindblad(
        pure_density(ket0()), 0.7 * pauli_z(), CMat::Zero(2, 2),
        InteractionTensor(), {}, nullptr, 0.2, 1e-3);
    CHECK(max_abs(etas.back() - etas.front()) < 1e-12);
  }
  SUBCASE("trace preserved along the flow") {
    const auto etas = solve_nonlinear_lindblad(
        pure_density(plus()), 0.5 * pauli_z(), CMat::Zero(2, 2),
        InteractionTensor::exchange(), fam.generators, nullptr, 0.3, 1e-3);
    for (const auto& e : etas)
      CHECK(std::abs(e.trace().real() - 1.0) < 1e-10);
  }
  SUBCASE("full Pauli dissipator relaxes the Bloch vector like e^{-4t}") {
    const auto etas = solve_nonlinear_lindblad(
        pure_density(plus()), CMat::Zero(2, 2), CMat::Zero(2, 2),
        InteractionTensor(), fam.generators, nullptr, 0.25, 1e-3);
    const auto r = bloch_vector(etas.back());
    CHECK(r[0] == doctest::Approx(std::exp(-4.0 * 0.25)).epsilon(1e-5));
  }
}

TEST_CASE("solve_nonlinear_sse") {
  const auto fam = gell_mann_family(1);
  SUBCASE("A = 0: copies are independent filtered trajectories") {
    SdeConfig cfg{1e-3, 0.05, true, 50};
    const auto res =
        solve_nonlinear_sse(plus(), 0.5 * pauli_z(), CMat::Zero(2, 2),
                            FeedbackControl{}, 1.0, InteractionTensor(),
                            fam.generators, 3, cfg, 5);
    // member m must equal the single-atom trajectory driven by the identical
    // counter-keyed noise
    for (int m = 0; m < 3; ++m) {
      const auto single =
          simulate_trajectory(plus(), 0.5 * pauli_z(), CMat::Zero(2, 2),
                              fam.generators, FeedbackControl{}, 1.0, cfg, 5, m);
      CHECK(max_abs(res.snapshots.back().members[m].amps -
                    single.states.back().amps) < 1e-12);
    }
  }
  SUBCASE("mean-field drift at t = 0 matches the contraction oracle") {
    // exchange tensor, L = 0, psi = |+>: eta_0 = |+><+|, extra drift
    // -i (sx/2) psi
    SdeConfig cfg{1e-3, 1e-3, false, 1};
    const auto res = solve_nonlinear_sse(
        plus(), CMat::Zero(2, 2), CMat::Zero(2, 2), FeedbackControl{}, 1.0,
        InteractionTensor::exchange(), {}, 1, cfg, 1);
    const CVec want =
        plus().amps - kI * 1e-3 * (0.5 * pauli_x() * plus().amps);
    CHECK(max_abs(res.snapshots.back().members[0].amps - want) < 1e-15);
  }
  SUBCASE("deterministic Hartree reduction for diagonal tensors") {
    // M = 1, L = 0, diagonal A: d psi = -i(H + V^{xi}) psi dt with
    // xi_k = |psi_k|^2, V^{xi}(j) = sum_k V(j,k) |psi_k|^2
    Eigen::MatrixXd v(2, 2);
    v << 1.0, 0.25, 0.25, -0.5;
    SdeConfig cfg{1e-4, 1e-4, false, 1};
    const auto res = solve_nonlinear_sse(
        plus(), CMat::Zero(2, 2), CMat::Zero(2, 2), FeedbackControl{}, 1.0,
        InteractionTensor::diagonal_potential(v), {}, 1, cfg, 1);
    CMat veff = CMat::Zero(2, 2);
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        veff(j, j) += v(j, k) * std::norm(plus().amps[k]);
    const CVec want = plus().amps - kI * 1e-4 * (veff * plus().amps);
    CHECK(max_abs(res.snapshots.back().members[0].amps - want) < 1e-16);
  }
  SUBCASE("ensemble eta matches the closed equation at moderate M") {
    const int m = 400;
    SdeConfig cfg{2e-3, 0.2, true, 100};
    const auto res = solve_nonlinear_sse(
        plus(), 0.5 * pauli_z(), CMat::Zero(2, 2), FeedbackControl{}, 1.0,
        InteractionTensor::exchange(), fam.generators, m, cfg, 17);
    const auto etas = solve_nonlinear_lindblad(
        pure_density(plus()), 0.5 * pauli_z(), CMat::Zero(2, 2),
        InteractionTensor::exchange(), fam.generators, nullptr, 0.2, 2e-3);
    const double tol = 5.0 / std::sqrt(double(m)) + 10.0 * cfg.dt;
    CHECK(trace_distance(res.snapshots.back().eta_estimate, etas.back()) < tol);
    CHECK(check_density_state(res.snapshots.back().eta_estimate, 1e-12, 1e-8,
                              1e-10)
              .ok());
  }
  SUBCASE("iid members: sample-mean variance scales like 1/M") {
    const int m = 480;
    SdeConfig cfg{2e-3, 0.1, true, 50};
    const auto res = solve_nonlinear_sse(
        plus(), 0.5 * pauli_z(), CMat::Zero(2, 2), FeedbackControl{}, 1.0,
        InteractionTensor::exchange(), fam.generators, m, cfg, 23);
    const auto& members = res.snapshots.back().members;
    auto group_mean_var = [&](int gsize) {
      const int groups = m / gsize;
      double mean = 0.0, mean2 = 0.0;
      for (int g = 0; g < groups; ++g) {
        double v = 0.0;
        for (int i = 0; i < gsize; ++i)
          v += expectation_real(pauli_z(), members[g * gsize + i]);
        v /= gsize;
        mean += v;
        mean2 += v * v;
      }
      mean /= groups;
      return mean2 / groups - mean * mean;
    };
    const double v20 = group_mean_var(20);
    const double v120 = group_mean_var(120);
    CHECK(v20 / v120 > 2.0);  // ~ 6 in expectation, loose at this sample size
    CHECK(v20 / v120 < 18.0);
  }
}

TEST_CASE("convergence experiment, small configuration") {
  const auto fam = gell_mann_family(1);
  ConvergenceConfig cfg;
  cfg.ns = {2, 4};
  cfg.horizon = 0.1;
  cfg.dt = 2e-3;
  cfg.replicas = 30;
  cfg.sample_every = 10;
  cfg.seed = 3;
  cfg.threads = 2;
  SUBCASE("no interaction, no control: alpha stays at the dt^2 floor") {
    const auto rep = convergence_experiment(
        0.5 * pauli_z(), CMat::Zero(2, 2), InteractionTensor(), fam.generators,
        FeedbackControl{}, 1.0, cfg, plus());
    for (const auto& r : rep.rows) CHECK(r.alpha_mean < 5e-5);
  }
  SUBCASE("exchange tensor: bound holds, sandwich holds, alpha decreases") {
    const auto rep = convergence_experiment(
        0.5 * pauli_z(), CMat::Zero(2, 2), InteractionTensor::exchange(),
        fam.generators, FeedbackControl{}, 1.0, cfg, plus());
    for (const auto& r : rep.rows) {
      CHECK(r.alpha_mean >= 0.0);
      CHECK(r.alpha_mean <= r.bound_uncontrolled);
    }
    CHECK(rep.sandwich_violation <= 1e-9);
    CHECK(rep.sup_alpha(4) < rep.sup_alpha(2));
    CHECK(rep.loglog_slope < 0.0);
  }
}
