#include <doctest.h>

#include "qmfg/projective.hpp"
#include "qmfg/wave.hpp"

using namespace qmfg;

namespace {

WaveFunction wf2(Complex a, Complex b) {
  CVec v(2);
  v << a, b;
  return WaveFunction(v);
}

}  // namespace

TEST_CASE("chart maps") {
  SUBCASE("to_projective basics") {
    CHECK(std::abs(to_projective(wf2(1, 0)).w[0]) == 0.0);
    const auto p = to_projective(wf2(1.0 / std::sqrt(5.0), 2.0 / std::sqrt(5.0)));
    CHECK(p.w[0].real() == doctest::Approx(2.0));
  }
  SUBCASE("from_projective normalizes with psi_0 real positive") {
    ProjectivePoint p{1, {Complex(1.0, 0.0)}};
    const auto psi = from_projective(p);
    CHECK(psi.norm() == doctest::Approx(1.0));
    CHECK(psi.amps[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    ProjectivePoint origin{1, {Complex(0.0, 0.0)}};
    CHECK(max_abs(from_projective(origin).amps - wf2(1, 0).amps) < 1e-15);
  }
  SUBCASE("round trip up to global phase") {
    SequenceRng rng(4);
    for (int rep = 0; rep < 30; ++rep) {
      auto psi = random_wave(rng, 2);
      if (std::norm(psi.amps[0]) < kChartThreshold2) continue;
      const auto back = from_projective(to_projective(psi));
      const Complex phase = psi.amps[0] / back.amps[0];
      CHECK(std::abs(std::abs(phase) - 1.0) < 1e-12);
      CHECK(max_abs(psi.amps - phase * back.amps) < 1e-12);
    }
  }
  SUBCASE("chart-singular input reported") {
    CHECK_THROWS_AS(to_projective(wf2(0.01, 1.0)), std::domain_error);
  }
  SUBCASE("bloch identification w = tan(theta/2) e^{i phi}") {
    const double theta = 1.234, phi = 2.345;
    const auto psi = bloch_wave(theta, phi);
    const auto p = to_projective(psi);
    CHECK(std::abs(p.w[0] - bloch_to_chart(theta, phi)) < 1e-14);
    const auto [th2, ph2] = chart_to_bloch(p.w[0]);
    CHECK(th2 == doctest::Approx(theta));
    CHECK(std::remainder(ph2 - phi, 2 * kPi) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("projective drift") {
  SUBCASE("diagonal Hamiltonian rotates the chart coordinate") {
    const double e0 = 0.7, e1 = -0.4;
    CMat h = CMat::Zero(2, 2);
    h(0, 0) = e0;
    h(1, 1) = e1;
    ProjectivePoint p{1, {Complex(0.3, -0.8)}};
    const auto b = projective_drift(p, h);
    CHECK(std::abs(b[0] - kI * (e0 - e1) * p.w[0]) < 1e-15);
  }
  SUBCASE("chart origin is a fixed point when (HW)_1 = 0") {
    CMat h(2, 2);
    h << 0.9, 0.0, 0.0, -0.3;
    ProjectivePoint origin{1, {Complex(0, 0)}};
    CHECK(std::abs(projective_drift(origin, h)[0]) == 0.0);
  }
  SUBCASE("affine in the control") {
    SequenceRng rng(7);
    const CMat h = hermitize(((CMat)CMat::Random(2, 2)));
    const CMat hhat = hermitize(((CMat)CMat::Random(2, 2)));
    ProjectivePoint p{1, {Complex(rng.normal(), rng.normal())}};
    const double u = 0.83;
    const auto b0 = projective_drift(p, h);
    const auto bu = projective_drift(p, h + u * hhat);
    const auto bh = projective_drift(p, hhat);
    CHECK(std::abs(bu[0] - b0[0] - u * bh[0]) < 1e-13);
  }
}

TEST_CASE("projective diffusion and the vanishing drift groups") {
  SUBCASE("single channel at the origin") {
    ProjectivePoint origin{1, {Complex(0, 0)}};
    const auto d = projective_diffusion(origin, {kI * pauli_x()});
    CHECK(std::abs(d[0][0] - kI) < 1e-15);
  }
  SUBCASE("gell-mann family kills both L-drift groups, n = 1 and 2") {
    SequenceRng rng(9);
    for (int n : {1, 2}) {
      const auto fam = gell_mann_family(n);
      for (int rep = 0; rep < 50; ++rep) {
        ProjectivePoint p;
        p.n = n;
        p.w.resize(n);
        for (auto& w : p.w) w = 2.0 * Complex(rng.normal(), rng.normal());
        const auto [r2, r3] = l_drift_residuals(p, fam.generators);
        CHECK(r2 <= 1e-10);
        CHECK(r3 <= 1e-10);
      }
    }
  }
  SUBCASE("a non-gell-mann family does not") {
    ProjectivePoint p{1, {Complex(0.4, 0.2)}};
    const auto [r2, r3] = l_drift_residuals(p, {kI * pauli_x()});
    CHECK(r2 + r3 > 1e-3);
  }
}

TEST_CASE("sphere-frame drift pushforward") {
  SUBCASE("diagonal Hamiltonian gives azimuthal rotation at rate E0 - E1") {
    CMat h = CMat::Zero(2, 2);
    h(0, 0) = 1.3;
    h(1, 1) = 0.1;
    for (double theta : {0.4, 1.2, 2.6}) {
      const Complex v = sphere_drift(theta, 0.9, h);
      CHECK(v.real() == doctest::Approx(0.0).epsilon(1e-14));
      CHECK(v.imag() == doctest::Approx((1.3 - 0.1) * std::sin(theta)));
    }
  }
  SUBCASE("matches the chart drift through the metric factor") {
    SequenceRng rng(12);
    const CMat g = hermitize(((CMat)CMat::Random(2, 2)));
    for (int rep = 0; rep < 20; ++rep) {
      const double theta = rng.uniform(0.2, 2.9), phi = rng.uniform(0, 2 * kPi);
      const Complex w = bloch_to_chart(theta, phi);
      ProjectivePoint p{1, {w}};
      const Complex b = projective_drift(p, g)[0];
      const Complex v = sphere_drift(theta, phi, g);
      const Complex want =
          2.0 * std::exp(Complex(0, -phi)) * b / (1.0 + std::norm(w));
      CHECK(std::abs(v - want) < 1e-12);
    }
  }
}

TEST_CASE("delta_pro") {
  SUBCASE("spectral: constant maps to zero, Y_lm to -l(l+1) Y_lm") {
    auto tr = make_transform(16, 24, 48);
    std::vector<double> c(tr->coeff_count(), 0.0);
    c[0] = 3.0;
    CHECK(delta_pro_apply(SphereField::from_coeffs(tr, c)).sup_norm() < 1e-14);
    std::vector<double> c2(tr->coeff_count(), 0.0);
    c2[SphereTransform::cidx(5, 3, true)] = 1.0;
    const auto out = delta_pro_apply(SphereField::from_coeffs(tr, c2));
    CHECK(out.coeffs[SphereTransform::cidx(5, 3, true)] ==
          doctest::Approx(-30.0));
  }
  SUBCASE("chart formula equals the spectral action (qubit)") {
    // 1/4 (1+x^2+y^2)^2 (S_xx + S_yy) applied to Y_lm pulled to the chart
    auto tr = make_transform(16, 24, 48);
    std::vector<double> c(tr->coeff_count(), 0.0);
    c[SphereTransform::cidx(2, 1, false)] = 1.0;
    auto chart_fn = [&](double x, double y) {
      const auto [theta, phi] = chart_to_bloch(Complex(x, y));
      return tr->point_value(c, theta, phi);
    };
    for (auto [x, y] : std::vector<std::pair<double, double>>{
             {0.2, 0.1}, {-0.5, 0.8}, {1.1, -0.3}}) {
      const auto [theta, phi] = chart_to_bloch(Complex(x, y));
      const double want = -6.0 * tr->point_value(c, theta, phi);  // l = 2
      CHECK(delta_pro_chart_qubit(chart_fn, x, y) ==
            doctest::Approx(want).epsilon(1e-6));
    }
  }
  SUBCASE("CP^2 formula against analytic values") {
    // S = |w1|^2: S_{w1 w1-bar} = 1, rest zero:
    // Delta_pro S = (1 + |w1|^2 + |w2|^2)(1 + |w1|^2)
    DeltaProCp2 d1([](const std::array<double, 4>& p) {
      return p[0] * p[0] + p[1] * p[1];
    });
    // S = Re(w1 w2-bar): Delta_pro S = (1 + |w|^2) Re(w1 w2-bar)
    DeltaProCp2 d2([](const std::array<double, 4>& p) {
      return p[0] * p[2] + p[1] * p[3];
    });
    SequenceRng rng(21);
    for (int rep = 0; rep < 100; ++rep) {
      const std::array<double, 4> p{rng.uniform(-1, 1), rng.uniform(-1, 1),
                                    rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const double n1 = p[0] * p[0] + p[1] * p[1];
      const double n2 = p[2] * p[2] + p[3] * p[3];
      const double want1 = (1 + n1 + n2) * (1 + n1);
      const double re12 = p[0] * p[2] + p[1] * p[3];
      const double want2 = (1 + n1 + n2) * re12;
      CHECK(d1(p) == doctest::Approx(want1).epsilon(1e-6));
      if (std::abs(want2) > 1e-2)
        CHECK(d2(p) == doctest::Approx(want2).epsilon(1e-6));
    }
  }
}

TEST_CASE("chart covariance of the projective SDE step") {
  // one Euler step in chart V0 vs chart V1 (indices swapped); the mapped
  // results agree at O(dt^(3/2)) and improve under dt halving
  SequenceRng rng(31);
  const CMat h = hermitize(((CMat)CMat::Random(2, 2)));
  const auto fam = gell_mann_family(1);
  CMat swap(2, 2);
  swap << 0, 1, 1, 0;
  auto step = [&](Complex w, const CMat& hh, const std::vector<CMat>& ls,
                  const std::vector<double>& dy, double dt) {
    ProjectivePoint p{1, {w}};
    Complex next = w + projective_drift(p, hh)[0] * dt;
    const auto diff = projective_diffusion(p, ls);
    for (size_t c = 0; c < ls.size(); ++c) next += diff[c][0] * dy[c];
    return next;
  };
  std::vector<CMat> ls_swapped;
  for (const auto& l : fam.generators) ls_swapped.push_back(swap * l * swap);
  const CMat h_swapped = swap * h * swap;
  // same normalized noise draws reused across dt levels
  std::vector<Complex> ws(200);
  std::vector<std::array<double, 3>> zs(200);
  for (int rep = 0; rep < 200; ++rep) {
    ws[rep] = Complex(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0));
    for (auto& z : zs[rep]) z = rng.normal();
  }
  double prev = -1.0;
  for (double dt : {1e-4, 5e-5, 2.5e-5}) {
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<double> dy(3);
      for (int c = 0; c < 3; ++c) dy[c] = std::sqrt(dt) * zs[rep][c];
      const Complex a = step(ws[rep], h, fam.generators, dy, dt);
      const Complex b = step(1.0 / ws[rep], h_swapped, ls_swapped, dy, dt);
      worst = std::max(worst, std::abs(a - 1.0 / b));
    }
    if (prev > 0) {
      CHECK(prev / worst > 1.6);
      CHECK(prev / worst < 3.0);
    }
    prev = worst;
  }
}
