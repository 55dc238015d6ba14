#pragma once

// Charts and geometry of CP^n for n in {1, 2}. Chart V0 coordinates
// w_k = psi_k / psi_0; lifted vector W = (1, w). The filtered SDE in the
// chart, with anti-Hermitian couplings L^p,
//   dw_k = i[w_k (G W)_0 - (G W)_k] dt                       (G = H+u Hhat+A^eta)
//        + 1/2 sum_p [((L^p)^2 W)_k - w_k ((L^p)^2 W)_0] dt
//        + sum_p [w_k (L^p W)_0^2 - (L^p W)_0 (L^p W)_k] dt
//        + sum_p [(L^p W)_k - w_k (L^p W)_0] dY^p.
// For the i*Gell-Mann family the two L-drift groups vanish and the diffusion
// generator equals 2 Delta_pro, the Laplace-Beltrami operator of S^2 when
// n = 1. CP^1 is identified with the unit Bloch sphere, w = tan(theta/2) e^{i phi}.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qmfg/core.hpp"
#include "qmfg/gellmann.hpp"
#include "qmfg/sphere.hpp"

namespace qmfg {

struct ProjectivePoint {
  int n = 1;
  std::vector<Complex> w;  // chart V0 coordinates, length n

  CVec lifted() const {
    CVec W(n + 1);
    W[0] = 1.0;
    for (int k = 0; k < n; ++k) W[k + 1] = w[k];
    return W;
  }
};

inline constexpr double kChartThreshold2 = 0.1;  // switch chart below |psi0|^2

// w_k = psi_k / psi_0; rejects chart-singular input.
inline ProjectivePoint to_projective(const WaveFunction& psi) {
  const double n2 = psi.amps.squaredNorm();
  if (std::norm(psi.amps[0]) < kChartThreshold2 * n2)
    throw std::domain_error("to_projective: |psi_0|^2 below chart threshold");
  ProjectivePoint p;
  p.n = psi.dim() - 1;
  p.w.resize(p.n);
  for (int k = 0; k < p.n; ++k) p.w[k] = psi.amps[k + 1] / psi.amps[0];
  return p;
}

// Unit vector W / sqrt(1 + |w|^2), psi_0 real positive.
inline WaveFunction from_projective(const ProjectivePoint& p) {
  CVec v = p.lifted();
  WaveFunction psi(v / v.norm());
  return psi;
}

// Drift coefficient of dw_k: i[w_k (G W)_0 - (G W)_k] for the combined
// Hermitian G = H + u Hhat + A^{eta-bar}.
inline std::vector<Complex> projective_drift(const ProjectivePoint& p,
                                             const CMat& g) {
  const CVec W = p.lifted();
  const CVec gw = g * W;
  std::vector<Complex> out(p.n);
  for (int k = 0; k < p.n; ++k) out[k] = kI * (p.w[k] * gw[0] - gw[k + 1]);
  return out;
}

// One diffusion vector per channel: (L^p W)_k - w_k (L^p W)_0.
inline std::vector<std::vector<Complex>> projective_diffusion(
    const ProjectivePoint& p, const std::vector<CMat>& ls) {
  const CVec W = p.lifted();
  std::vector<std::vector<Complex>> out(ls.size());
  for (size_t c = 0; c < ls.size(); ++c) {
    const CVec lw = ls[c] * W;
    out[c].resize(p.n);
    for (int k = 0; k < p.n; ++k) out[c][k] = lw[k + 1] - p.w[k] * lw[0];
  }
  return out;
}

// Residual of the two L-drift term groups (the ones that vanish for the
// i*Gell-Mann family): max_k |1/2 sum_p [((L^p)^2 W)_k - w_k ((L^p)^2 W)_0]|
// and max_k |sum_p [w_k (L^p W)_0^2 - (L^p W)_0 (L^p W)_k]|.
inline std::pair<double, double> l_drift_residuals(const ProjectivePoint& p,
                                                   const std::vector<CMat>& ls) {
  const CVec W = p.lifted();
  std::vector<Complex> g2(p.n, 0.0), g3(p.n, 0.0);
  for (const auto& l : ls) {
    const CVec lw = l * W;
    const CVec llw = l * lw;
    for (int k = 0; k < p.n; ++k) {
      g2[k] += 0.5 * (llw[k + 1] - p.w[k] * llw[0]);
      g3[k] += p.w[k] * lw[0] * lw[0] - lw[0] * lw[k + 1];
    }
  }
  double r2 = 0.0, r3 = 0.0;
  for (int k = 0; k < p.n; ++k) {
    r2 = std::max(r2, std::abs(g2[k]));
    r3 = std::max(r3, std::abs(g3[k]));
  }
  return {r2, r3};
}

// --- Bloch identification (n = 1) ----------------------------------------

// psi on the unit sphere: theta polar angle from |0>, phi azimuth.
inline WaveFunction bloch_wave(double theta, double phi) {
  CVec v(2);
  v[0] = std::cos(0.5 * theta);
  v[1] = std::sin(0.5 * theta) * Complex(std::cos(phi), std::sin(phi));
  return WaveFunction(v);
}

inline Complex bloch_to_chart(double theta, double phi) {
  return std::tan(0.5 * theta) * Complex(std::cos(phi), std::sin(phi));
}

inline std::pair<double, double> chart_to_bloch(Complex w) {
  const double r = std::abs(w);
  return {2.0 * std::atan(r), std::arg(w)};
}

// Pushforward of the chart drift b = i[w (G W)_0 - (G W)_1] to the
// orthonormal sphere frame: v_theta + i v_phi = 2 e^{-i phi} b / (1 + |w|^2)
// = 2 e^{-i phi} i (psi_1 (G psi)_0 - psi_0 (G psi)_1), pole-safe.
inline Complex sphere_drift(double theta, double phi, const CMat& g) {
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  const Complex eip(std::cos(phi), std::sin(phi));
  const Complex psi0 = c, psi1 = s * eip;
  const Complex g0 = g(0, 0) * psi0 + g(0, 1) * psi1;
  const Complex g1 = g(1, 0) * psi0 + g(1, 1) * psi1;
  return 2.0 * std::conj(eip) * kI * (psi1 * g0 - psi0 * g1);
}

// --- Delta_pro -------------------------------------------------------------

// n = 1, spectral: Delta_pro is the Laplace-Beltrami operator of the unit
// sphere, so coefficient (l, m) maps to -l(l+1) times itself.
inline SphereField delta_pro_apply(const SphereField& f) {
  std::vector<double> c = f.coeffs;
  const int L = f.tr->lmax();
  for (int l = 0; l <= L; ++l)
    for (int m = 0; m <= l; ++m) {
      c[SphereTransform::cidx(l, m, false)] *= -double(l) * (l + 1.0);
      if (m > 0) c[SphereTransform::cidx(l, m, true)] *= -double(l) * (l + 1.0);
    }
  return SphereField::from_coeffs(f.tr, std::move(c));
}

// n = 1, pointwise chart formula: Delta_pro S = 1/4 (1+x^2+y^2)^2 (S_xx+S_yy).
inline double delta_pro_chart_qubit(const std::function<double(double, double)>& s,
                                    double x, double y, double h = 1e-3) {
  auto dxx = [&](double a, double b) {
    return (-s(a + 2 * h, b) + 16 * s(a + h, b) - 30 * s(a, b) +
            16 * s(a - h, b) - s(a - 2 * h, b)) /
           (12 * h * h);
  };
  auto dyy = [&](double a, double b) {
    return (-s(a, b + 2 * h) + 16 * s(a, b + h) - 30 * s(a, b) +
            16 * s(a, b - h) - s(a, b - 2 * h)) /
           (12 * h * h);
  };
  const double f = 1.0 + x * x + y * y;
  return 0.25 * f * f * (dxx(x, y) + dyy(x, y));
}

// n = 2, pointwise chart formula on CP^2 in coordinates (w1, w2):
// Delta_pro S = (1+|w1|^2+|w2|^2) [ (1+|w1|^2) S_{w1 w1-bar}
//   + (1+|w2|^2) S_{w2 w2-bar} + w1 w2-bar S_{w1 w2-bar}
//   + w1-bar w2 S_{w1-bar w2} ],
// with Wirtinger derivatives taken by Richardson-extrapolated central
// differences of the supplied real-valued chart function.
class DeltaProCp2 {
 public:
  using Fn = std::function<double(const std::array<double, 4>&)>;  // x1,y1,x2,y2

  explicit DeltaProCp2(Fn f, double h = 1e-2) : f_(std::move(f)), h_(h) {}

  double operator()(const std::array<double, 4>& p) const {
    const Complex w1(p[0], p[1]), w2(p[2], p[3]);
    // second pure derivatives, 4th order
    const double s11 = 0.25 * (d2(p, 0) + d2(p, 1));  // d2/dw1 dw1-bar
    const double s22 = 0.25 * (d2(p, 2) + d2(p, 3));
    // mixed Wirtinger: S_{w1 w2-bar} = 1/4[(S_x1x2 + S_y1y2) + i(S_x1y2 - S_y1x2)]
    const double x1x2 = mixed(p, 0, 2), y1y2 = mixed(p, 1, 3);
    const double x1y2 = mixed(p, 0, 3), y1x2 = mixed(p, 1, 2);
    const Complex s12 = 0.25 * Complex(x1x2 + y1y2, x1y2 - y1x2);
    const double pref = 1.0 + std::norm(w1) + std::norm(w2);
    const double bracket = (1.0 + std::norm(w1)) * s11 +
                           (1.0 + std::norm(w2)) * s22 +
                           2.0 * (w1 * std::conj(w2) * s12).real();
    return pref * bracket;
  }

 private:
  double eval(std::array<double, 4> p, int a, double da, int b, double db) const {
    p[a] += da;
    p[b] += db;
    return f_(p);
  }
  double d2(const std::array<double, 4>& p, int a) const {
    auto at = [&](double d) { return eval(p, a, d, a, 0.0); };
    return (-at(2 * h_) + 16 * at(h_) - 30 * at(0) + 16 * at(-h_) -
            at(-2 * h_)) /
           (12 * h_ * h_);
  }
  double mixed_h(const std::array<double, 4>& p, int a, int b, double h) const {
    return (eval(p, a, h, b, h) + eval(p, a, -h, b, -h) - eval(p, a, h, b, -h) -
            eval(p, a, -h, b, h)) /
           (4 * h * h);
  }
  double mixed(const std::array<double, 4>& p, int a, int b) const {
    const double d1 = mixed_h(p, a, b, h_);
    const double d2v = mixed_h(p, a, b, 2 * h_);
    return (4.0 * d1 - d2v) / 3.0;  // Richardson, 4th order
  }

  Fn f_;
  double h_;
};

}  // namespace qmfg
