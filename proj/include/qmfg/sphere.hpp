#pragma once

// Band-limited scalar fields on S^2 (the Bloch picture of CP^1), stored as
// real spherical-harmonic spectra plus values on a Gauss-Legendre(theta) x
// uniform(phi) grid. The heat semigroup e^{2 t Lap} acts spectrally:
// coefficient (l,m) decays by e^{-2 l (l+1) t}. Gradients and divergences are
// synthesized from the spectrum, so no finite differencing near the poles.
//
// Real basis: Y_l0 = T_l0, Y^c_lm = sqrt2 T_lm cos(m phi),
// Y^s_lm = sqrt2 T_lm sin(m phi), with T_lm the orthonormalized associated
// Legendre functions (stable forward recurrence, no factorials).

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qmfg/rng.hpp"

namespace qmfg {

inline constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
inline void gauss_legendre(int n, std::vector<double>& x,
                           std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int l = 0; l < n; ++l) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * l + 1.0) * z * p1 - l * p2) / (l + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

class SphereTransform {
 public:
  SphereTransform(int lmax, int ntheta, int nphi)
      : lmax_(lmax), ntheta_(ntheta), nphi_(nphi) {
    if (ntheta <= lmax || nphi <= 2 * lmax)
      throw std::invalid_argument(
          "SphereTransform: grid too coarse for band limit");
    std::vector<double> gx, gw;
    gauss_legendre(ntheta, gx, gw);
    theta_.resize(ntheta);
    x_.resize(ntheta);
    sin_theta_.resize(ntheta);
    glw_.resize(ntheta);
    // theta ascending: x = cos(theta) descending
    for (int i = 0; i < ntheta; ++i) {
      x_[i] = gx[ntheta - 1 - i];
      glw_[i] = gw[ntheta - 1 - i];
      theta_[i] = std::acos(x_[i]);
      sin_theta_[i] = std::sin(theta_[i]);
    }
    phi_.resize(nphi);
    for (int j = 0; j < nphi; ++j) phi_[j] = 2.0 * kPi * j / nphi;
    const int nlm = tri(lmax_ + 1, 0);
    plm_.assign(static_cast<size_t>(ntheta) * nlm, 0.0);
    dplm_.assign(static_cast<size_t>(ntheta) * nlm, 0.0);
    for (int i = 0; i < ntheta; ++i)
      fill_plm_row(x_[i], sin_theta_[i], &plm_[i * (size_t)nlm],
                   &dplm_[i * (size_t)nlm]);
    cosm_.assign(static_cast<size_t>(lmax + 1) * nphi, 0.0);
    sinm_.assign(static_cast<size_t>(lmax + 1) * nphi, 0.0);
    for (int m = 0; m <= lmax; ++m)
      for (int j = 0; j < nphi; ++j) {
        cosm_[m * (size_t)nphi + j] = std::cos(m * phi_[j]);
        sinm_[m * (size_t)nphi + j] = std::sin(m * phi_[j]);
      }
  }

  int lmax() const { return lmax_; }
  int ntheta() const { return ntheta_; }
  int nphi() const { return nphi_; }
  int coeff_count() const { return (lmax_ + 1) * (lmax_ + 1); }
  int grid_count() const { return ntheta_ * nphi_; }
  double theta(int i) const { return theta_[i]; }
  double phi(int j) const { return phi_[j]; }
  double sin_theta(int i) const { return sin_theta_[i]; }
  double cell_weight(int i) const { return glw_[i] * 2.0 * kPi / nphi_; }

  // Packing: c[l^2] = (l,0); c[l^2 + 2m - 1] = cos part; c[l^2 + 2m] = sin.
  static int cidx(int l, int m, bool sin_part) {
    return l * l + (m == 0 ? 0 : 2 * m - 1 + (sin_part ? 1 : 0));
  }

  double quadrature(const std::vector<double>& grid) const {
    double acc = 0.0;
    for (int i = 0; i < ntheta_; ++i) {
      double row = 0.0;
      for (int j = 0; j < nphi_; ++j) row += grid[i * (size_t)nphi_ + j];
      acc += glw_[i] * row;
    }
    return acc * 2.0 * kPi / nphi_;
  }

  std::vector<double> analyze(const std::vector<double>& grid) const {
    const int L = lmax_;
    std::vector<double> cm(static_cast<size_t>(ntheta_) * (L + 1), 0.0);
    std::vector<double> sm(static_cast<size_t>(ntheta_) * (L + 1), 0.0);
    const double dphi_w = 2.0 * kPi / nphi_;
    for (int i = 0; i < ntheta_; ++i)
      for (int m = 0; m <= L; ++m) {
        double c = 0.0, s = 0.0;
        const double* row = &grid[i * (size_t)nphi_];
        const double* cj = &cosm_[m * (size_t)nphi_];
        const double* sj = &sinm_[m * (size_t)nphi_];
        for (int j = 0; j < nphi_; ++j) {
          c += row[j] * cj[j];
          s += row[j] * sj[j];
        }
        cm[i * (size_t)(L + 1) + m] = c * dphi_w;
        sm[i * (size_t)(L + 1) + m] = s * dphi_w;
      }
    std::vector<double> coeffs(coeff_count(), 0.0);
    const int nlm = tri(L + 1, 0);
    const double sq2 = std::numbers::sqrt2;
    for (int m = 0; m <= L; ++m)
      for (int l = m; l <= L; ++l) {
        double ac = 0.0, as = 0.0;
        for (int i = 0; i < ntheta_; ++i) {
          const double p = glw_[i] * plm_[i * (size_t)nlm + tri(l, m)];
          ac += p * cm[i * (size_t)(L + 1) + m];
          as += p * sm[i * (size_t)(L + 1) + m];
        }
        if (m == 0) {
          coeffs[cidx(l, 0, false)] = ac;
        } else {
          coeffs[cidx(l, m, false)] = sq2 * ac;
          coeffs[cidx(l, m, true)] = sq2 * as;
        }
      }
    return coeffs;
  }

  std::vector<double> synthesize(const std::vector<double>& coeffs) const {
    std::vector<double> am, bm;
    fourier_rows(coeffs, plm_, am, bm);
    return rows_to_grid(am, bm);
  }

  // Gradient in the orthonormal frame: g_theta = d f / d theta,
  // g_phi = (1/sin theta) d f / d phi.
  void synth_gradient(const std::vector<double>& coeffs,
                      std::vector<double>& gtheta,
                      std::vector<double>& gphi) const {
    std::vector<double> am, bm;
    fourier_rows(coeffs, dplm_, am, bm);
    gtheta = rows_to_grid(am, bm);
    fourier_rows(coeffs, plm_, am, bm);
    gphi.assign(grid_count(), 0.0);
    const int L = lmax_;
    for (int i = 0; i < ntheta_; ++i) {
      const double inv_sin = 1.0 / sin_theta_[i];
      for (int j = 0; j < nphi_; ++j) {
        double acc = 0.0;
        for (int m = 1; m <= L; ++m)
          acc += m * (-am[i * (size_t)(L + 1) + m] * sinm_[m * (size_t)nphi_ + j] +
                      bm[i * (size_t)(L + 1) + m] * cosm_[m * (size_t)nphi_ + j]);
        gphi[i * (size_t)nphi_ + j] = acc * inv_sin;
      }
    }
  }

  // d f / d theta alone (used by the divergence).
  std::vector<double> synth_dtheta(const std::vector<double>& coeffs) const {
    std::vector<double> am, bm;
    fourier_rows(coeffs, dplm_, am, bm);
    return rows_to_grid(am, bm);
  }

  std::vector<double> synth_dphi_over_sin(
      const std::vector<double>& coeffs) const {
    std::vector<double> am, bm;
    fourier_rows(coeffs, plm_, am, bm);
    std::vector<double> out(grid_count(), 0.0);
    const int L = lmax_;
    for (int i = 0; i < ntheta_; ++i) {
      const double inv_sin = 1.0 / sin_theta_[i];
      for (int j = 0; j < nphi_; ++j) {
        double acc = 0.0;
        for (int m = 1; m <= L; ++m)
          acc += m * (-am[i * (size_t)(L + 1) + m] * sinm_[m * (size_t)nphi_ + j] +
                      bm[i * (size_t)(L + 1) + m] * cosm_[m * (size_t)nphi_ + j]);
        out[i * (size_t)nphi_ + j] = acc * inv_sin;
      }
    }
    return out;
  }

  double point_value(const std::vector<double>& coeffs, double theta,
                     double phi) const {
    const int L = lmax_;
    const double x = std::cos(theta);
    const double s = std::sin(theta);
    const int nlm = tri(L + 1, 0);
    std::vector<double> p(nlm), dp(nlm);
    fill_plm_row(x, s, p.data(), dp.data());
    const double sq2 = std::numbers::sqrt2;
    double acc = 0.0;
    for (int l = 0; l <= L; ++l) acc += coeffs[cidx(l, 0, false)] * p[tri(l, 0)];
    for (int m = 1; m <= L; ++m) {
      double ac = 0.0, as = 0.0;
      for (int l = m; l <= L; ++l) {
        ac += coeffs[cidx(l, m, false)] * p[tri(l, m)];
        as += coeffs[cidx(l, m, true)] * p[tri(l, m)];
      }
      acc += sq2 * (ac * std::cos(m * phi) + as * std::sin(m * phi));
    }
    return acc;
  }

  // Orthonormalized Theta_lm at a point (test/diagnostic use).
  double theta_lm(int l, int m, double theta) const {
    const int nlm = tri(lmax_ + 1, 0);
    std::vector<double> p(nlm), dp(nlm);
    fill_plm_row(std::cos(theta), std::sin(theta), p.data(), dp.data());
    return p[tri(l, m)];
  }

  // All Theta_lm at one colatitude, packed by tri(l, m).
  std::vector<double> legendre_at(double theta) const {
    const int nlm = tri(lmax_ + 1, 0);
    std::vector<double> p(nlm), dp(nlm);
    fill_plm_row(std::cos(theta), std::sin(theta), p.data(), dp.data());
    return p;
  }

  static int tri(int l, int m) { return l * (l + 1) / 2 + m; }

 private:
  // Orthonormalized associated Legendre values and theta-derivatives for all
  // l <= lmax, m <= l at one node.
  void fill_plm_row(double x, double s, double* p, double* dp) const {
    const int L = lmax_;
    p[tri(0, 0)] = 1.0 / std::sqrt(4.0 * kPi);
    for (int m = 1; m <= L; ++m)
      p[tri(m, m)] =
          p[tri(m - 1, m - 1)] * s * std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    for (int m = 0; m < L; ++m)
      p[tri(m + 1, m)] = x * std::sqrt(2.0 * m + 3.0) * p[tri(m, m)];
    for (int m = 0; m <= L; ++m)
      for (int l = m + 2; l <= L; ++l) {
        const double a =
            std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
        const double b = std::sqrt(
            ((double(l) - 1.0) * (l - 1.0) - double(m) * m) /
            (4.0 * (double(l) - 1.0) * (l - 1.0) - 1.0));
        p[tri(l, m)] = a * (x * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
      }
    // dT_lm/dtheta = (l x T_lm - d_lm T_{l-1,m}) / sin theta,
    // d_lm = sqrt((2l+1)(l^2-m^2)/(2l-1)).
    for (int m = 0; m <= L; ++m)
      for (int l = m; l <= L; ++l) {
        if (l == 0) {
          dp[tri(0, 0)] = 0.0;
          continue;
        }
        double num = l * x * p[tri(l, m)];
        if (l > m) {
          const double dlm = std::sqrt((2.0 * l + 1.0) *
                                       (double(l) * l - double(m) * m) /
                                       (2.0 * l - 1.0));
          num -= dlm * p[tri(l - 1, m)];
        }
        dp[tri(l, m)] = num / s;
      }
  }

  // Per-row Fourier amplitudes A_m(i), B_m(i) against the given Legendre
  // table (values or derivatives).
  void fourier_rows(const std::vector<double>& coeffs,
                    const std::vector<double>& table, std::vector<double>& am,
                    std::vector<double>& bm) const {
    const int L = lmax_;
    const int nlm = tri(L + 1, 0);
    am.assign(static_cast<size_t>(ntheta_) * (L + 1), 0.0);
    bm.assign(static_cast<size_t>(ntheta_) * (L + 1), 0.0);
    const double sq2 = std::numbers::sqrt2;
    for (int i = 0; i < ntheta_; ++i) {
      const double* prow = &table[i * (size_t)nlm];
      for (int m = 0; m <= L; ++m) {
        double a = 0.0, b = 0.0;
        for (int l = m; l <= L; ++l) {
          const double p = prow[tri(l, m)];
          if (m == 0) {
            a += coeffs[cidx(l, 0, false)] * p;
          } else {
            a += coeffs[cidx(l, m, false)] * p;
            b += coeffs[cidx(l, m, true)] * p;
          }
        }
        if (m > 0) {
          a *= sq2;
          b *= sq2;
        }
        am[i * (size_t)(L + 1) + m] = a;
        bm[i * (size_t)(L + 1) + m] = b;
      }
    }
  }

  std::vector<double> rows_to_grid(const std::vector<double>& am,
                                   const std::vector<double>& bm) const {
    const int L = lmax_;
    std::vector<double> grid(grid_count(), 0.0);
    for (int i = 0; i < ntheta_; ++i)
      for (int j = 0; j < nphi_; ++j) {
        double acc = am[i * (size_t)(L + 1)];
        for (int m = 1; m <= L; ++m)
          acc += am[i * (size_t)(L + 1) + m] * cosm_[m * (size_t)nphi_ + j] +
                 bm[i * (size_t)(L + 1) + m] * sinm_[m * (size_t)nphi_ + j];
        grid[i * (size_t)nphi_ + j] = acc;
      }
    return grid;
  }

  int lmax_, ntheta_, nphi_;
  std::vector<double> theta_, x_, sin_theta_, glw_, phi_;
  std::vector<double> plm_, dplm_;
  std::vector<double> cosm_, sinm_;
};

using TransformPtr = std::shared_ptr<const SphereTransform>;

inline TransformPtr make_transform(int lmax, int ntheta, int nphi) {
  return std::make_shared<SphereTransform>(lmax, ntheta, nphi);
}

// Band-limited field: spectrum is the source of truth, grid is its synthesis
// (constructing from a non-band-limited grid projects it).
struct SphereField {
  TransformPtr tr;
  std::vector<double> grid;
  std::vector<double> coeffs;

  SphereField() = default;

  static SphereField zero(const TransformPtr& tr) {
    SphereField f;
    f.tr = tr;
    f.coeffs.assign(tr->coeff_count(), 0.0);
    f.grid.assign(tr->grid_count(), 0.0);
    return f;
  }
  static SphereField from_grid(const TransformPtr& tr,
                               std::vector<double> raw) {
    SphereField f;
    f.tr = tr;
    f.coeffs = tr->analyze(raw);
    f.grid = tr->synthesize(f.coeffs);
    return f;
  }
  static SphereField from_coeffs(const TransformPtr& tr,
                                 std::vector<double> c) {
    SphereField f;
    f.tr = tr;
    f.coeffs = std::move(c);
    f.grid = tr->synthesize(f.coeffs);
    return f;
  }

  double sup_norm() const {
    double m = 0.0;
    for (double v : grid) m = std::max(m, std::abs(v));
    return m;
  }
  double sup_gradient() const {
    std::vector<double> gt, gp;
    tr->synth_gradient(coeffs, gt, gp);
    double m = 0.0;
    for (size_t i = 0; i < gt.size(); ++i)
      m = std::max(m, std::hypot(gt[i], gp[i]));
    return m;
  }
  double c1_norm() const { return sup_norm() + sup_gradient(); }
};

// e^{2 t Lap} f: coefficient (l, m) multiplied by e^{-2 l (l+1) t}.
inline SphereField heat_propagate(const SphereField& f, double t) {
  if (t < 0) throw std::invalid_argument("heat_propagate: t must be >= 0");
  std::vector<double> c = f.coeffs;
  const int L = f.tr->lmax();
  for (int l = 0; l <= L; ++l) {
    const double decay = std::exp(-2.0 * l * (l + 1.0) * t);
    for (int m = 0; m <= l; ++m) {
      c[SphereTransform::cidx(l, m, false)] *= decay;
      if (m > 0) c[SphereTransform::cidx(l, m, true)] *= decay;
    }
  }
  return SphereField::from_coeffs(f.tr, std::move(c));
}

inline void heat_coeffs_inplace(const SphereTransform& tr,
                                std::vector<double>& c, double t) {
  const int L = tr.lmax();
  for (int l = 0; l <= L; ++l) {
    const double decay = std::exp(-2.0 * l * (l + 1.0) * t);
    for (int m = 0; m <= l; ++m) {
      c[SphereTransform::cidx(l, m, false)] *= decay;
      if (m > 0) c[SphereTransform::cidx(l, m, true)] *= decay;
    }
  }
}

// Heat kernel K(t, v, w) of e^{2 t Lap}: Legendre series
// sum_l (2l+1)/(4 pi) e^{-2 l(l+1) t} P_l(cos d). Throws when the truncation
// tail at lmax exceeds 1e-12.
inline double heat_kernel_cos(double t, double cosd, int lmax,
                              bool check_tail = true) {
  if (!(t > 0)) throw std::invalid_argument("heat_kernel: t must be > 0");
  if (check_tail) {
    const int l1 = lmax + 1;
    const double head = (2.0 * l1 + 1.0) * std::exp(-2.0 * l1 * (l1 + 1.0) * t);
    const double ratio = std::exp(-4.0 * (l1 + 1.0) * t);  // term ratio bound
    const double tail = head / (1.0 - std::min(ratio, 0.999999)) / (4.0 * kPi);
    if (tail > 1e-12)
      throw std::invalid_argument(
          "heat_kernel: t too small for band limit (tail bound violated)");
  }
  double p0 = 1.0, p1 = cosd;
  double acc = 1.0 / (4.0 * kPi);
  acc += 3.0 * std::exp(-4.0 * t) * cosd / (4.0 * kPi);
  for (int l = 2; l <= lmax; ++l) {
    const double p2 = ((2.0 * l - 1.0) * cosd * p1 - (l - 1.0) * p0) / l;
    p0 = p1;
    p1 = p2;
    acc += (2.0 * l + 1.0) * std::exp(-2.0 * l * (l + 1.0) * t) * p1 /
           (4.0 * kPi);
  }
  return acc;
}

inline double heat_kernel_point(double t, double theta1, double phi1,
                                double theta2, double phi2, int lmax,
                                bool check_tail = true) {
  const double cosd =
      std::sin(theta1) * std::sin(theta2) * std::cos(phi1 - phi2) +
      std::cos(theta1) * std::cos(theta2);
  return heat_kernel_cos(t, std::min(1.0, std::max(-1.0, cosd)), lmax,
                         check_tail);
}

// Probability density on S^2 w.r.t. solid angle.
struct SphereMeasure {
  SphereField density;
  double total_mass = 0.0;

  static SphereMeasure from_field(SphereField f) {
    SphereMeasure m;
    m.total_mass = f.tr->quadrature(f.grid);
    m.density = std::move(f);
    return m;
  }
  // Clip negative grid values and renormalize to unit mass. Returns
  // {clipped mass, |raw mass - 1|}: the conservation defect is measured
  // before clipping, the clipped mass is logged separately.
  std::pair<double, double> make_probability() {
    const auto& tr = *density.tr;
    std::vector<double> g = density.grid;
    const double raw_mass = tr.quadrature(g);
    const double mass_defect = std::abs(raw_mass - 1.0);
    double clipped = 0.0;
    for (int i = 0; i < tr.ntheta(); ++i)
      for (int j = 0; j < tr.nphi(); ++j) {
        double& v = g[i * (size_t)tr.nphi() + j];
        if (v < 0) {
          clipped += -v * tr.cell_weight(i);
          v = 0.0;
        }
      }
    const double mass = tr.quadrature(g);
    if (mass <= 0) throw std::runtime_error("SphereMeasure: mass collapsed");
    for (double& v : g) v /= mass;
    density = SphereField::from_grid(density.tr, std::move(g));
    total_mass = 1.0;
    return {clipped, mass_defect};
  }
};

// Heat kernel centred at (theta0, phi0), as a field. Built spectrally: the
// Dirac at x0 has coefficients Y_lm(x0), so the band-limited kernel is the
// exact image of the band-limited delta under e^{2 t Lap}; its l = 0 mode
// carries unit mass regardless of t.
inline SphereField heat_kernel_field(const TransformPtr& tr, double t,
                                     double theta0, double phi0) {
  std::vector<double> c(tr->coeff_count(), 0.0);
  const int L = tr->lmax();
  const double sq2 = std::numbers::sqrt2;
  const std::vector<double> leg = tr->legendre_at(theta0);
  for (int m = 0; m <= L; ++m) {
    for (int l = m; l <= L; ++l) {
      const double p = leg[SphereTransform::tri(l, m)];
      const double decay = std::exp(-2.0 * l * (l + 1.0) * t);
      if (m == 0) {
        c[SphereTransform::cidx(l, 0, false)] = p * decay;
      } else {
        c[SphereTransform::cidx(l, m, false)] =
            sq2 * p * std::cos(m * phi0) * decay;
        c[SphereTransform::cidx(l, m, true)] =
            sq2 * p * std::sin(m * phi0) * decay;
      }
    }
  }
  return SphereField::from_coeffs(tr, std::move(c));
}

// Random band-limited step-like field: sign of a low-band Gaussian field,
// projected back to the band limit. Sup-norm O(1), gradients saturate the
// heat-semigroup smoothing rate t^{-1/2}.
inline SphereField random_step_field(const TransformPtr& tr, int rough_band,
                                     SequenceRng& rng) {
  std::vector<double> c(tr->coeff_count(), 0.0);
  for (int l = 0; l <= rough_band; ++l)
    for (int m = 0; m <= l; ++m) {
      c[SphereTransform::cidx(l, m, false)] = rng.normal();
      if (m > 0) c[SphereTransform::cidx(l, m, true)] = rng.normal();
    }
  auto smooth = SphereField::from_coeffs(tr, std::move(c));
  std::vector<double> g(tr->grid_count());
  for (int i = 0; i < tr->grid_count(); ++i)
    g[i] = smooth.grid[i] >= 0 ? 1.0 : -1.0;
  return SphereField::from_grid(tr, std::move(g));
}

inline double fit_loglog_slope_vec(const std::vector<double>& xs,
                                   const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(xs.size());
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(xs[i]);
    const double ly = std::log(std::max(ys[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct SmoothingProbeResult {
  std::vector<double> ts;
  std::vector<double> sup_gradients;  // median over fields, per t
  double fitted_exponent = 0.0;
  double max_c1_ratio = 0.0;  // max over fields/ts of ||e^{2tL}f||_C1/||f||_C1
};

inline SmoothingProbeResult smoothing_constant_probe(
    const TransformPtr& tr, const std::vector<double>& ts, int nfields,
    uint64_t seed) {
  SmoothingProbeResult res;
  res.ts = ts;
  SequenceRng rng(seed);
  std::vector<std::vector<double>> grads(ts.size());
  for (int f = 0; f < nfields; ++f) {
    const SphereField field = random_step_field(tr, 3, rng);
    const double c1 = field.c1_norm();
    for (size_t it = 0; it < ts.size(); ++it) {
      const SphereField ht = heat_propagate(field, ts[it]);
      grads[it].push_back(ht.sup_gradient());
      res.max_c1_ratio = std::max(res.max_c1_ratio, ht.c1_norm() / c1);
    }
  }
  res.sup_gradients.resize(ts.size());
  for (size_t it = 0; it < ts.size(); ++it) {
    auto v = grads[it];
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    res.sup_gradients[it] = v[v.size() / 2];
  }
  res.fitted_exponent = fit_loglog_slope_vec(res.ts, res.sup_gradients);
  return res;
}

}  // namespace qmfg
