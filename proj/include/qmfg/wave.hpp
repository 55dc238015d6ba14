#pragma once

// N-particle amplitude vectors and the strided single-site / two-site
// machinery. Amplitudes are site-major with site 0 slowest, so a single-site
// operator is a strided d x d action, never a full Kronecker expansion:
// O(d * d^N) instead of O(d^{2N}).

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qmfg/core.hpp"
#include "qmfg/rng.hpp"

namespace qmfg {

struct NParticleWave {
  int site_dim = 0;
  int sites = 0;
  CVec amps;

  NParticleWave() = default;
  NParticleWave(int d, int n) : site_dim(d), sites(n) {
    amps = CVec::Zero(total_dim(d, n));
  }

  static long total_dim(int d, int n) {
    long t = 1;
    for (int i = 0; i < n; ++i) {
      t *= d;
      if (t > (1L << 24))
        throw std::invalid_argument("NParticleWave: d^N exceeds 2^24 guard");
    }
    return t;
  }

  long dim() const { return amps.size(); }
  // site 0 is slowest: stride(site) = d^(N-1-site)
  long stride(int site) const {
    long s = 1;
    for (int i = 0; i < sites - 1 - site; ++i) s *= site_dim;
    return s;
  }
  double norm() const { return amps.norm(); }
  void normalize() {
    const double n = norm();
    if (n <= 0.0) throw std::invalid_argument("NParticleWave: zero vector");
    amps /= n;
  }

  void check_site(int site) const {
    if (site < 0 || site >= sites)
      throw std::invalid_argument("NParticleWave: site out of range");
  }
};

// Product state phi^(x)N.
inline NParticleWave product_state(const WaveFunction& phi, int n) {
  NParticleWave psi(phi.dim(), n);
  const int d = phi.dim();
  const long total = psi.dim();
  for (long idx = 0; idx < total; ++idx) {
    Complex a = 1.0;
    long rem = idx;
    for (int s = n - 1; s >= 0; --s) {
      a *= phi.amps[rem % d];
      rem /= d;
    }
    psi.amps[idx] = a;
  }
  return psi;
}

inline NParticleWave wrap_single(const WaveFunction& phi) {
  NParticleWave psi(phi.dim(), 1);
  psi.amps = phi.amps;
  return psi;
}

// out += coeff * (M acting on `site`) in
inline void apply_site_accum(const NParticleWave& shape, const Complex* in,
                             Complex* out, const CMat& m, Complex coeff,
                             int site) {
  const int d = shape.site_dim;
  const long stride = shape.stride(site);
  const long block = stride * d;
  const long total = shape.dim();
  for (long base = 0; base < total; base += block) {
    for (long inner = 0; inner < stride; ++inner) {
      const Complex* src = in + base + inner;
      Complex* dst = out + base + inner;
      for (int a = 0; a < d; ++a) {
        Complex acc = 0.0;
        for (int b = 0; b < d; ++b) acc += m(a, b) * src[b * stride];
        dst[a * stride] += coeff * acc;
      }
    }
  }
}

struct TwoSiteEntry {
  int a, b, c, d;  // out digits (a,b), in digits (c,d)
  Complex v;
};

// out += coeff * (two-site operator with entries A(a,b;c,d) on sites l<j) in
inline void apply_pair_accum(const NParticleWave& shape, const Complex* in,
                             Complex* out,
                             const std::vector<TwoSiteEntry>& entries,
                             Complex coeff, int l, int j) {
  const int d = shape.site_dim;
  const long sl = shape.stride(l);
  const long sj = shape.stride(j);
  const long prefixes = shape.dim() / (sl * d);
  const long mids = sl / (sj * d);
  for (long p = 0; p < prefixes; ++p) {
    const long pb = p * sl * d;
    for (long m = 0; m < mids; ++m) {
      const long mb = pb + m * sj * d;
      for (long s = 0; s < sj; ++s) {
        const long base = mb + s;
        for (const auto& e : entries) {
          out[base + e.a * sl + e.b * sj] +=
              coeff * e.v * in[base + e.c * sl + e.d * sj];
        }
      }
    }
  }
}

// Single-site marginal Gamma^(j), computed directly from the amplitudes by
// summing over all other site indices. trace = ||Psi||^2.
inline CMat partial_trace_site(const NParticleWave& psi, int site) {
  psi.check_site(site);
  const int d = psi.site_dim;
  const long stride = psi.stride(site);
  const long block = stride * d;
  const long total = psi.dim();
  CMat g = CMat::Zero(d, d);
  for (long base = 0; base < total; base += block)
    for (long inner = 0; inner < stride; ++inner) {
      const Complex* src = psi.amps.data() + base + inner;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          g(a, b) += src[a * stride] * std::conj(src[b * stride]);
    }
  return g;
}

// (Psi, (M on site) Psi) without forming the marginal.
inline Complex site_operator_expectation(const NParticleWave& psi,
                                         const CMat& m, int site) {
  psi.check_site(site);
  const int d = psi.site_dim;
  const long stride = psi.stride(site);
  const long block = stride * d;
  const long total = psi.dim();
  Complex acc = 0.0;
  for (long base = 0; base < total; base += block)
    for (long inner = 0; inner < stride; ++inner) {
      const Complex* src = psi.amps.data() + base + inner;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          acc += std::conj(src[a * stride]) * m(a, b) * src[b * stride];
    }
  return acc;
}

// alpha_{N,j} = 1 - tr(gamma Gamma^(j)), the deviation of site j from the
// reference state gamma. In [0,1] for normalized inputs.
inline double alpha_j(const NParticleWave& psi, const CMat& gamma, int site) {
  if (gamma.rows() != psi.site_dim)
    throw std::invalid_argument("alpha_j: dimension mismatch");
  return 1.0 - site_operator_expectation(psi, gamma, site).real();
}

// 1 - (P_sites Psi, Psi) where P projects each listed site onto psi.
inline double overlap_k(const NParticleWave& psi, const WaveFunction& phi,
                        const std::vector<int>& sitelist) {
  for (size_t i = 0; i < sitelist.size(); ++i) {
    psi.check_site(sitelist[i]);
    for (size_t k = i + 1; k < sitelist.size(); ++k)
      if (sitelist[i] == sitelist[k])
        throw std::invalid_argument("overlap_k: repeated sites");
  }
  const CMat p = phi.amps * phi.amps.adjoint();
  CVec cur = psi.amps;
  CVec next(cur.size());
  NParticleWave shape = psi;
  for (int site : sitelist) {
    next.setZero();
    apply_site_accum(shape, cur.data(), next.data(), p, 1.0, site);
    cur.swap(next);
  }
  const Complex ov = (psi.amps.adjoint() * cur)(0);
  return 1.0 - ov.real();
}

// (1/N) sum_j Gamma^(j): the average of the site marginals.
inline CMat quantum_empirical_measure(const NParticleWave& psi) {
  CMat m = CMat::Zero(psi.site_dim, psi.site_dim);
  for (int j = 0; j < psi.sites; ++j) m += partial_trace_site(psi, j);
  return m / static_cast<double>(psi.sites);
}

inline NParticleWave random_nparticle_wave(SequenceRng& rng, int d, int n) {
  NParticleWave psi(d, n);
  for (long i = 0; i < psi.dim(); ++i)
    psi.amps[i] = Complex(rng.normal(), rng.normal());
  psi.normalize();
  return psi;
}

inline WaveFunction random_wave(SequenceRng& rng, int d) {
  CVec v(d);
  for (int i = 0; i < d; ++i) v[i] = Complex(rng.normal(), rng.normal());
  WaveFunction w(v);
  w.normalize();
  return w;
}

}  // namespace qmfg
