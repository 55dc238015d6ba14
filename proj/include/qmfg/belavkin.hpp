#pragma once

// Euler-Maruyama time stepping for the linear filtering equation
//   d chi = -[i(H + u Hhat) chi + 1/2 sum_p L_p^* L_p chi] dt
//           + sum_p L_p chi dY^p
// and its controlled N-particle version with the pair term (1/N) sum_{l<j}
// A_{lj}. Conservative couplings (L^* = -L) preserve the norm almost surely
// in continuum; the per-step pre-normalization defect is recorded.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qmfg/core.hpp"
#include "qmfg/interaction.hpp"
#include "qmfg/rng.hpp"
#include "qmfg/wave.hpp"

namespace qmfg {

struct SdeConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  bool renormalize = true;
  int sample_every = 1;

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("SdeConfig: dt must be > 0");
    if (!(horizon >= dt))
      throw std::invalid_argument("SdeConfig: T must be >= dt");
  }
  int steps() const { return static_cast<int>(std::llround(horizon / dt)); }
};

// Markovian feedback u(t, gamma). `lipschitz` is the declared bound kappa for
// |u(t,g) - u(t,g')| <= kappa tr|g - g'|; the harness clamps outputs to
// [-U0, U0].
struct FeedbackControl {
  std::function<double(double, const CMat&)> evaluate;
  double lipschitz = 0.0;

  static FeedbackControl zero() {
    return {[](double, const CMat&) { return 0.0; }, 0.0};
  }
  static FeedbackControl constant(double u) {
    return {[u](double, const CMat&) { return u; }, 0.0};
  }
};

inline double clamp_control(double u, double u0) {
  return std::min(std::max(u, -u0), u0);
}

// 1/2 sum_p L_p^* L_p
inline CMat half_ldag_l(const std::vector<CMat>& ls, int dim) {
  CMat k = CMat::Zero(dim, dim);
  for (const auto& l : ls) k += l.adjoint() * l;
  return 0.5 * k;
}

namespace detail {

// One explicit filtering step shared by the single-atom and N-particle paths
// (identical arithmetic at N = 1). Drift terms are explicit Euler; the noise
// is applied site-factored,
//   Psi -> prod_j (I + sum_p L_p dY^{j,p}) Psi,
// which keeps the cross-site noise products that the tensor product of
// individually stepped one-particle states carries. A linear-in-noise step
// drops them, biasing E alpha_N by O((N-1) dt); factored noise has the same
// weak order and is bit-identical to the linear step for a single site.
// dy is laid out [site * channels + channel]; pair_entries, when present, add
// the -(i/N) sum_{l<j} A_{lj} drift.
inline void euler_filtering_step(const NParticleWave& shape, const CVec& in,
                                 CVec& out,
                                 const std::vector<CMat>& site_drift,
                                 const std::vector<CMat>& ls, const double* dy,
                                 double dt,
                                 const std::vector<TwoSiteEntry>* pair_entries,
                                 CVec* scratch = nullptr) {
  const int nsites = shape.sites;
  const int nch = static_cast<int>(ls.size());
  const int d = shape.site_dim;
  // noise factor product; buffers alternate so the last factor lands in out
  if (dy != nullptr && nch > 0) {
    CVec local;
    CVec& tmp = scratch != nullptr ? *scratch : local;
    tmp.resize(in.size());
    const CVec* src = &in;
    for (int j = 0; j < nsites; ++j) {
      CMat m = CMat::Identity(d, d);
      for (int p = 0; p < nch; ++p) m += dy[j * nch + p] * ls[p];
      CVec* dst = ((nsites - j) % 2 == 1) ? &out : &tmp;
      dst->setZero();
      apply_site_accum(shape, src->data(), dst->data(), m, 1.0, j);
      src = dst;
    }
  } else {
    out = in;
  }
  for (int j = 0; j < nsites; ++j)
    apply_site_accum(shape, in.data(), out.data(), site_drift[j], dt, j);
  if (pair_entries != nullptr && !pair_entries->empty() && nsites > 1) {
    const Complex coeff = Complex(0, -1) * dt / static_cast<double>(nsites);
    for (int l = 0; l < nsites; ++l)
      for (int j = l + 1; j < nsites; ++j)
        apply_pair_accum(shape, in.data(), out.data(), *pair_entries, coeff, l,
                         j);
  }
  if (!std::isfinite(out.squaredNorm()))
    throw std::runtime_error("filtering step produced non-finite state");
}

}  // namespace detail

// chi' = chi - [i(H + u Hhat) chi + 1/2 sum L^*L chi] dt + sum_p L_p chi dY_p.
// Unnormalized; callers renormalize and log the defect if configured.
inline WaveFunction step_linear_belavkin(const WaveFunction& chi, const CMat& h,
                                         const std::vector<CMat>& ls, double u,
                                         const CMat& hhat,
                                         const std::vector<double>& dy,
                                         double dt) {
  const int d = chi.dim();
  if (h.rows() != d || hhat.rows() != d)
    throw std::invalid_argument("step_linear_belavkin: dimension mismatch");
  for (const auto& l : ls)
    if (l.rows() != d)
      throw std::invalid_argument("step_linear_belavkin: dimension mismatch");
  if (dy.size() != ls.size())
    throw std::invalid_argument("step_linear_belavkin: one dY per channel");
  NParticleWave shape = wrap_single(chi);
  std::vector<CMat> drift{-kI * (h + u * hhat) - half_ldag_l(ls, d)};
  CVec out(shape.dim());
  detail::euler_filtering_step(shape, shape.amps, out, drift, ls, dy.data(),
                               dt, nullptr);
  return WaveFunction(out);
}

// Density-matrix step:
// gamma' = gamma + (-i[H+uHhat,gamma] + sum_p(L g L^* - 1/2{L^*L, g})) dt
//          + sum_p (g L_p^* + L_p g) dY_p,
// then re-Hermitized and trace-renormalized; defects reported.
struct DensityStepDefects {
  double herm = 0.0;
  double trace = 0.0;
};

inline CMat step_density(const CMat& gamma, const CMat& h,
                         const std::vector<CMat>& ls, double u,
                         const CMat& hhat, const std::vector<double>& dy,
                         double dt, DensityStepDefects* defects = nullptr) {
  if (dy.size() != ls.size())
    throw std::invalid_argument("step_density: one dY per channel");
  const CMat heff = h + u * hhat;
  CMat d = -kI * (heff * gamma - gamma * heff);
  for (size_t p = 0; p < ls.size(); ++p) {
    const CMat& l = ls[p];
    const CMat ldag = l.adjoint();
    d += l * gamma * ldag - 0.5 * (ldag * l * gamma + gamma * ldag * l);
  }
  CMat out = gamma + dt * d;
  for (size_t p = 0; p < ls.size(); ++p)
    out += dy[p] * (gamma * ls[p].adjoint() + ls[p] * gamma);
  if (!out.allFinite())
    throw std::runtime_error("step_density produced non-finite state");
  const CMat herm = hermitize(out);
  const double tr = herm.trace().real();
  if (defects != nullptr) {
    defects->herm = max_abs(out - herm);
    defects->trace = std::abs(tr - 1.0);
  }
  if (tr <= 0.0) throw std::runtime_error("step_density: trace collapsed");
  return herm / tr;
}

// -i[H,g] + sum_p (L g L^* - 1/2 L^*L g - 1/2 g L^*L). Traceless,
// Hermiticity-preserving.
inline CMat lindblad_rhs(const CMat& gamma, const CMat& h,
                         const std::vector<CMat>& ls) {
  CMat d = -kI * (h * gamma - gamma * h);
  for (const auto& l : ls) {
    const CMat ldag = l.adjoint();
    d += l * gamma * ldag - 0.5 * (ldag * l * gamma + gamma * ldag * l);
  }
  return d;
}

// dB = dY - <L + L^*>_chi dt. Coincides with dY for anti-Hermitian L.
inline double innovation_increment(const WaveFunction& chi, const CMat& l,
                                   double dy, double dt) {
  const double m = expectation_value(l + l.adjoint().eval(), chi).real();
  return dy - m * dt;
}

// RK4 integration of the (linear) Lindblad master equation on [0, T];
// returns the state at every step, index k <-> t = k dt.
inline std::vector<CMat> rk4_lindblad(const CMat& gamma0, const CMat& h,
                                      const std::vector<CMat>& ls, double horizon,
                                      double dt) {
  const int steps = static_cast<int>(std::llround(horizon / dt));
  std::vector<CMat> out;
  out.reserve(steps + 1);
  out.push_back(gamma0);
  CMat g = gamma0;
  for (int k = 0; k < steps; ++k) {
    const CMat k1 = lindblad_rhs(g, h, ls);
    const CMat k2 = lindblad_rhs(g + 0.5 * dt * k1, h, ls);
    const CMat k3 = lindblad_rhs(g + 0.5 * dt * k2, h, ls);
    const CMat k4 = lindblad_rhs(g + dt * k3, h, ls);
    g = hermitize(g + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    out.push_back(g);
  }
  return out;
}

// Single-atom trajectory driver: deterministic given (seed, replica), records
// the state at every sample_every-th step plus the per-step pre-normalization
// norm defects.
struct TrajectoryResult {
  std::vector<double> times;
  std::vector<WaveFunction> states;
  std::vector<double> norm_defects;  // per step, |norm before renorm - 1|
};

inline TrajectoryResult simulate_trajectory(
    const WaveFunction& initial, const CMat& h, const CMat& hhat,
    const std::vector<CMat>& ls, const FeedbackControl& control, double u0,
    const SdeConfig& config, uint64_t seed, uint64_t replica = 0) {
  config.validate();
  const int steps = config.steps();
  const int nch = static_cast<int>(ls.size());
  TrajectoryResult res;
  res.norm_defects.reserve(steps);
  WaveFunction chi = initial;
  std::vector<double> dy(nch, 0.0);
  const double sqdt = std::sqrt(config.dt);
  res.times.push_back(0.0);
  res.states.push_back(chi);
  for (int k = 0; k < steps; ++k) {
    const double t = k * config.dt;
    double u = 0.0;
    if (control.evaluate) {
      u = clamp_control(control.evaluate(t, pure_density(chi)), u0);
    }
    for (int p = 0; p < nch; ++p)
      dy[p] = sqdt * gaussian({seed, replica, static_cast<uint64_t>(k), 0,
                               static_cast<uint64_t>(p), 0});
    WaveFunction next =
        step_linear_belavkin(chi, h, ls, u, hhat, dy, config.dt);
    const double nrm = next.norm();
    res.norm_defects.push_back(std::abs(nrm - 1.0));
    if (config.renormalize) next.amps /= nrm;
    chi = next;
    if ((k + 1) % config.sample_every == 0 || k + 1 == steps) {
      res.times.push_back((k + 1) * config.dt);
      res.states.push_back(chi);
    }
  }
  return res;
}

}  // namespace qmfg
