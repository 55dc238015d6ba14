#pragma once

// The nonlinear (McKean-Vlasov-type) stochastic Schroedinger equation
//   d psi = -[i(H + u Hhat + A^{eta-bar}) psi + 1/2 sum L^*L psi] dt
//           + sum_p L_p psi dY^p,   eta_t = E(psi_t (x) psi_t-bar),
// solved by a self-consistent ensemble; the closed nonlinear Lindblad
// equation for eta under time-only controls; and the convergence harness
// measuring E alpha_N against the Gronwall bounds
//   E alpha_N(t) <= e^{rho t} alpha_N(0) + (e^{rho t} - 1)/sqrt(N),
//   rho = 7 ||A||_HS            (uncontrolled)
//   rho = 7 (||A||_HS + kappa ||Hhat||)   (Lipschitz feedback).

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qmfg/belavkin.hpp"
#include "qmfg/nparticle.hpp"
#include "qmfg/threading.hpp"

namespace qmfg {

struct EnsembleState {
  std::vector<WaveFunction> members;
  CMat eta_estimate;  // (1/M) sum pure_density(member)
};

inline CMat ensemble_eta(const std::vector<WaveFunction>& members) {
  CMat eta = CMat::Zero(members[0].dim(), members[0].dim());
  for (const auto& m : members) eta += m.amps * m.amps.adjoint();
  return eta / static_cast<double>(members.size());
}

enum class BoundVariant { Uncontrolled, LipschitzFeedback };

// Closed-form theorem bound; alpha0 is the initial deviation (0 for product
// initial data).
inline double theorem_bound(double t, double hs_norm_a, double kappa,
                            double norm_hhat, double alpha0, int n,
                            BoundVariant variant) {
  if (t < 0 || hs_norm_a < 0 || kappa < 0 || norm_hhat < 0 || alpha0 < 0 ||
      n < 1)
    throw std::invalid_argument("theorem_bound: negative input");
  const double rate = variant == BoundVariant::Uncontrolled
                          ? 7.0 * hs_norm_a
                          : 7.0 * (hs_norm_a + kappa * norm_hhat);
  const double e = std::exp(rate * t);
  return e * alpha0 + (e - 1.0) / std::sqrt(static_cast<double>(n));
}

// RK4 for d eta/dt = -i[H + u(t) Hhat, eta] - i[A^{eta-bar}, eta] +
// sum_p (L eta L^* - 1/2 {L^*L, eta}). Valid for time-only controls; trace
// and Hermiticity are monitored and a breach beyond 1e-8 aborts.
inline std::vector<CMat> solve_nonlinear_lindblad(
    const CMat& eta0, const CMat& h, const CMat& hhat,
    const InteractionTensor& a, const std::vector<CMat>& ls,
    const std::function<double(double)>& u_of_t, double horizon, double dt) {
  const int steps = static_cast<int>(std::llround(horizon / dt));
  const bool has_a = a.dim() > 0 && !a.zero();
  auto rhs = [&](const CMat& eta, double t) {
    CMat heff = h;
    if (u_of_t) heff += u_of_t(t) * hhat;
    if (has_a) heff += a.contract_eta_bar(eta);
    CMat d = -kI * (heff * eta - eta * heff);
    for (const auto& l : ls) {
      const CMat ldag = l.adjoint();
      d += l * eta * ldag - 0.5 * (ldag * l * eta + eta * ldag * l);
    }
    return d;
  };
  std::vector<CMat> out;
  out.reserve(steps + 1);
  out.push_back(eta0);
  CMat g = eta0;
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const CMat k1 = rhs(g, t);
    const CMat k2 = rhs(g + 0.5 * dt * k1, t + 0.5 * dt);
    const CMat k3 = rhs(g + 0.5 * dt * k2, t + 0.5 * dt);
    const CMat k4 = rhs(g + dt * k3, t + dt);
    g = g + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double herm = max_abs(g - g.adjoint().eval());
    const double tdef = std::abs(g.trace().real() - 1.0);
    if (herm > 1e-8 || tdef > 1e-8)
      throw std::runtime_error(
          "solve_nonlinear_lindblad: trace/Hermiticity tolerance breach");
    g = hermitize(g);
    out.push_back(g);
  }
  return out;
}

// Self-consistent ensemble solve of the nonlinear SSE: identical initial
// conditions, independent noise per copy, eta refreshed from the ensemble
// every step. Control is evaluated on each copy's own pure density.
struct NonlinearSseResult {
  std::vector<double> times;
  std::vector<EnsembleState> snapshots;  // at sample times
  std::vector<CMat> eta_curve;           // every step, index k <-> t = k dt
};

inline NonlinearSseResult solve_nonlinear_sse(
    const WaveFunction& initial, const CMat& h, const CMat& hhat,
    const FeedbackControl& control, double u0, const InteractionTensor& a,
    const std::vector<CMat>& ls, int copies, const SdeConfig& config,
    uint64_t seed) {
  config.validate();
  if (!initial.unit_norm())
    throw std::invalid_argument("solve_nonlinear_sse: initial must be unit");
  const int steps = config.steps();
  const int nch = static_cast<int>(ls.size());
  const int d = initial.dim();
  const CMat kop = half_ldag_l(ls, d);
  const bool has_a = a.dim() > 0 && !a.zero();
  const double sqdt = std::sqrt(config.dt);

  std::vector<WaveFunction> members(copies, initial);
  NonlinearSseResult res;
  res.eta_curve.reserve(steps + 1);
  auto record = [&](double t) {
    res.times.push_back(t);
    res.snapshots.push_back({members, ensemble_eta(members)});
  };
  record(0.0);
  std::vector<double> dy(nch);
  for (int k = 0; k < steps; ++k) {
    const double t = k * config.dt;
    const CMat eta = ensemble_eta(members);
    res.eta_curve.push_back(eta);
    const CMat aeff = has_a ? a.contract_eta_bar(eta) : CMat::Zero(d, d);
    for (int m = 0; m < copies; ++m) {
      double u = 0.0;
      if (control.evaluate)
        u = clamp_control(control.evaluate(t, pure_density(members[m])), u0);
      const CMat drift = -kI * (h + u * hhat + aeff) - kop;
      CMat noise = CMat::Identity(d, d);
      for (int p = 0; p < nch; ++p)
        noise += sqdt *
                 gaussian({seed, static_cast<uint64_t>(m),
                           static_cast<uint64_t>(k), 0,
                           static_cast<uint64_t>(p), 0}) *
                 ls[p];
      CVec next = noise * members[m].amps +
                  config.dt * (drift * members[m].amps);
      members[m].amps = next;
      if (config.renormalize) members[m].normalize();
    }
    if ((k + 1) % config.sample_every == 0 || k + 1 == steps)
      record((k + 1) * config.dt);
  }
  res.eta_curve.push_back(ensemble_eta(members));
  return res;
}

// ---------------------------------------------------------------------------
// Convergence experiment: N-particle system vs N limiting copies driven by
// the same per-site noise, measuring E alpha_N(t) and the trace-distance
// sandwich alpha <= tr|Gamma^(j) - gamma_j| <= 2 sqrt(2 alpha).

struct ConvergenceConfig {
  std::vector<int> ns;
  double horizon = 0.5;
  double dt = 1e-3;
  int replicas = 200;
  int sample_every = 25;
  uint64_t seed = 1;
  unsigned threads = 1;
  // Reference eta for the limiting copies: RK4 of the closed equation when
  // the control is time-only; otherwise a McKean-Vlasov ensemble of
  // eta_ensemble_copies independent members.
  bool feedback = false;
  int eta_ensemble_copies = 1000;
};

struct ConvergenceRow {
  int n = 0;
  double t = 0.0;
  double alpha_mean = 0.0;
  double alpha_stderr = 0.0;
  double trace_dist_mean = 0.0;
  double bound_uncontrolled = 0.0;
  double bound_feedback = 0.0;
};

struct ConvergenceReport {
  std::vector<int> ns;
  std::vector<double> times;
  std::vector<ConvergenceRow> rows;  // ns-major
  double sandwich_violation = 0.0;   // max over every sample
  double kappa = 0.0;
  double hs_norm_a = 0.0;
  double norm_hhat = 0.0;
  // log-log fit of sup_t E alpha_N vs N
  double loglog_slope = 0.0;

  double sup_alpha(int n) const {
    double s = 0.0;
    for (const auto& r : rows)
      if (r.n == n) s = std::max(s, r.alpha_mean);
    return s;
  }
};

inline double fit_loglog_slope(const std::vector<double>& xs,
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

inline ConvergenceReport convergence_experiment(
    const CMat& h, const CMat& hhat, const InteractionTensor& a,
    const std::vector<CMat>& ls, const FeedbackControl& control, double u0,
    const ConvergenceConfig& cfg, const WaveFunction& initial) {
  const int d = initial.dim();
  const int steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
  const int nch = static_cast<int>(ls.size());
  const CMat kop = half_ldag_l(ls, d);
  const bool has_a = a.dim() > 0 && !a.zero();
  const double sqdt = std::sqrt(cfg.dt);

  // Deterministic reference eta curve for the limiting equation.
  std::vector<CMat> eta_curve;
  if (!cfg.feedback) {
    eta_curve = solve_nonlinear_lindblad(pure_density(initial), h, hhat, a, ls,
                                         nullptr, cfg.horizon, cfg.dt);
  } else {
    // Self-consistent auxiliary ensemble, independent noise, computed once.
    SdeConfig sde{cfg.dt, cfg.horizon, true, steps};
    auto aux = solve_nonlinear_sse(initial, h, hhat, control, u0, a, ls,
                                   cfg.eta_ensemble_copies, sde,
                                   cfg.seed ^ 0xE7A0ull);
    eta_curve = std::move(aux.eta_curve);
  }

  std::vector<int> sample_steps;
  for (int k = 1; k <= steps; ++k)
    if (k % cfg.sample_every == 0 || k == steps) sample_steps.push_back(k);
  const int nsamples = static_cast<int>(sample_steps.size());

  ConvergenceReport report;
  report.ns = cfg.ns;
  for (int k : sample_steps) report.times.push_back(k * cfg.dt);
  report.hs_norm_a = a.dim() > 0 ? a.hs_norm() : 0.0;
  report.norm_hhat = operator_norm(hhat);
  report.kappa = control.lipschitz;

  for (size_t ni = 0; ni < cfg.ns.size(); ++ni) {
    const int n = cfg.ns[ni];
    struct ReplicaOut {
      std::vector<double> alpha;  // per sample, averaged over j
      std::vector<double> tdist;
      double sandwich = 0.0;
    };
    std::vector<ReplicaOut> outs(cfg.replicas);

    parallel_for(cfg.replicas, cfg.threads, [&](size_t rep) {
      NParticleSimulator sim(d, n, h, hhat, a, ls, true);
      NParticleWave psi = product_state(initial, n);
      std::vector<WaveFunction> copies(n, initial);
      std::vector<double> us(n, 0.0), ucopy(n, 0.0);
      std::vector<double> dy(static_cast<size_t>(n) * nch);
      ReplicaOut out;
      out.alpha.resize(nsamples, 0.0);
      out.tdist.resize(nsamples, 0.0);
      const uint64_t repkey =
          (static_cast<uint64_t>(ni) << 32) ^ static_cast<uint64_t>(rep);
      int sample_idx = 0;
      for (int k = 0; k < steps; ++k) {
        const double t = k * cfg.dt;
        // controls at the left endpoint
        for (int j = 0; j < n; ++j) {
          us[j] = control.evaluate
                      ? clamp_control(
                            control.evaluate(t, partial_trace_site(psi, j)), u0)
                      : 0.0;
          ucopy[j] = control.evaluate
                         ? clamp_control(
                               control.evaluate(t, pure_density(copies[j])), u0)
                         : 0.0;
        }
        for (int j = 0; j < n; ++j)
          for (int p = 0; p < nch; ++p)
            dy[j * nch + p] =
                sqdt * gaussian({cfg.seed, repkey, static_cast<uint64_t>(k),
                                 static_cast<uint64_t>(j),
                                 static_cast<uint64_t>(p), 0});
        // limiting copies share the site noise, same factored arithmetic as
        // the joint step
        const CMat aeff =
            has_a ? a.contract_eta_bar(eta_curve[k]) : CMat::Zero(d, d);
        for (int j = 0; j < n; ++j) {
          const CMat drift = -kI * (h + ucopy[j] * hhat + aeff) - kop;
          CMat noise = CMat::Identity(d, d);
          for (int p = 0; p < nch; ++p) noise += dy[j * nch + p] * ls[p];
          copies[j].amps = (noise * copies[j].amps +
                            cfg.dt * (drift * copies[j].amps))
                               .eval();
          copies[j].normalize();
        }
        sim.step(psi, us, dy.data(), cfg.dt);
        if (sample_idx < nsamples && k + 1 == sample_steps[sample_idx]) {
          double asum = 0.0, tsum = 0.0;
          for (int j = 0; j < n; ++j) {
            const CMat gj = pure_density(copies[j]);
            const double alpha = alpha_j(psi, gj, j);
            const CMat marg = partial_trace_site(psi, j);
            const double td = trace_distance(marg, gj);
            asum += alpha;
            tsum += td;
            const double lower = alpha - td;
            const double upper =
                td - 2.0 * std::sqrt(2.0 * std::max(alpha, 0.0));
            out.sandwich = std::max({out.sandwich, lower, upper});
          }
          out.alpha[sample_idx] = asum / n;
          out.tdist[sample_idx] = tsum / n;
          ++sample_idx;
        }
      }
      outs[rep] = std::move(out);
    });

    for (int s = 0; s < nsamples; ++s) {
      double am = 0.0, a2 = 0.0, tm = 0.0;
      for (const auto& o : outs) {
        am += o.alpha[s];
        a2 += o.alpha[s] * o.alpha[s];
        tm += o.tdist[s];
      }
      am /= cfg.replicas;
      tm /= cfg.replicas;
      const double var =
          std::max(0.0, a2 / cfg.replicas - am * am) / std::max(1, cfg.replicas - 1);
      ConvergenceRow row;
      row.n = n;
      row.t = report.times[s];
      row.alpha_mean = am;
      row.alpha_stderr = std::sqrt(var);
      row.trace_dist_mean = tm;
      row.bound_uncontrolled = theorem_bound(row.t, report.hs_norm_a, 0.0, 0.0, 0.0, n,
                                   BoundVariant::Uncontrolled);
      row.bound_feedback =
          theorem_bound(row.t, report.hs_norm_a, report.kappa,
                        report.norm_hhat, 0.0, n, BoundVariant::LipschitzFeedback);
      report.rows.push_back(row);
    }
    for (const auto& o : outs)
      report.sandwich_violation = std::max(report.sandwich_violation, o.sandwich);
  }

  std::vector<double> xs, ys;
  for (int n : cfg.ns) {
    xs.push_back(n);
    ys.push_back(report.sup_alpha(n));
  }
  report.loglog_slope = fit_loglog_slope(xs, ys);
  return report;
}

}  // namespace qmfg
