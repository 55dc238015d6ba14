#pragma once

// N-agent game experiments: run the controlled N-particle filtering dynamics
// with the MFG policy, let player 1 deviate, and measure payoff gains
//   gain = E[payoff_1(deviation)] - E[payoff_1(common)]
// with common random numbers between the two runs. Payoffs:
//   P_j = int_0^T ( tr(J Gamma^(j)) - c/2 u_j^2 ) dt + tr(F Gamma^(j)_T).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qmfg/meanfield.hpp"
#include "qmfg/mfg.hpp"
#include "qmfg/nparticle.hpp"
#include "qmfg/threading.hpp"

namespace qmfg {

// Quadrature payoff from sampled marginals (trapezoid in time).
inline double payoff_nagent(const std::vector<double>& times,
                            const std::vector<CMat>& marginals,
                            const std::vector<double>& controls, const CMat& j,
                            const CMat& f, double c) {
  if (times.size() != marginals.size() || times.size() != controls.size())
    throw std::invalid_argument("payoff_nagent: missing samples");
  double acc = 0.0;
  for (size_t k = 0; k + 1 < times.size(); ++k) {
    const double dt = times[k + 1] - times[k];
    const double a = (j * marginals[k]).trace().real() -
                     0.5 * c * controls[k] * controls[k];
    const double b = (j * marginals[k + 1]).trace().real() -
                     0.5 * c * controls[k + 1] * controls[k + 1];
    acc += 0.5 * dt * (a + b);
  }
  return acc + (f * marginals.back()).trace().real();
}

// Same functional with the limiting one-particle states gamma_t.
inline double payoff_limit(const std::vector<double>& times,
                           const std::vector<CMat>& gammas,
                           const std::vector<double>& controls, const CMat& j,
                           const CMat& f, double c) {
  return payoff_nagent(times, gammas, controls, j, f, c);
}

struct Deviation {
  std::string id;
  bool is_policy = false;
  double constant = 0.0;
  const PolicyInterp* policy = nullptr;
};

struct NashGainRow {
  int n = 0;
  std::string deviation;
  double gain = 0.0;
  double stderr_ = 0.0;
  double envelope = 0.0;
};

struct NashReport {
  std::vector<int> ns;
  int replicas = 0;
  uint64_t seed = 0;
  double kappa = 0.0;
  double envelope_c = 0.0;  // C(T) of the (||J|| T + ||F||) C(T) N^{-1/4} envelope
  std::vector<NashGainRow> rows;
  double spearman_best_response = 0.0;
  bool best_response_flat = false;  // gains pairwise within 3 combined stderr

  const NashGainRow& row(int n, const std::string& id) const {
    for (const auto& r : rows)
      if (r.n == n && r.deviation == id) return r;
    throw std::out_of_range("NashReport::row");
  }
};

// Gronwall-form envelope constant: the payoff-difference chain gives
// |gain| <= 2 sqrt2 (||J|| T + ||F||) sup_t sqrt(E alpha) with
// E alpha <= (e^{7(||A||_HS + kappa ||Hhat||) T} - 1) * 5/sqrt(N) for one
// deviating player, hence gain <= (||J|| T + ||F||) C(T) N^{-1/4}.
inline double nash_envelope_constant(double hs_a, double kappa,
                                     double norm_hhat, double horizon) {
  const double rate = 7.0 * (hs_a + kappa * norm_hhat);
  return 2.0 * std::sqrt(2.0) * std::sqrt(5.0 * (std::exp(rate * horizon) - 1.0));
}

inline double spearman_rho(const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  auto ranks = [&](const std::vector<double>& v) {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) {
      double less = 0, equal = 0;
      for (int k = 0; k < n; ++k) {
        if (v[k] < v[i]) ++less;
        if (v[k] == v[i]) ++equal;
      }
      r[i] = less + 0.5 * (equal - 1) + 1.0;  // average rank for ties
    }
    return r;
  };
  const auto rx = ranks(xs), ry = ranks(ys);
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double num = 0, dx = 0, dy = 0;
  for (int i = 0; i < n; ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx <= 0 || dy <= 0) return 0.0;  // flat profile: no trend
  return num / std::sqrt(dx * dy);
}

struct NashConfig {
  std::vector<int> ns{2, 4, 8, 12};
  int replicas = 200;
  double dt = 1e-3;
  uint64_t seed = 7;
  unsigned threads = 1;
  // Player information: own marginal Gamma^(j), or the quantum empirical
  // measure (1/N) sum Gamma^(k) (used to verify the information extension
  // does not change the gains beyond noise).
  bool empirical_measure_info = false;
};

// Simulate one N-player run; player 0 uses `dev`, everyone else the common
// policy. Returns player 0's payoff.
inline double run_nagent_payoff(const GameSpec& spec, int n,
                                const PolicyInterp& common,
                                const Deviation& dev, const NashConfig& cfg,
                                uint64_t replica_key) {
  const int steps = static_cast<int>(std::llround(spec.horizon / cfg.dt));
  const int nch = static_cast<int>(spec.ls.size());
  NParticleSimulator sim(spec.dim, n, spec.h, spec.hhat, spec.a, spec.ls, true);
  NParticleWave psi = product_state(spec.initial, n);
  std::vector<double> us(n, 0.0);
  std::vector<double> dy(static_cast<size_t>(n) * nch);
  const double sqdt = std::sqrt(cfg.dt);
  std::vector<double> times, u1;
  std::vector<CMat> marg1;
  times.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    const double t = k * cfg.dt;
    CMat emp;
    if (cfg.empirical_measure_info) emp = quantum_empirical_measure(psi);
    std::vector<CMat> margs(n);
    for (int j = 0; j < n; ++j) margs[j] = partial_trace_site(psi, j);
    for (int j = 0; j < n; ++j) {
      const CMat& info = cfg.empirical_measure_info && j > 0 ? emp : margs[j];
      double u;
      if (j == 0) {
        u = dev.is_policy ? dev.policy->eval_gamma(t, info) : dev.constant;
      } else {
        u = common.eval_gamma(t, info);
      }
      us[j] = clamp_control(u, spec.u0);
    }
    times.push_back(t);
    u1.push_back(us[0]);
    marg1.push_back(margs[0]);
    if (k == steps) break;
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < nch; ++p)
        dy[j * nch + p] =
            sqdt * gaussian({cfg.seed, replica_key, static_cast<uint64_t>(k),
                             static_cast<uint64_t>(j),
                             static_cast<uint64_t>(p), 0});
    sim.step(psi, us, dy.data(), cfg.dt);
  }
  return payoff_nagent(times, marg1, u1, spec.j, spec.f, spec.c);
}

inline NashReport nash_experiment(const GameSpec& spec,
                                  const PolicyInterp& common,
                                  const PolicyInterp& best_response,
                                  double kappa, const NashConfig& cfg) {
  NashReport report;
  report.ns = cfg.ns;
  report.replicas = cfg.replicas;
  report.seed = cfg.seed;
  report.kappa = kappa;
  const double hs_a = spec.a.dim() > 0 ? spec.a.hs_norm() : 0.0;
  report.envelope_c =
      nash_envelope_constant(hs_a, kappa, operator_norm(spec.hhat), spec.horizon);
  const double payoff_scale =
      operator_norm(spec.j) * spec.horizon + operator_norm(spec.f);

  std::vector<Deviation> menu;
  menu.push_back({"best-response", true, 0.0, &best_response});
  menu.push_back({"const+U0", false, spec.u0, nullptr});
  menu.push_back({"const-U0", false, -spec.u0, nullptr});
  menu.push_back({"const0", false, 0.0, nullptr});
  menu.push_back({"common", true, 0.0, &common});  // sanity: gain == 0

  std::vector<double> br_gains;
  std::vector<double> br_stderrs;
  for (size_t ni = 0; ni < cfg.ns.size(); ++ni) {
    const int n = cfg.ns[ni];
    std::vector<std::vector<double>> gains(menu.size());
    for (auto& g : gains) g.resize(cfg.replicas, 0.0);
    parallel_for(cfg.replicas, cfg.threads, [&](size_t rep) {
      const uint64_t key =
          (static_cast<uint64_t>(ni) << 40) ^ static_cast<uint64_t>(rep);
      Deviation none{"", true, 0.0, &common};
      const double base = run_nagent_payoff(spec, n, common, none, cfg, key);
      for (size_t d = 0; d < menu.size(); ++d) {
        const double p = run_nagent_payoff(spec, n, common, menu[d], cfg, key);
        gains[d][rep] = p - base;
      }
    });
    for (size_t d = 0; d < menu.size(); ++d) {
      double m = 0, m2 = 0;
      for (double g : gains[d]) {
        m += g;
        m2 += g * g;
      }
      m /= cfg.replicas;
      const double var = std::max(0.0, m2 / cfg.replicas - m * m) /
                         std::max(1, cfg.replicas - 1);
      NashGainRow row;
      row.n = n;
      row.deviation = menu[d].id;
      row.gain = m;
      row.stderr_ = std::sqrt(var);
      row.envelope = payoff_scale * report.envelope_c *
                     std::pow(static_cast<double>(n), -0.25);
      report.rows.push_back(row);
      if (menu[d].id == "best-response") {
        br_gains.push_back(m);
        br_stderrs.push_back(row.stderr_);
      }
    }
  }
  std::vector<double> nsd(cfg.ns.begin(), cfg.ns.end());
  report.spearman_best_response = spearman_rho(nsd, br_gains);
  report.best_response_flat = true;
  for (size_t i = 0; i < br_gains.size() && report.best_response_flat; ++i)
    for (size_t k = i + 1; k < br_gains.size(); ++k) {
      const double sep = 3.0 * std::hypot(br_stderrs[i], br_stderrs[k]);
      if (std::abs(br_gains[i] - br_gains[k]) > sep) {
        report.best_response_flat = false;
        break;
      }
    }
  return report;
}

}  // namespace qmfg
