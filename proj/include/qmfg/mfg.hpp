#pragma once

// Limiting mean-field-game system on CP^1, solved in mild form through the
// heat semigroup:
//   backward  S_t = e^{2 dt Lap} S_{t+dt}
//                   + dt [ <J>_W + sup_u { u Pi(grad S) - c u^2 / 2 }
//                          + v_eta . grad S ],        S_T = <F>_W
//   forward   mu_{t+dt} = e^{2 dt Lap} mu_t - dt div( v mu_t ),
//                          mu_dt = heat kernel at w(0)  (Dirac start)
// coupled through u = clamp(Pi / c, [-U0, U0]) and eta(k,l) = E(psi_k psi_l-bar)
// taken against mu_t. The Picard loop iterates mu -> eta -> (S, u) -> mu and
// reports per-iteration contraction factors.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmfg/belavkin.hpp"
#include "qmfg/interaction.hpp"
#include "qmfg/projective.hpp"
#include "qmfg/sphere.hpp"

namespace qmfg {

struct GameSpec {
  int dim = 2;
  CMat h, hhat;
  InteractionTensor a;
  std::vector<CMat> ls;
  CMat j, f;
  double c = 1.0;
  double u0 = 1.0;
  double horizon = 0.1;
  WaveFunction initial;

  std::vector<std::string> diagnostics() const {
    std::vector<std::string> out;
    auto dimcheck = [&](const CMat& m, const char* name) {
      if (m.rows() != dim || m.cols() != dim)
        out.push_back(std::string(name) + ": wrong dimension");
    };
    dimcheck(h, "H");
    dimcheck(hhat, "Hhat");
    dimcheck(j, "J");
    dimcheck(f, "F");
    if (!is_hermitian(h)) out.push_back("H: not Hermitian");
    if (!is_hermitian(hhat)) out.push_back("Hhat: not Hermitian");
    if (!is_hermitian(j)) out.push_back("J: not Hermitian");
    if (!is_hermitian(f)) out.push_back("F: not Hermitian");
    for (size_t p = 0; p < ls.size(); ++p)
      if (ls[p].rows() != dim || !is_anti_hermitian(ls[p]))
        out.push_back("L[" + std::to_string(p) +
                      "]: not anti-Hermitian (conservative case required)");
    if (a.dim() > 0) {
      if (a.dim() != dim) out.push_back("A: wrong dimension");
      const std::string v = a.violation();
      if (!v.empty()) out.push_back("A: " + v);
    }
    if (!(c > 0)) out.push_back("c: must be > 0");
    if (!(u0 > 0)) out.push_back("U0: must be > 0");
    if (!(horizon > 0)) out.push_back("T: must be > 0");
    if (initial.dim() != dim)
      out.push_back("initial: wrong dimension");
    else if (!initial.unit_norm())
      out.push_back("initial: not unit norm");
    return out;
  }
  void validate() const {
    const auto d = diagnostics();
    if (!d.empty()) throw std::invalid_argument("GameSpec: " + d.front());
  }
};

struct MfgNumerics {
  int lmax = 48;
  int ntheta = 64;
  int nphi = 128;
  double dt = 5e-3;
  double tol = 1e-5;
  int max_iter = 20;

  void validate() const {
    if (lmax < 8 || ntheta <= lmax || nphi <= 2 * lmax)
      throw std::invalid_argument("MfgNumerics: grid too coarse");
    if (!(dt > 0) || !(tol > 0) || max_iter < 1)
      throw std::invalid_argument("MfgNumerics: invalid numerics");
  }
};

struct EtaCurve {
  std::vector<double> times;
  std::vector<CMat> values;

  const CMat& at(int k) const { return values[k]; }
  double increment_bound_constant(double dt) const {
    double c = 0.0;
    for (size_t k = 0; k + 1 < values.size(); ++k)
      c = std::max(c, trace_distance(values[k + 1], values[k]) / dt);
    return c;
  }
};

struct TimedField {
  std::vector<double> times;
  std::vector<SphereField> slices;
};

struct MfgSolution {
  TimedField value;       // S_t, t = 0..T
  TimedField policy;      // u_t, piecewise constant on [t_k, t_{k+1})
  TimedField flow;        // mu_t, t = dt..T
  EtaCurve eta;           // t = 0..T
  double consistency_residual = -1.0;
  int picard_iterations = 0;
  bool converged = false;
  bool divergence_flagged = false;
  std::vector<double> tv_deltas;       // per iteration
  std::vector<double> q_factors;       // contraction q_k
  std::vector<double> dual_c1_deltas;  // reported alongside TV
  double max_clip_defect = 0.0;
  double max_mass_defect = 0.0;
  double value_bound_margin = 0.0;  // max ||S_t||_inf - bound(t); <=0 when ok
  double eta_increment_constant = 0.0;
};

// u = min(max(Pi/c, -U0), U0): the maximizer of u Pi - c u^2/2 over [-U0, U0].
inline double control_from_gradient(double pi, double c, double u0) {
  if (!(c > 0)) throw std::invalid_argument("control_from_gradient: c <= 0");
  return clamp_control(pi / c, u0);
}

// Pi(grad S) = Re[b_Hhat] dS/dx + Im[b_Hhat] dS/dy in the chart (n = 1).
inline double pi_gradient(const ProjectivePoint& p,
                          const std::array<double, 2>& grad_s,
                          const CMat& hhat) {
  if (p.n != 1) throw std::invalid_argument("pi_gradient: qubit chart only");
  const auto b = projective_drift(p, hhat);
  return b[0].real() * grad_s[0] + b[0].imag() * grad_s[1];
}

// eta(k,l) = integral of psi_k psi_l-bar d mu, psi the unit lift of the grid
// point. Hermitian PSD trace-1 for a probability density.
inline CMat eta_from_measure(const SphereMeasure& mu) {
  const auto& tr = *mu.density.tr;
  CMat eta = CMat::Zero(2, 2);
  for (int i = 0; i < tr.ntheta(); ++i) {
    const double th = tr.theta(i);
    const double c = std::cos(0.5 * th), s = std::sin(0.5 * th);
    for (int j = 0; j < tr.nphi(); ++j) {
      const double w = tr.cell_weight(i) * mu.density.grid[i * (size_t)tr.nphi() + j];
      const double ph = tr.phi(j);
      const Complex psi1 = s * Complex(std::cos(ph), std::sin(ph));
      eta(0, 0) += w * c * c;
      eta(0, 1) += w * c * std::conj(psi1);
      eta(1, 1) += w * std::norm(psi1);
    }
  }
  eta(1, 0) = std::conj(eta(0, 1));
  return eta;
}

// Piecewise-constant-in-time policy lookup with bilinear interpolation in
// (theta, phi); mixed states enter through their Bloch direction.
class PolicyInterp {
 public:
  PolicyInterp() = default;
  PolicyInterp(const TimedField& policy, double dt) : dt_(dt) {
    tr_ = policy.slices.front().tr;
    for (const auto& s : policy.slices) grids_.push_back(s.grid);
  }

  double eval_angles(double t, double theta, double phi) const {
    const int n = static_cast<int>(grids_.size());
    int k = static_cast<int>(std::floor(t / dt_ + 1e-12));
    k = std::min(std::max(k, 0), n - 1);
    return bilinear(grids_[k], theta, phi);
  }

  double eval_gamma(double t, const CMat& gamma) const {
    const Eigen::Vector3d r = bloch_vector(gamma);
    const double nr = r.norm();
    if (nr < 1e-12) return 0.0;  // maximally mixed: no preferred direction
    const double theta = std::acos(std::min(1.0, std::max(-1.0, r[2] / nr)));
    const double phi = std::atan2(r[1], r[0]);
    return eval_angles(t, theta, phi);
  }

  FeedbackControl as_control(double kappa) const {
    const PolicyInterp* self = this;
    return {[self](double t, const CMat& g) { return self->eval_gamma(t, g); },
            kappa};
  }

 private:
  double bilinear(const std::vector<double>& g, double theta,
                  double phi) const {
    const auto& tr = *tr_;
    const int nt = tr.ntheta(), np = tr.nphi();
    // theta clamped to the node range; phi periodic
    double t = std::min(std::max(theta, tr.theta(0)), tr.theta(nt - 1));
    int i = 0;
    while (i + 2 < nt && tr.theta(i + 1) < t) ++i;
    const double t0 = tr.theta(i), t1 = tr.theta(i + 1);
    const double a = (t - t0) / (t1 - t0);
    double p = phi - 2.0 * kPi * std::floor(phi / (2.0 * kPi));
    const double dp = 2.0 * kPi / np;
    const int j = static_cast<int>(p / dp) % np;
    const double b = (p - j * dp) / dp;
    auto v = [&](int ii, int jj) { return g[ii * (size_t)np + (jj % np)]; };
    return (1 - a) * ((1 - b) * v(i, j) + b * v(i, j + 1)) +
           a * ((1 - b) * v(i + 1, j) + b * v(i + 1, j + 1));
  }

  TransformPtr tr_;
  std::vector<std::vector<double>> grids_;
  double dt_ = 1.0;
};

class MfgSolver {
 public:
  MfgSolver(GameSpec spec, MfgNumerics num)
      : spec_(std::move(spec)), num_(num) {
    spec_.validate();
    num_.validate();
    if (spec_.dim != 2)
      throw std::invalid_argument("MfgSolver: CP^1 (qubit) solves only");
    tr_ = make_transform(num_.lmax, num_.ntheta, num_.nphi);
    steps_ = static_cast<int>(std::llround(spec_.horizon / num_.dt));
    if (steps_ < 1) throw std::invalid_argument("MfgSolver: T < dt");
    build_geometry();
    const ProjectivePoint p0 = to_projective_any(spec_.initial);
    const auto [th0, ph0] = chart_to_bloch(p0.n == 1 ? p0.w[0] : Complex(0));
    theta0_ = th0;
    phi0_ = ph0;
    eta0_ = pure_density(spec_.initial);
  }

  const TransformPtr& transform() const { return tr_; }
  int steps() const { return steps_; }

  // Expectation fields <M>_psi over the grid.
  SphereField expectation_field(const CMat& m) const {
    std::vector<double> g(tr_->grid_count());
    for (int i = 0; i < tr_->grid_count(); ++i) {
      const Complex p0 = psi0_[i], p1 = psi1_[i];
      g[i] = (std::conj(p0) * (m(0, 0) * p0 + m(0, 1) * p1) +
              std::conj(p1) * (m(1, 0) * p0 + m(1, 1) * p1))
                 .real();
    }
    return SphereField::from_grid(tr_, std::move(g));
  }

  // Sphere-frame drift components for Hermitian G at every grid point.
  void drift_field(const CMat& g, std::vector<double>& vtheta,
                   std::vector<double>& vphi) const {
    vtheta.resize(tr_->grid_count());
    vphi.resize(tr_->grid_count());
    for (int i = 0; i < tr_->grid_count(); ++i) {
      const Complex p0 = psi0_[i], p1 = psi1_[i];
      const Complex g0 = g(0, 0) * p0 + g(0, 1) * p1;
      const Complex g1 = g(1, 0) * p0 + g(1, 1) * p1;
      const Complex v = 2.0 * conj_eip_[i] * kI * (p1 * g0 - p0 * g1);
      vtheta[i] = v.real();
      vphi[i] = v.imag();
    }
  }

  // Backward mild HJB sweep against a fixed eta curve. Returns value and
  // policy fields; policy[k] is the control used on [t_k, t_{k+1}).
  void hjb_backward_solve(const EtaCurve& eta, TimedField& value,
                          TimedField& policy) const {
    const double dt = num_.dt;
    value.times.assign(steps_ + 1, 0.0);
    value.slices.assign(steps_ + 1, SphereField());
    policy.times.assign(steps_ + 1, 0.0);
    policy.slices.assign(steps_ + 1, SphereField());
    for (int k = 0; k <= steps_; ++k) {
      value.times[k] = k * dt;
      policy.times[k] = k * dt;
    }
    const SphereField jfield = expectation_field(spec_.j);
    value.slices[steps_] = expectation_field(spec_.f);
    policy.slices[steps_] = policy_from_value(value.slices[steps_]);
    std::vector<double> gt, gp, vt, vp;
    for (int k = steps_ - 1; k >= 0; --k) {
      const SphereField& snext = value.slices[k + 1];
      tr_->synth_gradient(snext.coeffs, gt, gp);
      const CMat getadrift = eta_drift_operator(eta.at(k + 1));
      drift_field(getadrift, vt, vp);
      std::vector<double> u(tr_->grid_count());
      std::vector<double> react(tr_->grid_count());
      for (int i = 0; i < tr_->grid_count(); ++i) {
        const double pi = vhat_t_[i] * gt[i] + vhat_p_[i] * gp[i];
        const double ui = control_from_gradient(pi, spec_.c, spec_.u0);
        u[i] = ui;
        react[i] = jfield.grid[i] + ui * pi - 0.5 * spec_.c * ui * ui +
                   vt[i] * gt[i] + vp[i] * gp[i];
      }
      std::vector<double> c = snext.coeffs;
      heat_coeffs_inplace(*tr_, c, dt);
      SphereField heated = SphereField::from_coeffs(tr_, std::move(c));
      std::vector<double> g(tr_->grid_count());
      for (int i = 0; i < tr_->grid_count(); ++i)
        g[i] = heated.grid[i] + dt * react[i];
      value.slices[k] = SphereField::from_grid(tr_, std::move(g));
      policy.slices[k] = SphereField::from_grid(tr_, std::move(u));
      if (!std::isfinite(value.slices[k].sup_norm()))
        throw std::runtime_error("hjb_backward_solve: non-finite value field");
    }
  }

  // Forward Kolmogorov sweep; flow[k] is mu at t_{k+1}, k = 0..steps-1.
  // The Dirac start is replaced by the exact kernel after one step of dt.
  void kolmogorov_forward_solve(const TimedField& policy, const EtaCurve& eta,
                                TimedField& flow, double& max_clip,
                                double& max_mass) const {
    const double dt = num_.dt;
    flow.times.clear();
    flow.slices.clear();
    max_clip = 0.0;
    max_mass = 0.0;
    SphereMeasure mu =
        SphereMeasure::from_field(heat_kernel_field(tr_, dt, theta0_, phi0_));
    auto defects = mu.make_probability();
    max_clip = std::max(max_clip, defects.first);
    max_mass = std::max(max_mass, defects.second);
    flow.times.push_back(dt);
    flow.slices.push_back(mu.density);
    std::vector<double> vt, vp;
    for (int k = 1; k < steps_; ++k) {
      const CMat gop = eta_drift_operator(eta.at(k));
      drift_field(gop, vt, vp);
      const auto& ugrid = policy.slices[k].grid;
      const int n = tr_->grid_count();
      std::vector<double> xtheta(n), xphi(n);
      for (int i = 0; i < n; ++i) {
        const double vtt = vt[i] + ugrid[i] * vhat_t_[i];
        const double vpp = vp[i] + ugrid[i] * vhat_p_[i];
        xtheta[i] = vtt * mu.density.grid[i];
        xphi[i] = vpp * mu.density.grid[i];
      }
      // div X = d_theta X_theta + cot(theta) X_theta + (1/sin) d_phi X_phi
      const auto ct = tr_->analyze(xtheta);
      const auto cp = tr_->analyze(xphi);
      std::vector<double> div = tr_->synth_dtheta(ct);
      const std::vector<double> dphi = tr_->synth_dphi_over_sin(cp);
      for (int i = 0; i < tr_->ntheta(); ++i) {
        const double cot = std::cos(tr_->theta(i)) / tr_->sin_theta(i);
        for (int j = 0; j < tr_->nphi(); ++j) {
          const size_t idx = i * (size_t)tr_->nphi() + j;
          div[idx] += cot * xtheta[idx] + dphi[idx];
        }
      }
      std::vector<double> c = mu.density.coeffs;
      heat_coeffs_inplace(*tr_, c, dt);
      const SphereField heated = SphereField::from_coeffs(tr_, std::move(c));
      std::vector<double> g(n);
      for (int i = 0; i < n; ++i) g[i] = heated.grid[i] - dt * div[i];
      mu = SphereMeasure::from_field(SphereField::from_grid(tr_, std::move(g)));
      defects = mu.make_probability();
      max_clip = std::max(max_clip, defects.first);
      max_mass = std::max(max_mass, defects.second);
      if (defects.second > 1e-4)
        throw std::runtime_error(
            "kolmogorov_forward_solve: mass defect > 1e-4 per step");
      flow.times.push_back((k + 1) * dt);
      flow.slices.push_back(mu.density);
    }
  }

  EtaCurve eta_from_flow(const TimedField& flow) const {
    EtaCurve eta;
    eta.times.push_back(0.0);
    eta.values.push_back(eta0_);
    for (size_t k = 0; k < flow.slices.size(); ++k) {
      SphereMeasure m;
      m.density = flow.slices[k];
      m.total_mass = 1.0;
      eta.times.push_back(flow.times[k]);
      eta.values.push_back(eta_from_measure(m));
    }
    return eta;
  }

  double tv_distance(const SphereField& a, const SphereField& b) const {
    std::vector<double> d(tr_->grid_count());
    for (int i = 0; i < tr_->grid_count(); ++i)
      d[i] = std::abs(a.grid[i] - b.grid[i]);
    return tr_->quadrature(d);
  }

  // Band-limited dual-C1 proxy: coefficient differences damped by
  // 1/(1 + sqrt(l(l+1))).
  double dual_c1_distance(const SphereField& a, const SphereField& b) const {
    double m = 0.0;
    for (int l = 0; l <= tr_->lmax(); ++l) {
      const double wgt = 1.0 / (1.0 + std::sqrt(l * (l + 1.0)));
      for (int mm = 0; mm <= l; ++mm) {
        const int ic = SphereTransform::cidx(l, mm, false);
        m = std::max(m, wgt * std::abs(a.coeffs[ic] - b.coeffs[ic]));
        if (mm > 0) {
          const int is = SphereTransform::cidx(l, mm, true);
          m = std::max(m, wgt * std::abs(a.coeffs[is] - b.coeffs[is]));
        }
      }
    }
    return m;
  }

  MfgSolution picard_solve() const {
    MfgSolution sol;
    // iteration 0: drift-free heat flow
    TimedField flow;
    flow.times.clear();
    for (int k = 1; k <= steps_; ++k) {
      flow.times.push_back(k * num_.dt);
      SphereMeasure mu = SphereMeasure::from_field(
          heat_kernel_field(tr_, k * num_.dt, theta0_, phi0_));
      mu.make_probability();
      flow.slices.push_back(mu.density);
    }
    double prev_delta = -1.0;
    int diverging_streak = 0;
    TimedField best_flow = flow, best_value, best_policy;
    double best_delta = -1.0;
    TimedField value, policy;
    for (int it = 1; it <= num_.max_iter; ++it) {
      const EtaCurve eta = eta_from_flow(flow);
      hjb_backward_solve(eta, value, policy);
      TimedField next_flow;
      double clip = 0.0, mass = 0.0;
      kolmogorov_forward_solve(policy, eta, next_flow, clip, mass);
      sol.max_clip_defect = std::max(sol.max_clip_defect, clip);
      sol.max_mass_defect = std::max(sol.max_mass_defect, mass);
      double delta = 0.0, ddual = 0.0;
      for (size_t k = 0; k < flow.slices.size(); ++k) {
        delta = std::max(delta, tv_distance(flow.slices[k], next_flow.slices[k]));
        ddual = std::max(ddual,
                         dual_c1_distance(flow.slices[k], next_flow.slices[k]));
      }
      sol.tv_deltas.push_back(delta);
      sol.dual_c1_deltas.push_back(ddual);
      if (prev_delta > 0) {
        const double q = delta / prev_delta;
        sol.q_factors.push_back(q);
        diverging_streak = q > 1.0 ? diverging_streak + 1 : 0;
        if (diverging_streak >= 3) sol.divergence_flagged = true;
      }
      prev_delta = delta;
      flow = std::move(next_flow);
      if (best_delta < 0 || delta < best_delta) {
        best_delta = delta;
        best_flow = flow;
        best_value = value;
        best_policy = policy;
      }
      sol.picard_iterations = it;
      if (delta < num_.tol) {
        sol.converged = true;
        break;
      }
    }
    if (!sol.converged) {
      flow = best_flow;
      value = best_value;
      policy = best_policy;
    }
    // The stored policy/value are the ones that produced the final flow (from
    // the previous eta iterate); consistency_residual measures how far they
    // sit from a fresh solve against the final eta.
    sol.eta = eta_from_flow(flow);
    sol.value = std::move(value);
    sol.policy = std::move(policy);
    sol.flow = std::move(flow);
    finalize_diagnostics(sol);
    return sol;
  }

  // Re-derive the individually optimal policy from the solution's eta and
  // report the sup grid difference from the policy in use.
  double consistency_residual(const MfgSolution& sol) const {
    TimedField value, policy;
    hjb_backward_solve(sol.eta, value, policy);
    double r = 0.0;
    for (size_t k = 0; k < policy.slices.size(); ++k)
      for (int i = 0; i < tr_->grid_count(); ++i)
        r = std::max(r, std::abs(policy.slices[k].grid[i] -
                                 sol.policy.slices[k].grid[i]));
    return r;
  }

  double theta0() const { return theta0_; }
  double phi0() const { return phi0_; }
  const GameSpec& spec() const { return spec_; }
  const MfgNumerics& numerics() const { return num_; }

  // Numerical Lipschitz constant of the policy in gamma (trace norm),
  // probed at random near-pure pairs.
  double estimate_kappa(const PolicyInterp& pol, uint64_t seed,
                        int draws = 400) const {
    SequenceRng rng(seed);
    double kappa = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double t = rng.uniform(0.0, spec_.horizon);
      Eigen::Vector3d r(rng.normal(), rng.normal(), rng.normal());
      r.normalize();
      const double amp = rng.uniform(0.6, 1.0);
      Eigen::Vector3d r2 = r + 0.05 * Eigen::Vector3d(rng.normal(), rng.normal(),
                                                      rng.normal());
      r2 = r2.normalized() * std::min(1.0, amp + 0.05 * rng.normal());
      const CMat g1 = 0.5 * (CMat::Identity(2, 2) +
                             amp * (r[0] * pauli_x() + r[1] * pauli_y() +
                                    r[2] * pauli_z()));
      const CMat g2 = 0.5 * (CMat::Identity(2, 2) + r2[0] * pauli_x() +
                             r2[1] * pauli_y() + r2[2] * pauli_z());
      const double du = std::abs(pol.eval_gamma(t, g1) - pol.eval_gamma(t, g2));
      const double dg = trace_distance(g1, g2);
      if (dg > 1e-9) kappa = std::max(kappa, du / dg);
    }
    return kappa;
  }

 private:
  static ProjectivePoint to_projective_any(const WaveFunction& psi) {
    // Fix the global phase so psi_0 is real >= 0, then chart V0; fall back to
    // the swapped chart only to place the Bloch point (theta, phi).
    ProjectivePoint p;
    p.n = psi.dim() - 1;
    p.w.resize(p.n);
    if (std::abs(psi.amps[0]) > 1e-14) {
      for (int k = 0; k < p.n; ++k) p.w[k] = psi.amps[k + 1] / psi.amps[0];
    } else {
      p.w[0] = 1e14;  // south pole
    }
    return p;
  }

  CMat eta_drift_operator(const CMat& eta) const {
    CMat g = spec_.h;
    if (spec_.a.dim() > 0) g += spec_.a.contract_eta_bar(eta);
    return g;
  }

  SphereField policy_from_value(const SphereField& s) const {
    std::vector<double> gt, gp;
    tr_->synth_gradient(s.coeffs, gt, gp);
    std::vector<double> u(tr_->grid_count());
    for (int i = 0; i < tr_->grid_count(); ++i)
      u[i] = control_from_gradient(vhat_t_[i] * gt[i] + vhat_p_[i] * gp[i],
                                   spec_.c, spec_.u0);
    SphereField f;
    f.tr = tr_;
    f.grid = std::move(u);
    f.coeffs = tr_->analyze(f.grid);
    return f;
  }

  void build_geometry() {
    const int n = tr_->grid_count();
    psi0_.resize(n);
    psi1_.resize(n);
    conj_eip_.resize(n);
    for (int i = 0; i < tr_->ntheta(); ++i) {
      const double th = tr_->theta(i);
      const double c = std::cos(0.5 * th), s = std::sin(0.5 * th);
      for (int j = 0; j < tr_->nphi(); ++j) {
        const double ph = tr_->phi(j);
        const Complex eip(std::cos(ph), std::sin(ph));
        const size_t idx = i * (size_t)tr_->nphi() + j;
        psi0_[idx] = c;
        psi1_[idx] = s * eip;
        conj_eip_[idx] = std::conj(eip);
      }
    }
    drift_field(spec_.hhat, vhat_t_, vhat_p_);
  }

  void finalize_diagnostics(MfgSolution& sol) const {
    sol.consistency_residual = consistency_residual(sol);
    sol.eta_increment_constant = sol.eta.increment_bound_constant(num_.dt);
    const double normf = operator_norm(spec_.f);
    const double normj = operator_norm(spec_.j);
    const double hterm = spec_.u0 * spec_.u0 *
                         std::max(1.0, 1.0 / (2.0 * spec_.c)) * spec_.c;
    double margin = -1e300;
    for (int k = 0; k <= steps_; ++k) {
      const double bound =
          normf + (spec_.horizon - k * num_.dt) * (normj + hterm);
      margin = std::max(margin, sol.value.slices[k].sup_norm() - bound);
    }
    sol.value_bound_margin = margin;
  }

  GameSpec spec_;
  MfgNumerics num_;
  TransformPtr tr_;
  int steps_ = 0;
  double theta0_ = 0.0, phi0_ = 0.0;
  CMat eta0_;
  std::vector<Complex> psi0_, psi1_, conj_eip_;
  std::vector<double> vhat_t_, vhat_p_;
};

}  // namespace qmfg
