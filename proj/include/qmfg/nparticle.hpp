#pragma once

// Controlled N-particle filtering dynamics. Each site carries the same
// one-particle operators (H, Hhat, {L^p}); player j's control is evaluated on
// its own marginal Gamma^(j) at the step's left endpoint; pairs interact
// through (1/N) sum_{l<j} A_{lj}.

#include <vector>

#include "qmfg/belavkin.hpp"

namespace qmfg {

// Free-function form; evaluates the controls itself. For hot loops use
// NParticleSimulator below.
inline NParticleWave step_nparticle(const NParticleWave& psi, const CMat& h,
                                    const CMat& hhat,
                                    const InteractionTensor& a,
                                    const std::vector<CMat>& ls,
                                    const std::vector<FeedbackControl>& controls,
                                    double u0, double t,
                                    const std::vector<double>& dy, double dt) {
  const int n = psi.sites;
  if (static_cast<int>(controls.size()) != n)
    throw std::invalid_argument("step_nparticle: one control per site");
  if (static_cast<int>(dy.size()) != n * static_cast<int>(ls.size()))
    throw std::invalid_argument("step_nparticle: dY must be sites x channels");
  const CMat k = half_ldag_l(ls, psi.site_dim);
  std::vector<CMat> drift(n);
  for (int j = 0; j < n; ++j) {
    double u = 0.0;
    if (controls[j].evaluate)
      u = clamp_control(controls[j].evaluate(t, partial_trace_site(psi, j)), u0);
    drift[j] = -kI * (h + u * hhat) - k;
  }
  const auto entries = a.dim() > 0 ? a.nonzeros() : std::vector<TwoSiteEntry>{};
  CVec out(psi.dim());
  detail::euler_filtering_step(psi, psi.amps, out, drift, ls, dy.data(), dt,
                               entries.empty() ? nullptr : &entries);
  NParticleWave res = psi;
  res.amps = std::move(out);
  return res;
}

class NParticleSimulator {
 public:
  NParticleSimulator(int site_dim, int sites, CMat h, CMat hhat,
                     const InteractionTensor& a, std::vector<CMat> ls,
                     bool renormalize = true)
      : shape_(site_dim, sites),
        h_(std::move(h)),
        hhat_(std::move(hhat)),
        ls_(std::move(ls)),
        k_(half_ldag_l(ls_, site_dim)),
        renormalize_(renormalize),
        drift_(sites),
        out_(shape_.dim()) {
    if (a.dim() > 0) {
      entries_ = a.nonzeros();
    }
  }

  int channels() const { return static_cast<int>(ls_.size()); }
  int sites() const { return shape_.sites; }
  const NParticleWave& shape() const { return shape_; }

  // One step with per-site control values us (already clamped) and noise
  // dy[site*channels + channel]. Returns the pre-normalization norm defect.
  double step(NParticleWave& psi, const std::vector<double>& us,
              const double* dy, double dt) {
    const int n = shape_.sites;
    for (int j = 0; j < n; ++j) drift_[j] = -kI * (h_ + us[j] * hhat_) - k_;
    detail::euler_filtering_step(psi, psi.amps, out_, drift_, ls_, dy, dt,
                                 entries_.empty() ? nullptr : &entries_,
                                 &scratch_);
    const double nrm = out_.norm();
    if (renormalize_)
      psi.amps = out_ / nrm;
    else
      psi.amps = out_;
    return std::abs(nrm - 1.0);
  }

 private:
  NParticleWave shape_;
  CMat h_, hhat_;
  std::vector<CMat> ls_;
  CMat k_;
  bool renormalize_;
  std::vector<TwoSiteEntry> entries_;
  std::vector<CMat> drift_;
  CVec out_;
  CVec scratch_;
};

}  // namespace qmfg
