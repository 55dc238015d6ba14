#pragma once

// Experiment orchestration: runs one of the four experiment families from an
// ExperimentConfig and persists manifest + CSV (+ binary field dumps for
// mfg-solve). All data files are byte-reproducible from (config, seed,
// version); the manifest additionally records wall time.

#include <chrono>
#include <filesystem>
#include <fstream>

#include "qmfg/config.hpp"
#include "qmfg/game.hpp"
#include "qmfg/io.hpp"
#include "qmfg/meanfield.hpp"
#include "qmfg/mfg.hpp"
#include "qmfg/version.hpp"

namespace qmfg {

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 3 numerical failure / flagged divergence
  std::string message;
  Json manifest;
};

inline void write_manifest(const std::string& dir, const Json& manifest) {
  std::ofstream out(dir + "/manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
}

inline Json base_manifest(const ExperimentConfig& cfg, const Json& config_echo) {
  Json m;
  m["library"] = "qmfg";
  m["version"] = kVersion;
  m["experiment"] = cfg.experiment;
  m["seed"] = cfg.seed;
  m["config"] = config_echo;
  m["config_effective"] = effective_config_json(cfg);
  return m;
}

inline void run_filtering(const ExperimentConfig& cfg, const std::string& dir,
                          Json& manifest) {
  SdeConfig sde{cfg.dt, cfg.spec.horizon, true, cfg.sample_every};
  sde.validate();
  const int m = cfg.copies;
  std::vector<TrajectoryResult> trajs(m);
  const unsigned threads = cfg.threads ? cfg.threads : default_thread_count();
  parallel_for(m, threads, [&](size_t i) {
    trajs[i] = simulate_trajectory(cfg.spec.initial, cfg.spec.h, cfg.spec.hhat,
                                   cfg.spec.ls, FeedbackControl{}, cfg.spec.u0,
                                   sde, cfg.seed, i);
  });
  const auto& t0 = trajs[0];
  CsvWriter csv(dir + "/filtering.csv");
  std::vector<std::string> cols{"t"};
  const int d = cfg.spec.initial.dim();
  for (int k = 0; k < d; ++k) {
    cols.push_back("traj0_re" + std::to_string(k));
    cols.push_back("traj0_im" + std::to_string(k));
  }
  for (int k = 0; k < d; ++k) cols.push_back("mean_pop" + std::to_string(k));
  cols.push_back("mean_step_defect");
  csv.header(cols);
  for (size_t s = 0; s < t0.times.size(); ++s) {
    auto row = csv.row();
    row << t0.times[s];
    for (int k = 0; k < d; ++k)
      row << t0.states[s].amps[k].real() << t0.states[s].amps[k].imag();
    for (int k = 0; k < d; ++k) {
      double pop = 0.0;
      for (const auto& tr : trajs) pop += std::norm(tr.states[s].amps[k]);
      row << pop / m;
    }
    double defect = 0.0;
    if (s > 0) {
      const size_t step = std::min(t0.norm_defects.size(),
                                   static_cast<size_t>(s * cfg.sample_every)) - 1;
      for (const auto& tr : trajs) defect += tr.norm_defects[step];
      defect /= m;
    }
    row << defect;
  }
  manifest["trajectories"] = m;
  manifest["steps"] = sde.steps();
}

inline void run_meanfield(const ExperimentConfig& cfg, const std::string& dir,
                          Json& manifest) {
  ConvergenceConfig conv;
  conv.ns = cfg.ns;
  conv.horizon = cfg.spec.horizon;
  conv.dt = cfg.dt;
  conv.replicas = cfg.replicas;
  conv.sample_every = cfg.sample_every;
  conv.seed = cfg.seed;
  conv.threads = cfg.threads ? cfg.threads : default_thread_count();
  conv.feedback = false;
  const auto report = convergence_experiment(
      cfg.spec.h, cfg.spec.hhat, cfg.spec.a, cfg.spec.ls, FeedbackControl{},
      cfg.spec.u0, conv, cfg.spec.initial);
  CsvWriter csv(dir + "/convergence.csv");
  csv.header({"N", "t", "alpha_mean", "alpha_stderr", "trace_dist_mean",
              "bound_24", "bound_30"});
  for (const auto& r : report.rows)
    csv.row() << r.n << r.t << r.alpha_mean << r.alpha_stderr
              << r.trace_dist_mean << r.bound_uncontrolled << r.bound_feedback;
  manifest["hs_norm_A"] = report.hs_norm_a;
  manifest["loglog_slope"] = report.loglog_slope;
  manifest["sandwich_violation"] = report.sandwich_violation;
}

inline void run_mfg(const ExperimentConfig& cfg, const std::string& dir,
                    Json& manifest, int& exit_code) {
  MfgSolver solver(cfg.spec, cfg.mfg_numerics());
  const MfgSolution sol = solver.picard_solve();
  manifest["picard_iterations"] = sol.picard_iterations;
  manifest["converged"] = sol.converged;
  manifest["divergence_flagged"] = sol.divergence_flagged;
  manifest["consistency_residual"] = sol.consistency_residual;
  manifest["tv_deltas"] = sol.tv_deltas;
  manifest["q_factors"] = sol.q_factors;
  manifest["dual_c1_deltas"] = sol.dual_c1_deltas;
  manifest["max_clip_defect"] = sol.max_clip_defect;
  manifest["max_mass_defect"] = sol.max_mass_defect;
  manifest["value_bound_margin"] = sol.value_bound_margin;
  manifest["eta_increment_constant"] = sol.eta_increment_constant;
  if (!sol.converged || sol.divergence_flagged) exit_code = 3;

  const auto& tr = *solver.transform();
  // slice CSVs at configured times
  std::vector<int> slice_idx;
  for (size_t k = 0; k < sol.flow.times.size(); k += cfg.sample_every)
    slice_idx.push_back(static_cast<int>(k));
  Json times = Json::array();
  for (int k : slice_idx) {
    const double t = sol.flow.times[k];
    times.push_back(t);
    CsvWriter csv(dir + "/fields_" + std::to_string(k) + ".csv");
    csv.header({"theta", "phi", "S", "u", "mu"});
    // value/policy grids are indexed on the 0..T grid: flow time t = (k+1) dt
    const auto& sgrid = sol.value.slices[k + 1].grid;
    const auto& ugrid = sol.policy.slices[k + 1].grid;
    const auto& mgrid = sol.flow.slices[k].grid;
    for (int i = 0; i < tr.ntheta(); ++i)
      for (int j = 0; j < tr.nphi(); ++j) {
        const size_t idx = i * (size_t)tr.nphi() + j;
        csv.row() << tr.theta(i) << tr.phi(j) << sgrid[idx] << ugrid[idx]
                  << mgrid[idx];
      }
  }
  manifest["slice_times"] = times;
  write_field_dump(dir + "/value.qfld", sol.value.slices);
  write_field_dump(dir + "/policy.qfld", sol.policy.slices);
  write_field_dump(dir + "/flow.qfld", sol.flow.slices);
  Json eta = Json::array();
  for (size_t k = 0; k < sol.eta.values.size(); ++k) {
    Json e;
    e["t"] = sol.eta.times[k];
    e["matrix"] = matrix_to_json(sol.eta.values[k]);
    eta.push_back(e);
  }
  manifest["eta"] = eta;
}

inline void run_nash(const ExperimentConfig& cfg, const std::string& dir,
                     Json& manifest, int& exit_code) {
  MfgSolver solver(cfg.spec, cfg.mfg_numerics());
  const MfgSolution sol = solver.picard_solve();
  if (!sol.converged) {
    exit_code = 3;
    manifest["error"] = "MFG solve did not converge";
    return;
  }
  const PolicyInterp common(sol.policy, solver.numerics().dt);
  TimedField value2, policy2;
  solver.hjb_backward_solve(sol.eta, value2, policy2);
  const PolicyInterp best_response(policy2, solver.numerics().dt);
  const double kappa = solver.estimate_kappa(common, cfg.seed ^ 0xCA99Aull);

  NashConfig ncfg;
  ncfg.ns = cfg.ns;
  ncfg.replicas = cfg.replicas;
  ncfg.dt = cfg.dt;
  ncfg.seed = cfg.seed;
  ncfg.threads = cfg.threads ? cfg.threads : default_thread_count();
  const NashReport rep =
      nash_experiment(cfg.spec, common, best_response, kappa, ncfg);

  CsvWriter csv(dir + "/nash.csv");
  csv.header({"N", "deviation", "gain", "stderr", "envelope"});
  for (const auto& r : rep.rows)
    csv.row() << r.n << r.deviation << r.gain << r.stderr_ << r.envelope;
  manifest["kappa"] = rep.kappa;
  manifest["envelope_C"] = rep.envelope_c;
  manifest["spearman_best_response"] = rep.spearman_best_response;
  manifest["best_response_flat"] = rep.best_response_flat;
  manifest["picard_iterations"] = sol.picard_iterations;
  manifest["consistency_residual"] = sol.consistency_residual;
}

inline RunOutcome run_experiment(const ExperimentConfig& cfg,
                                 const Json& config_echo) {
  RunOutcome outcome;
  const auto t_start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(cfg.out_dir);
  Json manifest = base_manifest(cfg, config_echo);
  try {
    if (cfg.experiment == "filtering") {
      run_filtering(cfg, cfg.out_dir, manifest);
    } else if (cfg.experiment == "meanfield-convergence") {
      run_meanfield(cfg, cfg.out_dir, manifest);
    } else if (cfg.experiment == "mfg-solve") {
      run_mfg(cfg, cfg.out_dir, manifest, outcome.exit_code);
    } else if (cfg.experiment == "nash") {
      run_nash(cfg, cfg.out_dir, manifest, outcome.exit_code);
    } else {
      outcome.exit_code = 2;
      outcome.message = "unknown experiment";
      return outcome;
    }
  } catch (const std::exception& e) {
    outcome.exit_code = 3;
    outcome.message = e.what();
    manifest["error"] = e.what();
  }
  const auto t_end = std::chrono::steady_clock::now();
  manifest["wall_time_s"] =
      std::chrono::duration<double>(t_end - t_start).count();
  write_manifest(cfg.out_dir, manifest);
  outcome.manifest = manifest;
  return outcome;
}

}  // namespace qmfg
