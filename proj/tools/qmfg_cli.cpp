// qmfg command line: run and validate experiment configs.
//
//   qmfg run --config cfg.json [--seed N] [--out DIR] [--threads K]
//   qmfg validate --config cfg.json
//   qmfg show-defaults
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "qmfg/qmfg.hpp"

namespace {

int load_config(const std::string& path, qmfg::Json& j, std::string& err) {
  std::ifstream in(path);
  if (!in) {
    err = "cannot open config file: " + path;
    return 2;
  }
  try {
    in >> j;
  } catch (const std::exception& e) {
    err = std::string("config parse error: ") + e.what();
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qmfg: quantum mean-field game experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int64_t seed_override = -1;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", config_path, "config file (JSON)")->required();
  run->add_option("--seed", seed_override, "override config seed");
  run->add_option("--out", out_dir, "override output directory");
  run->add_option("--threads", threads, "worker threads (QMFG_THREADS fallback)");

  auto* validate = app.add_subcommand("validate", "validate a config");
  validate->add_option("--config", config_path, "config file (JSON)")->required();

  auto* defaults = app.add_subcommand("show-defaults", "print the default config");

  CLI11_PARSE(app, argc, argv);

  if (defaults->parsed()) {
    std::cout << qmfg::default_config_json().dump(2) << '\n';
    return 0;
  }

  qmfg::Json j;
  std::string err;
  if (const int rc = load_config(config_path, j, err); rc != 0) {
    std::cerr << err << '\n';
    return rc;
  }
  qmfg::ExperimentConfig cfg;
  const auto diags = qmfg::parse_experiment_config(j, cfg);

  if (validate->parsed()) {
    for (const auto& d : diags) std::cout << d << '\n';
    if (diags.empty()) std::cout << "ok\n";
    return diags.empty() ? 0 : 2;
  }

  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << d << '\n';
    return 2;
  }
  if (seed_override >= 0) {
    cfg.seed = static_cast<uint64_t>(seed_override);
    j["seed"] = cfg.seed;
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (threads > 0) cfg.threads = threads;

  const auto outcome = qmfg::run_experiment(cfg, j);
  if (!outcome.message.empty()) std::cerr << outcome.message << '\n';
  std::cout << "experiment=" << cfg.experiment << " exit=" << outcome.exit_code
            << " out=" << cfg.out_dir << '\n';
  return outcome.exit_code;
}
