#pragma once

// Experiment configuration: one JSON schema for the four experiment families
// (filtering, meanfield-convergence, mfg-solve, nash). Unknown keys are
// rejected; physics checks (Hermiticity, tensor symmetries, c > 0) run before
// anything is computed.

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qmfg/gellmann.hpp"
#include "qmfg/mfg.hpp"

namespace qmfg {

using Json = nlohmann::json;

inline CMat parse_matrix(const Json& j) {
  const int rows = static_cast<int>(j.size());
  CMat m(rows, rows);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != rows)
      throw std::invalid_argument("matrix must be square");
    for (int c = 0; c < rows; ++c) {
      const auto& e = j[r][c];
      if (e.is_number()) {
        m(r, c) = e.get<double>();
      } else if (e.is_array() && e.size() == 2) {
        m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw std::invalid_argument("matrix entry must be number or [re, im]");
      }
    }
  }
  return m;
}

inline Json matrix_to_json(const CMat& m) {
  Json j = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c)
      row.push_back({m(r, c).real(), m(r, c).imag()});
    j.push_back(row);
  }
  return j;
}

struct ExperimentConfig {
  std::string experiment;  // filtering | meanfield-convergence | mfg-solve | nash
  GameSpec spec;
  // numerics
  double dt = 1e-3;
  int band_limit = 48;
  int grid_theta = 64;
  int grid_phi = 128;
  int copies = 100;      // M
  int replicas = 50;
  std::vector<int> ns{2, 4, 6, 8};
  double tol = 1e-5;
  int max_iter = 20;
  int sample_every = 10;
  uint64_t seed = 1;
  std::string out_dir = "results";
  unsigned threads = 0;  // 0: default

  MfgNumerics mfg_numerics() const {
    MfgNumerics n;
    n.lmax = band_limit;
    n.ntheta = grid_theta;
    n.nphi = grid_phi;
    n.dt = dt;
    n.tol = tol;
    n.max_iter = max_iter;
    return n;
  }
};

inline void reject_unknown_keys(const Json& j,
                                const std::set<std::string>& allowed,
                                const std::string& where,
                                std::vector<std::string>& diags) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      diags.push_back(where + ": unknown key '" + it.key() + "'");
}

// Parse + validate. Returns diagnostics; on success (empty diagnostics) `out`
// is fully populated.
inline std::vector<std::string> parse_experiment_config(const Json& j,
                                                        ExperimentConfig& out) {
  std::vector<std::string> diags;
  reject_unknown_keys(j, {"experiment", "spec", "numerics", "seed", "out"},
                      "config", diags);
  if (!j.contains("experiment") || !j["experiment"].is_string()) {
    diags.push_back("config: missing 'experiment'");
    return diags;
  }
  out.experiment = j["experiment"].get<std::string>();
  const std::set<std::string> kinds{"filtering", "meanfield-convergence",
                                    "mfg-solve", "nash"};
  if (!kinds.count(out.experiment))
    diags.push_back("experiment: must be one of filtering, "
                    "meanfield-convergence, mfg-solve, nash");
  if (j.contains("seed")) out.seed = j["seed"].get<uint64_t>();
  if (j.contains("out")) out.out_dir = j["out"].get<std::string>();

  try {
    const Json& s = j.at("spec");
    reject_unknown_keys(s,
                        {"dim", "H", "Hhat", "A", "L", "J", "F", "c", "U0",
                         "T", "initial"},
                        "spec", diags);
    out.spec.dim = s.value("dim", 2);
    if (out.spec.dim < 2 || out.spec.dim > 3)
      diags.push_back("spec.dim: supported dimensions are 2 and 3");
    const int d = out.spec.dim;
    auto mat_or = [&](const char* key, const CMat& dflt) {
      return s.contains(key) ? parse_matrix(s[key]) : dflt;
    };
    const CMat zero = CMat::Zero(d, d);
    out.spec.h = mat_or("H", zero);
    out.spec.hhat = mat_or("Hhat", zero);
    out.spec.j = mat_or("J", zero);
    out.spec.f = mat_or("F", zero);
    out.spec.c = s.value("c", 1.0);
    out.spec.u0 = s.value("U0", 1.0);
    out.spec.horizon = s.value("T", 0.1);
    if (s.contains("A")) {
      const Json& a = s["A"];
      if (a.is_string()) {
        if (a.get<std::string>() == "exchange") {
          out.spec.a = InteractionTensor::exchange();
          if (d != 2) diags.push_back("spec.A: exchange tensor is for qubits");
        } else if (a.get<std::string>() == "none") {
          out.spec.a = InteractionTensor();
        } else {
          diags.push_back("spec.A: unknown named tensor");
        }
      } else if (a.is_object() && a.contains("diagonalPotential")) {
        const CMat v = parse_matrix(a["diagonalPotential"]);
        Eigen::MatrixXd vr = v.real();
        out.spec.a = InteractionTensor::diagonal_potential(vr);
      } else if (a.is_object() && a.contains("entries")) {
        // raw tensor: entries are [j, k, j', k', re, im]
        InteractionTensor t(d);
        for (const auto& e : a["entries"]) {
          if (e.size() != 6) {
            diags.push_back("spec.A.entries: each entry is [j,k,j',k',re,im]");
            break;
          }
          const int j0 = e[0].get<int>(), k0 = e[1].get<int>();
          const int j1 = e[2].get<int>(), k1 = e[3].get<int>();
          if (j0 < 0 || j0 >= d || k0 < 0 || k0 >= d || j1 < 0 || j1 >= d ||
              k1 < 0 || k1 >= d) {
            diags.push_back("spec.A.entries: index out of range");
            break;
          }
          t.at(j0, k0, j1, k1) = Complex(e[4].get<double>(), e[5].get<double>());
        }
        out.spec.a = t;
      } else {
        diags.push_back("spec.A: expected \"exchange\", \"none\", "
                        "{diagonalPotential: ...} or {entries: ...}");
      }
    }
    if (s.contains("L")) {
      const Json& l = s["L"];
      if (l.is_string() && l.get<std::string>() == "gellmann") {
        out.spec.ls = gell_mann_family(d - 1).generators;
      } else if (l.is_array()) {
        for (const auto& e : l) out.spec.ls.push_back(parse_matrix(e));
      } else {
        diags.push_back("spec.L: expected \"gellmann\" or a matrix list");
      }
    } else {
      out.spec.ls = gell_mann_family(d - 1).generators;
    }
    if (s.contains("initial")) {
      const Json& init = s["initial"];
      CVec v(d);
      if (static_cast<int>(init.size()) != d) {
        diags.push_back("spec.initial: wrong length");
      } else {
        for (int k = 0; k < d; ++k)
          v[k] = init[k].is_array()
                     ? Complex(init[k][0].get<double>(), init[k][1].get<double>())
                     : Complex(init[k].get<double>(), 0.0);
        out.spec.initial = WaveFunction(v);
        if (out.spec.initial.norm() > 0) out.spec.initial.normalize();
      }
    } else {
      CVec v = CVec::Zero(d);
      v[0] = 1.0;
      out.spec.initial = WaveFunction(v);
    }
    for (const auto& msg : out.spec.diagnostics()) diags.push_back("spec." + msg);
    if ((out.experiment == "mfg-solve" || out.experiment == "nash") &&
        out.spec.dim != 2)
      diags.push_back("spec.dim: " + out.experiment + " supports qubits only");
  } catch (const std::exception& e) {
    diags.push_back(std::string("spec: ") + e.what());
  }

  if (j.contains("numerics")) {
    const Json& n = j["numerics"];
    reject_unknown_keys(n,
                        {"dt", "bandLimit", "gridTheta", "gridPhi", "M",
                         "replicas", "Ns", "tol", "maxIter", "sampleEvery",
                         "threads"},
                        "numerics", diags);
    out.dt = n.value("dt", out.dt);
    out.band_limit = n.value("bandLimit", out.band_limit);
    out.grid_theta = n.value("gridTheta", out.grid_theta);
    out.grid_phi = n.value("gridPhi", out.grid_phi);
    out.copies = n.value("M", out.copies);
    out.replicas = n.value("replicas", out.replicas);
    out.tol = n.value("tol", out.tol);
    out.max_iter = n.value("maxIter", out.max_iter);
    out.sample_every = n.value("sampleEvery", out.sample_every);
    out.threads = n.value("threads", 0u);
    if (n.contains("Ns")) {
      out.ns.clear();
      for (const auto& e : n["Ns"]) out.ns.push_back(e.get<int>());
    }
    if (!(out.dt > 0)) diags.push_back("numerics.dt: must be > 0");
    if (out.band_limit < 8) diags.push_back("numerics.bandLimit: must be >= 8");
    if (out.grid_theta <= out.band_limit)
      diags.push_back("numerics.gridTheta: must exceed bandLimit");
    if (out.grid_phi <= 2 * out.band_limit)
      diags.push_back("numerics.gridPhi: must exceed 2*bandLimit");
    if (out.copies < 1) diags.push_back("numerics.M: must be >= 1");
    if (out.replicas < 1) diags.push_back("numerics.replicas: must be >= 1");
    if (!(out.tol > 0)) diags.push_back("numerics.tol: must be > 0");
    if (out.max_iter < 1) diags.push_back("numerics.maxIter: must be >= 1");
    if (out.sample_every < 1)
      diags.push_back("numerics.sampleEvery: must be >= 1");
    for (int n_ : out.ns)
      if (n_ < 1) diags.push_back("numerics.Ns: entries must be >= 1");
  }
  return diags;
}

// Fully resolved config: every default made explicit, so a manifest echo is
// sufficient to re-run.
inline Json effective_config_json(const ExperimentConfig& cfg) {
  Json j;
  j["experiment"] = cfg.experiment;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out_dir;
  Json s;
  s["dim"] = cfg.spec.dim;
  s["H"] = matrix_to_json(cfg.spec.h);
  s["Hhat"] = matrix_to_json(cfg.spec.hhat);
  s["J"] = matrix_to_json(cfg.spec.j);
  s["F"] = matrix_to_json(cfg.spec.f);
  Json entries = Json::array();
  if (cfg.spec.a.dim() > 0)
    for (const auto& e : cfg.spec.a.nonzeros())
      entries.push_back({e.a, e.b, e.c, e.d, e.v.real(), e.v.imag()});
  s["A"] = Json::object({{"entries", entries}});
  Json ls = Json::array();
  for (const auto& l : cfg.spec.ls) ls.push_back(matrix_to_json(l));
  s["L"] = ls;
  s["c"] = cfg.spec.c;
  s["U0"] = cfg.spec.u0;
  s["T"] = cfg.spec.horizon;
  Json init = Json::array();
  for (int k = 0; k < cfg.spec.initial.dim(); ++k)
    init.push_back({cfg.spec.initial.amps[k].real(),
                    cfg.spec.initial.amps[k].imag()});
  s["initial"] = init;
  j["spec"] = s;
  Json n;
  n["dt"] = cfg.dt;
  n["bandLimit"] = cfg.band_limit;
  n["gridTheta"] = cfg.grid_theta;
  n["gridPhi"] = cfg.grid_phi;
  n["M"] = cfg.copies;
  n["replicas"] = cfg.replicas;
  n["Ns"] = cfg.ns;
  n["tol"] = cfg.tol;
  n["maxIter"] = cfg.max_iter;
  n["sampleEvery"] = cfg.sample_every;
  n["threads"] = cfg.threads;
  j["numerics"] = n;
  return j;
}

inline Json default_config_json() {
  Json j;
  j["experiment"] = "mfg-solve";
  j["seed"] = 1;
  j["out"] = "results";
  Json s;
  s["dim"] = 2;
  s["H"] = matrix_to_json(0.5 * pauli_z());
  s["Hhat"] = matrix_to_json(0.5 * pauli_x());
  s["A"] = "exchange";
  s["L"] = "gellmann";
  s["J"] = matrix_to_json(pauli_z());
  s["F"] = matrix_to_json(pauli_x());
  s["c"] = 1.0;
  s["U0"] = 1.0;
  s["T"] = 0.1;
  s["initial"] = {{1.0, 0.0}, {1.0, 0.0}};
  j["spec"] = s;
  Json n;
  n["dt"] = 5e-3;
  n["bandLimit"] = 48;
  n["gridTheta"] = 64;
  n["gridPhi"] = 128;
  n["M"] = 100;
  n["replicas"] = 50;
  n["Ns"] = {2, 4, 6, 8};
  n["tol"] = 1e-5;
  n["maxIter"] = 20;
  n["sampleEvery"] = 10;
  n["threads"] = 0;
  j["numerics"] = n;
  return j;
}

}  // namespace qmfg
