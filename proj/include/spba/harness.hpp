#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spba/knowledge_state.hpp"
#include "spba/oracles.hpp"

namespace spba {

struct OracleSpec {
  std::string kind = "h1";  // h1 | h2 | h3 | bermudan
  // Synthetic root; negative means "draw per macro-run" (common random
  // numbers across configurations sharing a master seed).
  double x_star = -1.0;
  // Reporting root for oracles whose root is not chosen by us (Bermudan).
  double true_root = -1.0;
  std::string boundary_csv;  // bermudan only
  BermudanOracle::Params bermudan;
};

struct ExperimentConfig {
  std::string name = "run";
  OracleSpec oracle;
  std::string surrogate = "lr";  // lr | klr | slr | bgp
  std::string policy = "sids";   // sids | srqs | ada_sids | ada_srqs |
                                 // det_ids_local | rqs_local |
                                 // true_ids | true_rqs | unif
  // Budgets count underlying oracle evaluations (signs x cost_per_sign).
  long budget = 20000;      // T
  long init_budget = 5000;  // T0
  int init_batch = 250;     // a0
  int batch = 250;          // fixed a for non-adaptive policies
  double nu_scale = 0.1;    // nu_n = nu_scale / n
  int nu_floor_batch = 1;   // a0^nu
  long nu_cap = 1000;       // adaptive cap, in evaluations
  int refit_every = 1;
  int hyper_refit_every = 1;  // B-GP hyperparameter search cadence
  int mc = 1;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  int jobs = 1;
  std::string out_dir;
  bool trace = true;

  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
  void validate() const;

  bool policy_uses_surrogate() const;
  bool policy_needs_gp() const;
};

struct IterRecord {
  long t_n = 0;  // cumulative evaluations incl. initialization
  double x = 0.0;
  int a = 0;
  int b = 0;
  double p_hat = 0.5;
  double median = 0.5;
  double ci_length = 1.0;
  bool covers = false;
  double kl = 0.0;  // D(f_n; g_n) bits; NaN when no ground truth
};

struct RunRecord {
  bool failed = false;
  std::string error;
  double x_star_unit = 0.5;
  // Final metrics, reported in the oracle's native domain units.
  double residual = 0.0;
  double ci_len = 0.0;
  bool covered = false;
  double kl = 0.0;
  long t_final = 0;
  int n_sites = 0;
  std::vector<IterRecord> trace;
  KnowledgeState final_state = KnowledgeState::uniform_prior();
  // Density snapshots (T_n, state) for the posterior-evolution plot.
  std::vector<std::pair<long, KnowledgeState>> snapshots;
  // (x, theta_hat, theta_true) over a grid, when a surrogate and ground
  // truth are both available.
  std::vector<std::array<double, 3>> theta_curve;
};

struct Aggregate {
  std::string name;
  int runs = 0;
  int failures = 0;
  double mean_residual = 0.0;
  double median_residual = 0.0;
  double mean_ci = 0.0;
  double coverage = 0.0;
  double mean_kl = 0.0;  // over runs with finite KL
};

std::unique_ptr<Oracle> make_oracle(const OracleSpec& spec, double x_star_unit);

// One full Algorithm-2 run; x_star_unit is the root in unit coordinates.
RunRecord run_gpba(const ExperimentConfig& cfg, double x_star_unit,
                   std::uint64_t run_seed);

// MC macro-runs with per-index seeds derived from the master seed; the root
// sequence depends on the master seed only.
std::vector<RunRecord> run_monte_carlo(const ExperimentConfig& cfg);

Aggregate aggregate_runs(const ExperimentConfig& cfg,
                         const std::vector<RunRecord>& records);

// metrics.csv (one row), per-run trace CSVs, and SVG plots under dir.
void emit_outputs(const ExperimentConfig& cfg,
                  const std::vector<RunRecord>& records, const Aggregate& agg,
                  const std::string& dir);

int cli_main(int argc, char** argv);

}  // namespace spba
