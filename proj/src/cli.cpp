#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spba/harness.hpp"
#include "spba/numeric.hpp"
#include "spba/policies.hpp"

namespace spba {

namespace {

struct Overrides {
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::string out;
  int jobs = 0;
  int refit_every = 0;
};

void apply(ExperimentConfig& cfg, const Overrides& o) {
  if (o.has_seed) cfg.seed = o.seed;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.jobs > 0) cfg.jobs = o.jobs;
  if (o.refit_every > 0) cfg.refit_every = o.refit_every;
}

int run_one(const ExperimentConfig& cfg) {
  const std::vector<RunRecord> records = run_monte_carlo(cfg);
  const Aggregate agg = aggregate_runs(cfg, records);
  const std::string dir = cfg.out_dir.empty() ? ("out/" + cfg.name) : cfg.out_dir;
  emit_outputs(cfg, records, agg, dir);
  std::cout << cfg.name << ": runs=" << agg.runs << " failures=" << agg.failures
            << " mean_residual=" << agg.mean_residual
            << " coverage=" << agg.coverage << " mean_kl=" << agg.mean_kl
            << " -> " << dir << "/metrics.csv\n";
  for (const RunRecord& r : records)
    if (r.failed) std::cerr << "  run failed: " << r.error << '\n';
  return agg.failures > 0 ? 1 : 0;
}

// Fast sanity checks of the core invariants, runnable in the field without
// the full test tree.
int run_validate() {
  int failures = 0;
  auto check = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "ok   " : "FAIL ") << what << '\n';
    if (!ok) ++failures;
  };

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  KnowledgeState f = KnowledgeState::uniform_prior();
  bool norm_ok = true, kl_ok = true;
  for (int i = 0; i < 50; ++i) {
    const double x = unif(rng);
    const int a = 1 + static_cast<int>(rng() % 20);
    const int b = static_cast<int>(rng() % static_cast<std::uint64_t>(a + 1));
    f = update(f, {x, a, b, 0.8});
    norm_ok = norm_ok && std::abs(f.total_mass() - 1.0) < 1e-10;
    kl_ok = kl_ok && kl_divergence(f, f) == 0.0;
  }
  check(norm_ok, "knowledge state stays normalized across 50 updates");
  check(kl_ok, "KL(f,f) = 0 along the trajectory");

  const KnowledgeState u = KnowledgeState::uniform_prior();
  const KnowledgeState same = update(u, {0.4, 3, 2, 0.5 + 1e-12});
  double dev = 0.0;
  for (double x : {0.1, 0.4, 0.9}) dev = std::max(dev, std::abs(same.density(x) - 1.0));
  check(dev < 1e-9, "p_hat = 1/2 leaves the state unchanged");

  const double cap = 1.0 + 0.8 * std::log2(0.8) + 0.2 * std::log2(0.2);
  const auto d = sids_select(u, AccuracyModel::constant(0.8), 1);
  check(std::abs(d.x - 0.5) < 1e-3, "constant-p IDS maximizer at the median");
  check(std::abs(info_gain(u, 0.8, d.x, 1) - cap) < 1e-6,
        "constant-p gain equals the channel capacity");

  bool mono = true;
  double prev = f.quantile(0.0);
  for (int i = 1; i <= 100; ++i) {
    const double q = f.quantile(i / 100.0);
    mono = mono && q >= prev - 1e-12;
    prev = q;
  }
  check(mono, "quantile function is monotone");

  std::cout << (failures == 0 ? "all checks passed\n" : "validation FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Spatial generalized probabilistic bisection"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path, boundary_out = "boundary.csv";
  std::uint64_t boundary_seed = 2024;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", ov.seed, "master seed override")
        ->each([&](const std::string&) { ov.has_seed = true; });
    sub->add_option("--out", ov.out, "output directory override");
    sub->add_option("--jobs", ov.jobs, "parallel macro-runs");
    sub->add_option("--refit-every", ov.refit_every, "surrogate refit cadence");
  };

  CLI::App* run = app.add_subcommand("run", "run one configuration");
  add_common(run, true);
  CLI::App* campaign =
      app.add_subcommand("campaign", "run a list of configurations");
  add_common(campaign, true);
  double boundary_vol = 0.0;
  CLI::App* boundary =
      app.add_subcommand("boundary", "precompute the Bermudan exercise boundary");
  boundary->add_option("--out", boundary_out, "boundary CSV path");
  boundary->add_option("--seed", boundary_seed, "boundary fit seed");
  boundary->add_option("--vol", boundary_vol, "volatility override");
  CLI::App* validate =
      app.add_subcommand("validate", "run fast built-in sanity checks");
  (void)validate;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
      apply(cfg, ov);
      return run_one(cfg);
    }
    if (campaign->parsed()) {
      std::ifstream is(config_path);
      if (!is) throw std::invalid_argument("cannot open campaign " + config_path);
      nlohmann::json j;
      is >> j;
      int rc = 0;
      for (const auto& entry : j.at("configs")) {
        ExperimentConfig cfg =
            entry.is_string()
                ? ExperimentConfig::from_json_file(entry.get<std::string>())
                : ExperimentConfig::from_json_text(entry.dump());
        apply(cfg, ov);
        rc = std::max(rc, run_one(cfg));
      }
      return rc;
    }
    if (boundary->parsed()) {
      BermudanOracle::Params params;
      if (boundary_vol > 0.0) params.vol = boundary_vol;
      const auto table = BermudanOracle::compute_boundary(params, boundary_seed);
      BermudanOracle::write_boundary_csv(table, boundary_out);
      std::cout << "wrote " << table.size() << " boundary rows to "
                << boundary_out << '\n';
      return 0;
    }
    return run_validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace spba
