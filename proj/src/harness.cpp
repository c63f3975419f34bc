#include "spba/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "spba/numeric.hpp"
#include "spba/policies.hpp"
#include "spba/surrogate.hpp"
#include "spba/svg.hpp"

namespace spba {

using nlohmann::json;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

OracleSpec oracle_from_json(const json& j) {
  OracleSpec s;
  s.kind = j.value("kind", std::string("h1"));
  s.x_star = j.value("x_star", -1.0);
  s.true_root = j.value("true_root", -1.0);
  s.boundary_csv = j.value("boundary_csv", std::string());
  if (j.contains("bermudan")) {
    const json& b = j.at("bermudan");
    s.bermudan.strike = b.value("strike", s.bermudan.strike);
    s.bermudan.rate = b.value("rate", s.bermudan.rate);
    s.bermudan.vol = b.value("vol", s.bermudan.vol);
    s.bermudan.maturity = b.value("maturity", s.bermudan.maturity);
    s.bermudan.dt = b.value("dt", s.bermudan.dt);
    s.bermudan.t_eval = b.value("t_eval", s.bermudan.t_eval);
    s.bermudan.pre_average = b.value("pre_average", s.bermudan.pre_average);
    s.bermudan.lo = b.value("lo", s.bermudan.lo);
    s.bermudan.hi = b.value("hi", s.bermudan.hi);
  }
  return s;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig c;
  c.name = j.value("name", c.name);
  if (j.contains("oracle")) c.oracle = oracle_from_json(j.at("oracle"));
  c.surrogate = j.value("surrogate", c.surrogate);
  c.policy = j.value("policy", c.policy);
  c.budget = j.value("budget", c.budget);
  c.init_budget = j.value("init_budget", c.init_budget);
  c.init_batch = j.value("init_batch", c.init_batch);
  c.batch = j.value("batch", c.batch);
  c.nu_scale = j.value("nu_scale", c.nu_scale);
  c.nu_floor_batch = j.value("nu_floor_batch", c.nu_floor_batch);
  c.nu_cap = j.value("nu_cap", c.nu_cap);
  c.refit_every = j.value("refit_every", c.refit_every);
  c.hyper_refit_every = j.value("hyper_refit_every", c.hyper_refit_every);
  c.mc = j.value("mc", c.mc);
  c.seed = j.value("seed", c.seed);
  c.alpha = j.value("alpha", c.alpha);
  c.jobs = j.value("jobs", c.jobs);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.trace = j.value("trace", c.trace);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return from_json_text(buf.str());
}

bool ExperimentConfig::policy_uses_surrogate() const {
  return policy == "sids" || policy == "srqs" || policy == "ada_sids" ||
         policy == "ada_srqs";
}

bool ExperimentConfig::policy_needs_gp() const {
  return policy == "ada_sids" || policy == "ada_srqs";
}

void ExperimentConfig::validate() const {
  static const char* kPolicies[] = {"sids",     "srqs",        "ada_sids",
                                    "ada_srqs", "det_ids_local", "rqs_local",
                                    "true_ids", "true_rqs",    "unif"};
  if (std::find_if(std::begin(kPolicies), std::end(kPolicies),
                   [&](const char* p) { return policy == p; }) ==
      std::end(kPolicies))
    throw std::invalid_argument("unknown policy: " + policy);
  if (surrogate != "lr" && surrogate != "klr" && surrogate != "slr" &&
      surrogate != "bgp")
    throw std::invalid_argument("unknown surrogate: " + surrogate);
  if (policy_needs_gp() && surrogate != "bgp")
    throw std::invalid_argument(policy + " requires the bgp surrogate");
  if (oracle.kind != "h1" && oracle.kind != "h2" && oracle.kind != "h3" &&
      oracle.kind != "bermudan")
    throw std::invalid_argument("unknown oracle kind: " + oracle.kind);
  if (init_budget <= 0 || budget <= init_budget)
    throw std::invalid_argument("need 0 < init_budget < budget");
  if (init_batch < 1 || init_budget % init_batch != 0)
    throw std::invalid_argument("init_budget must be divisible by init_batch");
  if (batch < 1 || mc < 1 || refit_every < 1 || jobs < 1)
    throw std::invalid_argument("batch, mc, refit_every, jobs must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha in (0,1)");
}

std::unique_ptr<Oracle> make_oracle(const OracleSpec& spec, double x_star_unit) {
  if (spec.kind == "bermudan") {
    if (spec.boundary_csv.empty())
      throw std::invalid_argument("bermudan oracle needs boundary_csv");
    return std::make_unique<BermudanOracle>(
        spec.bermudan, BermudanOracle::read_boundary_csv(spec.boundary_csv));
  }
  SyntheticOracle::Kind k;
  if (spec.kind == "h1") k = SyntheticOracle::Kind::linear;
  else if (spec.kind == "h2") k = SyntheticOracle::Kind::exponential;
  else if (spec.kind == "h3") k = SyntheticOracle::Kind::cubic;
  else throw std::invalid_argument("unknown oracle kind: " + spec.kind);
  return std::make_unique<SyntheticOracle>(k, x_star_unit);
}

namespace {

struct BudgetSigns {
  long total;
  long init;
  int init_batch;
  int batch;
  long cap;
};

BudgetSigns to_signs(const ExperimentConfig& cfg, int cps) {
  auto div = [&](long v, const char* what) -> long {
    if (v % cps != 0)
      throw std::invalid_argument(std::string(what) +
                                  " must be divisible by cost_per_sign");
    return v / cps;
  };
  BudgetSigns b;
  b.total = div(cfg.budget, "budget");
  b.init = div(cfg.init_budget, "init_budget");
  b.init_batch = static_cast<int>(div(cfg.init_batch, "init_batch"));
  b.batch = static_cast<int>(div(cfg.batch, "batch"));
  b.cap = std::max<long>(1, cfg.nu_cap / cps);
  if (b.init % b.init_batch != 0)
    throw std::invalid_argument("init budget not divisible by init batch");
  return b;
}

RunRecord run_gpba_impl(const ExperimentConfig& cfg, double x_star_unit,
                        std::uint64_t run_seed) {
  std::mt19937_64 rng(run_seed);
  const auto oracle = make_oracle(cfg.oracle, x_star_unit);
  const double lo = oracle->domain_lo(), hi = oracle->domain_hi();
  const double span = hi - lo;
  auto to_domain = [&](double u) { return lo + span * u; };

  const BudgetSigns signs = to_signs(cfg, oracle->cost_per_sign());
  const int n0 = static_cast<int>(signs.init / signs.init_batch);
  const bool truth = oracle->has_true_theta();

  RunRecord rec;
  rec.x_star_unit = x_star_unit;

  const bool local = cfg.policy == "det_ids_local" || cfg.policy == "rqs_local";
  const bool baseline = cfg.policy == "true_ids" || cfg.policy == "true_rqs" ||
                        cfg.policy == "unif";
  if (baseline && !truth)
    throw std::invalid_argument("true-p baselines need a ground-truth oracle");

  std::unique_ptr<Surrogate> surr;
  if (cfg.policy_uses_surrogate())
    surr = make_surrogate(cfg.surrogate, cfg.hyper_refit_every);

  AccuracyModel true_model{
      [&](double u) { return truth ? oracle->true_theta(to_domain(u)) : 0.5; }};

  // --- initialization: equidistant sites, a0 replicates each ---
  Dataset data;
  std::vector<int> init_b(static_cast<std::size_t>(n0));
  for (int i = 1; i <= n0; ++i) {
    const double u = static_cast<double>(i) / (n0 + 1);
    const BatchResponse r = oracle->query_batch(to_domain(u), signs.init_batch, rng);
    data.add(u, r.a, r.b);
    init_b[static_cast<std::size_t>(i - 1)] = r.b;
  }
  if (surr) surr->fit(data);

  KnowledgeState f = KnowledgeState::uniform_prior();
  KnowledgeState g = KnowledgeState::uniform_prior();
  double pbar = 0.5;  // local-policy running accuracy
  {
    double pbar_sum = 0.0;
    for (int i = 0; i < n0; ++i) {
      const double u = data.x[static_cast<std::size_t>(i)];
      double p;
      if (surr) {
        const double th = surr->predict_theta(u);
        p = clip_accuracy(std::max(th, 1.0 - th));
      } else if (local) {
        p = local_pbar(init_b[static_cast<std::size_t>(i)], signs.init_batch);
      } else {
        p = clip_accuracy(true_model.p_hat(u));
      }
      pbar_sum += p;
      f = update(f, {u, signs.init_batch, init_b[static_cast<std::size_t>(i)], p});
      if (truth)
        g = update(g, {u, signs.init_batch, init_b[static_cast<std::size_t>(i)],
                       clip_accuracy(oracle->true_accuracy(to_domain(u)))});

      IterRecord it;
      it.t_n = static_cast<long>(i + 1) * signs.init_batch * oracle->cost_per_sign();
      it.x = u;
      it.a = signs.init_batch;
      it.b = init_b[static_cast<std::size_t>(i)];
      it.p_hat = p;
      it.median = f.median();
      it.ci_length = f.ci_length(cfg.alpha);
      it.covers = f.covers(cfg.alpha, x_star_unit);
      it.kl = truth ? kl_divergence(f, g) : kNan;
      rec.trace.push_back(it);
    }
    pbar = clip_accuracy(pbar_sum / n0);
  }

  long t_signs = signs.init;
  rec.snapshots.emplace_back(t_signs * oracle->cost_per_sign(), f);
  std::vector<double> snap_fracs = {0.5, 0.75};

  AccuracyModel surr_model{[&](double u) { return surr->predict_theta(u); }};

  // --- sequential loop; macro-time n continues from the initialization ---
  for (int n = n0 + 1; t_signs < signs.total; ++n) {
    PolicyDecision d;
    const double nu_n = cfg.nu_scale / n;
    if (cfg.policy == "sids") {
      d = sids_select(f, surr_model, signs.batch);
    } else if (cfg.policy == "srqs") {
      d = rqs_select(f, rng, signs.batch);
    } else if (cfg.policy == "ada_sids") {
      const LatentGpFit* gp = surr->gp();
      d = ada_sids_select(f, *gp, nu_n, cfg.nu_floor_batch,
                          static_cast<int>(signs.cap));
    } else if (cfg.policy == "ada_srqs") {
      d = rqs_select(f, rng, 1);
      d.a = adaptive_batch(*surr->gp(), d.x, nu_n, cfg.nu_floor_batch,
                           static_cast<int>(signs.cap));
    } else if (cfg.policy == "det_ids_local") {
      d = det_ids_local_select(f, pbar, signs.batch);
    } else if (cfg.policy == "rqs_local") {
      d = rqs_select(f, rng, signs.batch);
    } else if (cfg.policy == "true_ids") {
      d = baseline_select(BaselineKind::true_ids, g, true_model, signs.batch, rng);
    } else if (cfg.policy == "true_rqs") {
      d = baseline_select(BaselineKind::true_rqs, g, true_model, signs.batch, rng);
    } else {
      d = baseline_select(BaselineKind::unif, g, true_model, signs.batch, rng);
    }

    const BatchResponse r = oracle->query_batch(to_domain(d.x), d.a, rng);
    data.add(d.x, r.a, r.b);
    t_signs += r.a;

    double p;
    if (surr) {
      if (n % cfg.refit_every == 0) surr->fit(data);
      p = clip_accuracy(surr_model.p_hat(d.x));
    } else if (local) {
      p = local_pbar(r.b, r.a);
      pbar = p;
    } else {
      p = clip_accuracy(true_model.p_hat(d.x));
    }

    f = update(f, {d.x, r.a, r.b, p});
    if (truth) {
      const double pt = clip_accuracy(oracle->true_accuracy(to_domain(d.x)));
      g = update(g, {d.x, r.a, r.b, pt});
    }

    IterRecord it;
    it.t_n = t_signs * oracle->cost_per_sign();
    it.x = d.x;
    it.a = r.a;
    it.b = r.b;
    it.p_hat = p;
    it.median = f.median();
    it.ci_length = f.ci_length(cfg.alpha);
    it.covers = f.covers(cfg.alpha, x_star_unit);
    it.kl = truth ? kl_divergence(f, g) : kNan;
    rec.trace.push_back(it);

    while (!snap_fracs.empty() && t_signs >= snap_fracs.front() * signs.total) {
      rec.snapshots.emplace_back(t_signs * oracle->cost_per_sign(), f);
      snap_fracs.erase(snap_fracs.begin());
    }
  }
  rec.snapshots.emplace_back(t_signs * oracle->cost_per_sign(), f);

  if (surr && truth) {
    for (int i = 0; i <= 200; ++i) {
      const double u = static_cast<double>(i) / 200;
      rec.theta_curve.push_back(
          {to_domain(u), surr->predict_theta(u),
           oracle->true_theta(to_domain(u))});
    }
  }

  rec.t_final = t_signs * oracle->cost_per_sign();
  rec.n_sites = static_cast<int>(data.size());
  rec.residual = span * std::abs(f.median() - x_star_unit);
  rec.ci_len = span * f.ci_length(cfg.alpha);
  rec.covered = f.covers(cfg.alpha, x_star_unit);
  rec.kl = truth ? kl_divergence(f, g) : kNan;
  rec.final_state = f;
  return rec;
}

}  // namespace

RunRecord run_gpba(const ExperimentConfig& cfg, double x_star_unit,
                   std::uint64_t run_seed) {
  try {
    return run_gpba_impl(cfg, x_star_unit, run_seed);
  } catch (const std::exception& e) {
    RunRecord rec;
    rec.failed = true;
    rec.error = e.what();
    rec.x_star_unit = x_star_unit;
    return rec;
  }
}

std::vector<RunRecord> run_monte_carlo(const ExperimentConfig& cfg) {
  // CRN: the root sequence is a function of the master seed alone.
  std::mt19937_64 root_rng(splitmix64(cfg.seed));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> roots(static_cast<std::size_t>(cfg.mc));
  for (double& r : roots) r = unif(root_rng);

  if (cfg.oracle.x_star >= 0.0)
    std::fill(roots.begin(), roots.end(), cfg.oracle.x_star);
  if (cfg.oracle.kind == "bermudan") {
    if (cfg.oracle.true_root < 0.0)
      throw std::invalid_argument("bermudan config needs true_root");
    const double u = (cfg.oracle.true_root - cfg.oracle.bermudan.lo) /
                     (cfg.oracle.bermudan.hi - cfg.oracle.bermudan.lo);
    std::fill(roots.begin(), roots.end(), u);
  }

  std::vector<RunRecord> out(static_cast<std::size_t>(cfg.mc));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.mc) return;
      const std::uint64_t run_seed = splitmix64(cfg.seed + 1 + static_cast<std::uint64_t>(i));
      out[static_cast<std::size_t>(i)] =
          run_gpba(cfg, roots[static_cast<std::size_t>(i)], run_seed);
    }
  };
  const int jobs = std::max(1, std::min(cfg.jobs, cfg.mc));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

Aggregate aggregate_runs(const ExperimentConfig& cfg,
                         const std::vector<RunRecord>& records) {
  Aggregate agg;
  agg.name = cfg.name;
  double sr = 0, sc = 0, cov = 0, skl = 0;
  int nkl = 0;
  std::vector<double> residuals;
  for (const RunRecord& r : records) {
    if (r.failed) {
      ++agg.failures;
      continue;
    }
    ++agg.runs;
    sr += r.residual;
    sc += r.ci_len;
    cov += r.covered ? 1.0 : 0.0;
    residuals.push_back(r.residual);
    if (std::isfinite(r.kl)) {
      skl += r.kl;
      ++nkl;
    }
  }
  if (agg.runs > 0) {
    agg.mean_residual = sr / agg.runs;
    agg.mean_ci = sc / agg.runs;
    agg.coverage = cov / agg.runs;
    std::sort(residuals.begin(), residuals.end());
    agg.median_residual = residuals[residuals.size() / 2];
  }
  agg.mean_kl = nkl > 0 ? skl / nkl : kNan;
  return agg;
}

void emit_outputs(const ExperimentConfig& cfg,
                  const std::vector<RunRecord>& records, const Aggregate& agg,
                  const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream os(dir + "/metrics.csv");
    os << "name,runs,failures,mean_residual,median_residual,mean_ci_length,"
          "coverage,mean_kl\n";
    os << agg.name << ',' << agg.runs << ',' << agg.failures << ','
       << agg.mean_residual << ',' << agg.median_residual << ','
       << agg.mean_ci << ',' << agg.coverage << ',' << agg.mean_kl << '\n';
  }

  if (cfg.trace) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      std::ofstream os(dir + "/trace_" + std::to_string(i) + ".csv");
      os << "t_n,x,a,b,p_hat,median,ci_length,covers,kl\n";
      for (const IterRecord& it : records[i].trace)
        os << it.t_n << ',' << it.x << ',' << it.a << ',' << it.b << ','
           << it.p_hat << ',' << it.median << ',' << it.ci_length << ','
           << (it.covers ? 1 : 0) << ',' << it.kl << '\n';
    }
  }

  // plots from the first successful run
  const RunRecord* first = nullptr;
  for (const RunRecord& r : records)
    if (!r.failed) {
      first = &r;
      break;
    }
  if (!first) return;

  {
    std::vector<SvgSeries> series;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    int ci = 0;
    for (const auto& [tn, state] : first->snapshots) {
      SvgSeries s;
      s.color = colors[ci++ % 4];
      s.label = "T_n = " + std::to_string(tn);
      const auto& knots = state.knots();
      for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double d = state.density(0.5 * (knots[k] + knots[k + 1]));
        s.points.emplace_back(knots[k], d);
        s.points.emplace_back(knots[k + 1], d);
      }
      series.push_back(std::move(s));
    }
    write_svg_lines(dir + "/posterior_density.svg", "Posterior density", series);
  }

  if (!first->theta_curve.empty()) {
    SvgSeries fitted{.points = {}, .color = "#d62728", .label = "theta_hat"};
    SvgSeries truth{.points = {}, .color = "#1f77b4", .label = "theta"};
    for (const auto& row : first->theta_curve) {
      fitted.points.emplace_back(row[0], row[1]);
      truth.points.emplace_back(row[0], row[2]);
    }
    write_svg_lines(dir + "/theta_fit.svg", "Fitted vs true response probability",
                    {truth, fitted});
  }

  {
    SvgSeries med{.points = {}, .color = "#1f77b4", .label = "abs residual"};
    SvgSeries ci{.points = {}, .color = "#d62728", .label = "CI length"};
    for (const IterRecord& it : first->trace) {
      med.points.emplace_back(static_cast<double>(it.t_n),
                              std::abs(it.median - first->x_star_unit));
      ci.points.emplace_back(static_cast<double>(it.t_n), it.ci_length);
    }
    write_svg_lines(dir + "/convergence.svg", "Residual and CI decay", {med, ci});
  }
}

}  // namespace spba
