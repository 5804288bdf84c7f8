// Command-line front end: forward CME solves, synthetic-data simulation,
// posterior inference, and model-evidence comparison over a shared dataset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfstmcmc/dataset.hpp"
#include "mfstmcmc/errors.hpp"
#include "mfstmcmc/fsp_solver.hpp"
#include "mfstmcmc/io.hpp"
#include "mfstmcmc/likelihood.hpp"
#include "mfstmcmc/model.hpp"
#include "mfstmcmc/multifi.hpp"
#include "mfstmcmc/ssa.hpp"

namespace {

using namespace mfst;
using ojson = nlohmann::ordered_json;

struct Overrides {
  uint64_t seed = 0;
  int workers = 0;
  std::string out, strategy;
  bool has_seed = false, has_workers = false, has_out = false, has_strategy = false;
};

void apply_overrides(RunConfig& cfg, const Overrides& ov) {
  apply_env_overrides(cfg);
  if (ov.has_seed) cfg.seed = ov.seed;
  if (ov.has_workers) cfg.workers = ov.workers;
  if (ov.has_out) cfg.output_dir = ov.out;
  if (ov.has_strategy) {
    parse_strategy(ov.strategy);
    cfg.strategy = ov.strategy;
  }
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_solve(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw ConfigError("solve requires a model");
  if (!cfg.solve.present) throw ConfigError("config has no solve section");
  ReactionNetwork net = load_model(cfg.model_path);
  Eigen::VectorXd theta = theta_log10_from_map(net, cfg.solve.theta);
  if (static_cast<int>(cfg.solve.bound.size()) != net.num_species())
    throw ConfigError("solve.bound length must match the species count");

  FspSolveOptions opts;
  opts.fsp_tol = cfg.fsp_tolerance;
  opts.integ = cfg.integ;
  auto t0 = std::chrono::steady_clock::now();
  FspSolution sol = solve_cme_adaptive(net, theta, cfg.solve.bound, cfg.solve.times, opts);
  double wall = seconds_since(t0);

  std::filesystem::create_directories(cfg.output_dir);
  ojson files = ojson::array();
  for (size_t k = 0; k < sol.times.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof(name), "distribution_%02zu.csv", k);
    write_text_file(cfg.output_dir + "/" + name,
                    distribution_csv_text(*sol.space, sol.dist[k], net.species));
    files.push_back(std::string(name));
  }

  ojson rep;
  rep["format_version"] = kFormatVersion;
  rep["model"] = cfg.model_path;
  rep["times"] = sol.times;
  rep["files"] = files;
  rep["n_states"] = sol.space->size();
  rep["expansions"] = sol.expansions;
  rep["steps"] = sol.stepper.steps;
  rep["rejections"] = sol.stepper.rejections;
  ojson eb = ojson::array();
  for (size_t k = 0; k < sol.times.size(); ++k) eb.push_back(sol.error_bound(k));
  rep["error_bound"] = eb;
  rep["lost_mass"] = sol.lost_mass.back();
  rep["frozen_mass"] = sol.frozen_mass.back();
  rep["wall_time"] = wall;
  write_text_file(cfg.output_dir + "/solve_report.json", rep.dump(2) + "\n");

  std::printf("solved %d states, %zu output times, error bound %.3e, %.2fs\n",
              sol.space->size(), sol.times.size(), sol.error_bound(sol.times.size() - 1),
              wall);
  return 0;
}

int run_simulate(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw ConfigError("simulate requires a model");
  if (!cfg.simulate.present) throw ConfigError("config has no simulate section");
  ReactionNetwork net = load_model(cfg.model_path);
  Eigen::VectorXd theta = theta_log10_from_map(net, cfg.simulate.theta);
  const FidelityBound* fb = nullptr;
  if (!cfg.simulate.freeze_bound.empty()) {
    if (static_cast<int>(cfg.simulate.freeze_bound.size()) != net.num_species())
      throw ConfigError("simulate.freeze_bound length must match the species count");
    fb = &cfg.simulate.freeze_bound;
  }

  SnapshotDataset data =
      generate_snapshot_dataset(net, theta, cfg.simulate.times, cfg.simulate.n_cells,
                                cfg.simulate.observed_species, cfg.seed, cfg.workers, fb);
  std::filesystem::create_directories(cfg.output_dir);
  save_dataset_csv(data, cfg.output_dir + "/dataset.csv");
  write_text_file(cfg.output_dir + "/manifest.json", simulate_manifest_text(cfg));
  std::printf("simulated %lld cells over %d times -> %s/dataset.csv\n",
              data.total_cells(), data.num_times(), cfg.output_dir.c_str());
  return 0;
}

struct InferOutcome {
  bool ok = false;
  RunResult res;
  double wall = 0.0;
  std::vector<long long> solves;
  std::string model_name;
  std::string error;
};

InferOutcome infer_run(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw ConfigError("infer requires a model");
  if (cfg.dataset_path.empty()) throw ConfigError("infer requires a dataset");
  ReactionNetwork net = load_model(cfg.model_path);
  SnapshotDataset data = load_dataset_csv(cfg.dataset_path);
  data.observed_indices(net);  // fail on unknown species before any solve
  ModelHierarchy hier = make_hierarchy(cfg, net);

  LikelihoodConfig lc;
  lc.fsp.fsp_tol = cfg.fsp_tolerance;
  lc.fsp.integ = cfg.integ;
  CmeLikelihood like(std::move(net), std::move(data), std::move(hier), lc);

  const ReactionNetwork& nref = like.network();
  PriorSpec prior;
  prior.log_density = [&nref](const Eigen::VectorXd& th) {
    return prior_log_density(nref.parameters, th);
  };
  prior.sample = [&nref](RngStream& rng) { return prior_sample(nref.parameters, rng); };

  SamplerConfig sc = cfg.sampler;
  sc.workers = cfg.workers;

  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream lvl(cfg.output_dir + "/levels.jsonl", std::ios::binary);

  InferOutcome out;
  out.model_name = nref.name;
  auto t0 = std::chrono::steady_clock::now();
  try {
    out.res = run_multifidelity(like, prior, parse_strategy(cfg.strategy), sc, cfg.seed,
                                [&lvl](const LevelRecord& r) {
                                  lvl << level_log_text({r});
                                  lvl.flush();
                                });
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.wall = seconds_since(t0);
  out.solves = like.solve_counts();

  if (out.ok)
    write_text_file(cfg.output_dir + "/samples.csv",
                    samples_csv_text(nref, out.res.posterior));
  write_text_file(cfg.output_dir + "/report.json",
                  report_json_text(cfg, out.res, out.solves, out.ok, out.wall));
  return out;
}

int run_infer(const RunConfig& cfg) {
  InferOutcome out = infer_run(cfg);
  if (!out.ok) {
    std::fprintf(stderr, "inference failed: %s\n", out.error.c_str());
    return 1;
  }
  std::printf("model %s, strategy %s: log evidence %.6f +- %.6f, %zu levels, "
              "%lld top-fidelity solves, %.2fs\n",
              out.model_name.c_str(), cfg.strategy.c_str(), out.res.log_evidence,
              out.res.log_evidence_sigma, out.res.levels.size(),
              out.solves.empty() ? 0 : out.solves.back(), out.wall);
  return 0;
}

int run_evidence(const std::string& config_path, const Overrides& ov) {
  std::string text = read_text_file(config_path);
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("evidence config is not valid JSON: ") + e.what());
  }
  if (!j.contains("format_version") || j["format_version"].get<int>() != kFormatVersion)
    throw ConfigError("evidence config must declare format_version " +
                      std::to_string(kFormatVersion));
  if (!j.contains("runs") || !j["runs"].is_array() || j["runs"].size() < 2)
    throw ConfigError("evidence config needs at least 2 entries in 'runs'");

  std::string base = std::filesystem::absolute(std::filesystem::path(config_path))
                         .parent_path()
                         .string();
  std::string out_dir = ov.has_out ? ov.out
                        : j.contains("output_dir") ? j["output_dir"].get<std::string>()
                                                   : std::string("evidence_out");

  std::vector<RunConfig> runs;
  for (const auto& e : j["runs"]) {
    if (!e.is_string()) throw ConfigError("evidence 'runs' must hold config paths");
    std::filesystem::path p(e.get<std::string>());
    std::string full = p.is_absolute() ? p.string() : (base / p).lexically_normal().string();
    RunConfig rc = load_run_config(full);
    apply_overrides(rc, ov);
    runs.push_back(std::move(rc));
  }
  for (size_t i = 1; i < runs.size(); ++i)
    if (runs[i].dataset_path != runs[0].dataset_path)
      throw ConfigError("evidence runs must share one dataset (got '" +
                        runs[i].dataset_path + "' vs '" + runs[0].dataset_path + "')");

  std::vector<double> weights(runs.size(), 1.0 / static_cast<double>(runs.size()));
  if (j.contains("prior_weights")) {
    if (!j["prior_weights"].is_array() || j["prior_weights"].size() != runs.size())
      throw ConfigError("prior_weights must list one weight per run");
    double s = 0;
    for (size_t i = 0; i < runs.size(); ++i) {
      weights[i] = j["prior_weights"][i].get<double>();
      if (!(weights[i] > 0)) throw ConfigError("prior_weights must be positive");
      s += weights[i];
    }
    for (double& w : weights) w /= s;
  }

  std::vector<InferOutcome> outcomes;
  for (size_t i = 0; i < runs.size(); ++i) {
    runs[i].output_dir = out_dir + "/run_" + std::to_string(i);
    InferOutcome oc = infer_run(runs[i]);
    if (!oc.ok)
      throw SamplerError("evidence run " + std::to_string(i) + " (" + oc.model_name +
                         ") failed: " + oc.error);
    outcomes.push_back(std::move(oc));
  }

  const size_t n = outcomes.size();
  std::vector<std::vector<double>> bf(n, std::vector<double>(n, 0.0));
  for (size_t a = 0; a < n; ++a)
    for (size_t b = 0; b < n; ++b)
      bf[a][b] = outcomes[a].res.log_evidence - outcomes[b].res.log_evidence;

  // class posterior, shifted for stability
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> lp(n);
  for (size_t i = 0; i < n; ++i) {
    lp[i] = outcomes[i].res.log_evidence + std::log(weights[i]);
    mx = std::max(mx, lp[i]);
  }
  double z = 0;
  for (size_t i = 0; i < n; ++i) z += std::exp(lp[i] - mx);
  std::vector<double> post(n);
  for (size_t i = 0; i < n; ++i) post[i] = std::exp(lp[i] - mx) / z;

  ojson rep;
  rep["format_version"] = kFormatVersion;
  rep["dataset"] = runs[0].dataset_path;
  ojson models = ojson::array();
  for (size_t i = 0; i < n; ++i) {
    ojson m;
    m["name"] = outcomes[i].model_name;
    m["config"] = resolved_config_json(runs[i]).empty()
                      ? ojson{}
                      : ojson::parse(resolved_config_json(runs[i]));
    m["log_evidence"] = outcomes[i].res.log_evidence;
    m["log_evidence_sigma"] = outcomes[i].res.log_evidence_sigma;
    m["wall_time"] = outcomes[i].wall;
    models.push_back(m);
  }
  rep["models"] = models;
  rep["pairwise_log_bayes_factors"] = bf;
  rep["prior_weights"] = weights;
  rep["class_posterior"] = post;
  write_text_file(out_dir + "/evidence_report.json", rep.dump(2) + "\n");

  std::printf("%-24s %16s %10s %14s %10s\n", "model", "log evidence", "sigma",
              "class posterior", "time (s)");
  for (size_t i = 0; i < n; ++i)
    std::printf("%-24s %16.4f %10.4f %14.4f %10.2f\n", outcomes[i].model_name.c_str(),
                outcomes[i].res.log_evidence, outcomes[i].res.log_evidence_sigma,
                post[i], outcomes[i].wall);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic reaction network toolkit: truncated CME solves, "
               "stochastic simulation, and tempered-SMC inference"};
  app.require_subcommand(1);

  std::string cfg_path;
  Overrides ov;
  auto add_common = [&](CLI::App* sub, bool strategy_flag) {
    sub->add_option("--config", cfg_path, "run configuration JSON")->required();
    sub->add_option("--seed", ov.seed, "master RNG seed")->each([&](const std::string&) {
      ov.has_seed = true;
    });
    sub->add_option("--workers", ov.workers, "worker threads")
        ->each([&](const std::string&) { ov.has_workers = true; });
    sub->add_option("--out", ov.out, "output directory")
        ->each([&](const std::string&) { ov.has_out = true; });
    if (strategy_flag)
      sub->add_option("--strategy", ov.strategy, "full|ess|it|tuned-it")
          ->each([&](const std::string&) { ov.has_strategy = true; });
  };

  CLI::App* solve = app.add_subcommand("solve", "forward transient CME solve");
  add_common(solve, false);
  CLI::App* sim = app.add_subcommand("simulate", "draw a synthetic snapshot dataset");
  add_common(sim, false);
  CLI::App* infer = app.add_subcommand("infer", "posterior sampling and evidence");
  add_common(infer, true);
  CLI::App* evid = app.add_subcommand("evidence", "compare models on one dataset");
  add_common(evid, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(evid)) return run_evidence(cfg_path, ov);
    RunConfig cfg = load_run_config(cfg_path);
    apply_overrides(cfg, ov);
    if (app.got_subcommand(solve)) return run_solve(cfg);
    if (app.got_subcommand(sim)) return run_simulate(cfg);
    if (app.got_subcommand(infer)) return run_infer(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
