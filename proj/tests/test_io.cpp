#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfstmcmc/dataset.hpp"
#include "mfstmcmc/errors.hpp"
#include "mfstmcmc/io.hpp"
#include "mfstmcmc/model.hpp"
#include "mfstmcmc/state_space.hpp"

using namespace mfst;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kConfigDir = MFST_CONFIG_DIR;
const std::string kCli = MFST_CLI_PATH;

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("mfst_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& log) {
  std::string cmd = kCli + " " + args + " > " + log.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// column sums of a probability table written by the solve command
double csv_prob_sum(const fs::path& p) {
  std::string text = read_text_file(p.string());
  double sum = 0.0;
  size_t pos = text.find('\n');  // skip header
  while (pos != std::string::npos && pos + 1 < text.size()) {
    size_t eol = text.find('\n', pos + 1);
    std::string line = text.substr(pos + 1, eol - pos - 1);
    size_t comma = line.rfind(',');
    if (comma != std::string::npos) sum += std::stod(line.substr(comma + 1));
    pos = eol;
  }
  return sum;
}

}  // namespace

TEST_CASE("run configs parse with documented defaults") {
  RunConfig cfg = parse_run_config("{\"format_version\": 1}", "/tmp");
  CHECK(cfg.model_path.empty());
  CHECK(cfg.dataset_path.empty());
  CHECK(cfg.fsp_tolerance == 1e-8);
  CHECK(cfg.sampler.num_particles == 512);
  CHECK(cfg.sampler.kappa == 1.0);
  CHECK(cfg.sampler.kappa_bridge == 0.0);
  CHECK(cfg.sampler.kappa_cross == 1.0);
  CHECK(cfg.sampler.corr_target == 0.6);
  CHECK(cfg.sampler.max_sweep_iters == 100);
  CHECK(cfg.sampler.n_it == 0);
  CHECK(cfg.sampler.max_levels == 200);
  CHECK(cfg.strategy == "full");
  CHECK(cfg.integ.abs_tol == 1e-14);
  CHECK(cfg.integ.rel_tol == 1e-4);
  CHECK(cfg.integ.krylov_basis == 30);
  CHECK(std::isinf(cfg.integ.max_step));
  CHECK(cfg.seed == 0);
  CHECK(cfg.workers == 1);
  CHECK(cfg.output_dir == ".");
  CHECK(!cfg.solve.present);
  CHECK(!cfg.simulate.present);
}

TEST_CASE("relative model and dataset paths resolve against the config directory") {
  RunConfig cfg = parse_run_config(
      "{\"format_version\": 1, \"model\": \"m.json\", \"dataset\": \"sub/d.csv\"}",
      "/tmp/base");
  CHECK(cfg.model_path == "/tmp/base/m.json");
  CHECK(cfg.dataset_path == "/tmp/base/sub/d.csv");
  RunConfig abs = parse_run_config(
      "{\"format_version\": 1, \"model\": \"/elsewhere/m.json\"}", "/tmp/base");
  CHECK(abs.model_path == "/elsewhere/m.json");
}

TEST_CASE("run config validation catches schema mistakes") {
  auto reject = [](const std::string& text, const std::string& needle) {
    try {
      parse_run_config(text, "/tmp");
      FAIL_CHECK("accepted: " << text);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  reject("{not json", "not valid JSON");
  reject("[]", "root must be a JSON object");
  reject("{}", "format_version");
  reject("{\"format_version\": 2}", "format_version 1");
  reject("{\"format_version\": 1, \"extra\": 0}", "unknown key 'extra'");
  reject("{\"format_version\": 1, \"hierarchy\": {}}", "exactly one");
  reject("{\"format_version\": 1, \"hierarchy\": {\"bounds\": [[1]], "
         "\"interpolate\": {\"c\": [1], \"d\": [2], \"l_max\": 0}}}",
         "exactly one");
  reject("{\"format_version\": 1, \"hierarchy\": {\"bounds\": []}}", "non-empty");
  reject("{\"format_version\": 1, \"hierarchy\": {\"bounds\": [[1.5]]}}",
         "integers only");
  reject("{\"format_version\": 1, \"hierarchy\": {\"bounds\": [[-3]]}}",
         "out of range");
  reject("{\"format_version\": 1, \"hierarchy\": {\"interpolate\": "
         "{\"c\": [1], \"d\": [2]}}}",
         "needs c, d, and l_max");
  reject("{\"format_version\": 1, \"sampler\": {\"num_particles\": 1}}", ">= 2");
  reject("{\"format_version\": 1, \"sampler\": {\"kappa\": 0}}", "positive");
  reject("{\"format_version\": 1, \"sampler\": {\"warp\": 1}}", "unknown key 'warp'");
  reject("{\"format_version\": 1, \"strategy\": \"warp\"}", "unknown strategy");
  reject("{\"format_version\": 1, \"integrator\": {\"max_step\": -1}}", ">= 0");
  reject("{\"format_version\": 1, \"seed\": -1}", "non-negative");
  reject("{\"format_version\": 1, \"workers\": 0}", ">= 1");
  reject("{\"format_version\": 1, \"fsp_tolerance\": 0}", "positive");
  reject("{\"format_version\": 1, \"solve\": {\"theta\": {}, \"bound\": [1]}}",
         "solve needs");
  reject("{\"format_version\": 1, \"simulate\": {\"theta\": {}, \"times\": [1], "
         "\"n_cells\": 5}}",
         "simulate needs");
  reject("{\"format_version\": 1, \"simulate\": {\"theta\": {}, \"times\": [1], "
         "\"n_cells\": 5, \"observed_species\": []}}",
         "non-empty");
}

TEST_CASE("environment variables override the config file") {
  RunConfig cfg = parse_run_config(
      "{\"format_version\": 1, \"seed\": 5, \"workers\": 2, "
      "\"strategy\": \"full\", \"output_dir\": \"orig\"}",
      "/tmp");

  setenv("MFST_SEED", "991", 1);
  setenv("MFST_WORKERS", "3", 1);
  setenv("MFST_STRATEGY", "tuned-it", 1);
  setenv("MFST_OUTPUT_DIR", "elsewhere", 1);
  apply_env_overrides(cfg);
  CHECK(cfg.seed == 991);
  CHECK(cfg.workers == 3);
  CHECK(cfg.strategy == "tuned-it");
  CHECK(cfg.output_dir == "elsewhere");

  setenv("MFST_SEED", "banana", 1);
  CHECK_THROWS_AS(apply_env_overrides(cfg), ConfigError);
  setenv("MFST_SEED", "1", 1);
  setenv("MFST_WORKERS", "0", 1);
  CHECK_THROWS_AS(apply_env_overrides(cfg), ConfigError);
  setenv("MFST_WORKERS", "1", 1);
  setenv("MFST_STRATEGY", "warp", 1);
  CHECK_THROWS_AS(apply_env_overrides(cfg), ConfigError);

  unsetenv("MFST_SEED");
  unsetenv("MFST_WORKERS");
  unsetenv("MFST_STRATEGY");
  unsetenv("MFST_OUTPUT_DIR");

  // without the variables nothing moves
  RunConfig cfg2 = parse_run_config("{\"format_version\": 1, \"seed\": 5}", "/tmp");
  apply_env_overrides(cfg2);
  CHECK(cfg2.seed == 5);
}

TEST_CASE("resolved configs reparse to the same resolution") {
  std::string text = R"({
    "format_version": 1,
    "model": "models/bursting2.json",
    "dataset": "data/dataset.csv",
    "hierarchy": {"bounds": [[1, 1, 8], [1, 1, 32]]},
    "fsp_tolerance": 1e-6,
    "sampler": {"num_particles": 64, "kappa_bridge": 0.7},
    "strategy": "ess",
    "integrator": {"max_step": 2.5},
    "seed": 77,
    "workers": 2,
    "output_dir": "out",
    "solve": {"theta": {"k_on": 0.5}, "bound": [1, 1, 8], "times": [1.0]},
    "simulate": {"theta": {"k_on": 0.5}, "times": [1.0], "n_cells": 3,
                 "observed_species": ["RNA"], "freeze_bound": [2, 2, 50]}
  })";
  RunConfig cfg = parse_run_config(text, kConfigDir);
  CHECK(cfg.model_path == kConfigDir + "/models/bursting2.json");

  std::string first = resolved_config_json(cfg);
  RunConfig cfg2 = parse_run_config(first, "");
  std::string second = resolved_config_json(cfg2);
  CHECK(first == second);

  json j = json::parse(first);
  CHECK(j["format_version"] == 1);
  CHECK(j["model"] == cfg.model_path);
  CHECK(j["sampler"]["kappa_bridge"] == 0.7);
  CHECK(j["integrator"]["max_step"] == 2.5);
  CHECK(j["simulate"]["freeze_bound"] == std::vector<int>({2, 2, 50}));

  // an unset max_step round trips through the 0 = unlimited convention
  RunConfig plain = parse_run_config("{\"format_version\": 1}", "");
  json jp = json::parse(resolved_config_json(plain));
  CHECK(jp["integrator"]["max_step"] == 0.0);
  RunConfig plain2 = parse_run_config(resolved_config_json(plain), "");
  CHECK(std::isinf(plain2.integ.max_step));
}

TEST_CASE("hierarchies come from explicit bounds or the interpolation rule") {
  ReactionNetwork net = load_model(kConfigDir + "/models/bursting2.json");

  RunConfig cfg = parse_run_config(
      "{\"format_version\": 1, \"hierarchy\": {\"bounds\": [[1, 1, 8], [1, 1, 16]]}, "
      "\"fsp_tolerance\": 1e-5}",
      "");
  ModelHierarchy h = make_hierarchy(cfg, net);
  REQUIRE(h.levels() == 2);
  CHECK(h.bounds[0] == FidelityBound({1, 1, 8}));
  CHECK(h.bounds[1] == FidelityBound({1, 1, 16}));
  REQUIRE(h.fsp_tol.size() == 2);
  CHECK(h.fsp_tol[0] == 1e-5);
  CHECK(h.fsp_tol[1] == 1e-5);

  RunConfig icfg = parse_run_config(
      "{\"format_version\": 1, \"hierarchy\": {\"interpolate\": "
      "{\"c\": [1, 1, 8], \"d\": [1, 1, 32], \"l_max\": 2}}}",
      "");
  ModelHierarchy hi = make_hierarchy(icfg, net);
  ModelHierarchy want = hierarchy_from_interpolation({1, 1, 8}, {1, 1, 32}, 2);
  REQUIRE(hi.levels() == want.levels());
  for (int l = 0; l < hi.levels(); ++l)
    CHECK(hi.bounds[static_cast<size_t>(l)] == want.bounds[static_cast<size_t>(l)]);

  RunConfig none = parse_run_config("{\"format_version\": 1}", "");
  CHECK_THROWS_AS(make_hierarchy(none, net), ConfigError);

  RunConfig bad = parse_run_config(
      "{\"format_version\": 1, \"hierarchy\": {\"bounds\": [[1, 8]]}}", "");
  CHECK_THROWS_AS(make_hierarchy(bad, net), ConfigError);
}

TEST_CASE("parameter maps convert to log10 vectors in model order") {
  ReactionNetwork net = load_model(kConfigDir + "/models/bursting2.json");
  std::map<std::string, double> vals = {
      {"k_on", 0.5}, {"k_off", 1.0}, {"kr", 10.0}, {"gamma", 0.01}};
  Eigen::VectorXd th = theta_log10_from_map(net, vals);
  REQUIRE(th.size() == 4);
  for (int i = 0; i < 4; ++i) {
    const std::string& name = net.parameters[static_cast<size_t>(i)].name;
    CHECK(th[i] == doctest::Approx(std::log10(vals[name])).epsilon(1e-15));
  }

  std::map<std::string, double> unknown = vals;
  unknown["zeta"] = 1.0;
  CHECK_THROWS_AS(theta_log10_from_map(net, unknown), ConfigError);
  std::map<std::string, double> missing = {{"k_on", 0.5}};
  CHECK_THROWS_AS(theta_log10_from_map(net, missing), ConfigError);
  std::map<std::string, double> nonpos = vals;
  nonpos["kr"] = 0.0;
  CHECK_THROWS_AS(theta_log10_from_map(net, nonpos), ConfigError);
}

TEST_CASE("samples, level logs, and distribution tables render as documented") {
  ReactionNetwork net = load_model(kConfigDir + "/models/birth_death.json");

  std::vector<Particle> pop(2);
  pop[0].theta = Eigen::VectorXd::Zero(2);
  pop[0].theta << 0.1, -1.0;
  pop[0].log_like = -3.5;
  pop[0].log_prior = -0.25;
  pop[1].theta = Eigen::VectorXd::Zero(2);
  pop[1].theta << 1.0, 0.5;
  pop[1].log_like = -2.0;
  pop[1].log_prior = -1.0;
  std::string csv = samples_csv_text(net, pop);
  std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header == "log10_" + net.parameters[0].name + ",log10_" +
                      net.parameters[1].name + ",log_like,log_prior");
  // %.17g keeps doubles exact through a text round trip
  CHECK(csv.find("0.10000000000000001") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  LevelRecord rec;
  rec.level = 1;
  rec.beta = 0.25;
  rec.fidelity = 2;
  rec.delta_beta = 0.25;
  rec.ess = 31.5;
  rec.cov = 1.0;
  rec.acceptance = 0.3;
  rec.sweep_iters = 4;
  rec.wall_time = 0.01;
  rec.strategy_decision = "temper";
  rec.log_c_l = -1.5;  // it_criterion_value and cross_cov stay NaN
  std::string log = level_log_text({rec, rec});
  CHECK(std::count(log.begin(), log.end(), '\n') == 2);
  json line = json::parse(log.substr(0, log.find('\n')));
  CHECK(line["level"] == 1);
  CHECK(line["beta"] == 0.25);
  CHECK(line["strategy_decision"] == "temper");
  CHECK(line["it_criterion_value"].is_null());
  CHECK(line["cross_cov"].is_null());
  CHECK(line["log_c_l"] == -1.5);

  auto space = build_rectangle_space({1});
  Eigen::VectorXd probs(2);
  probs << 0.25, 0.75;
  std::string dist = distribution_csv_text(*space, probs, net.species);
  CHECK(dist == net.species[0] + ",probability\n0,0.25\n1,0.75\n");

  RunConfig cfg = parse_run_config("{\"format_version\": 1}", "");
  RunResult res;
  res.log_evidence = -12.5;
  res.log_evidence_sigma = 0.25;
  res.levels.push_back(rec);
  json rep = json::parse(report_json_text(cfg, res, {100, 40}, true, 1.5));
  CHECK(rep["format_version"] == 1);
  CHECK(rep["success"] == true);
  CHECK(rep["log_evidence"] == -12.5);
  CHECK(rep["full_model_solves"] == 40);
  CHECK(rep["per_fidelity_solve_counts"] == std::vector<long long>({100, 40}));
  CHECK(rep["levels"].size() == 1);
  CHECK(rep["resolved_config"].is_object());
  CHECK(rep["resolved_config"]["format_version"] == 1);
}

TEST_CASE("text files round trip and missing files are reported") {
  fs::path dir = scratch_dir("textio");
  fs::path nested = dir / "a" / "b" / "f.txt";
  write_text_file(nested.string(), "hello\nworld\n");
  CHECK(read_text_file(nested.string()) == "hello\nworld\n");
  CHECK_THROWS_AS(read_text_file((dir / "absent.txt").string()), ConfigError);
  CHECK(format_g17(0.1) == "0.10000000000000001");
  CHECK(format_g17(1.0) == "1");
  fs::remove_all(dir);
}

TEST_CASE("command line solve writes distributions that sum to one") {
  fs::path dir = scratch_dir("cli_solve");
  int rc = run_cli("solve --config " + kConfigDir + "/solve_birth_death.json --out " +
                       (dir / "solve").string(),
                   dir / "log.txt");
  REQUIRE(rc == 0);

  json rep = json::parse(read_text_file((dir / "solve" / "solve_report.json").string()));
  CHECK(rep["format_version"] == 1);
  REQUIRE(rep["files"].size() == 3);
  CHECK(rep["n_states"].get<int>() > 10);
  for (const auto& eb : rep["error_bound"]) CHECK(eb.get<double>() <= 1e-7);
  for (const auto& name : rep["files"]) {
    double s = csv_prob_sum(dir / "solve" / name.get<std::string>());
    CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
  }
  fs::remove_all(dir);
}

TEST_CASE("command line simulate is reproducible for a fixed seed") {
  fs::path dir = scratch_dir("cli_sim");
  std::string base = "simulate --config " + kConfigDir + "/simulate_bursting2.json";
  REQUIRE(run_cli(base + " --seed 123 --out " + (dir / "a").string(),
                  dir / "log_a.txt") == 0);
  REQUIRE(run_cli(base + " --seed 123 --out " + (dir / "b").string(),
                  dir / "log_b.txt") == 0);
  REQUIRE(run_cli(base + " --seed 124 --out " + (dir / "c").string(),
                  dir / "log_c.txt") == 0);

  std::string a = read_text_file((dir / "a" / "dataset.csv").string());
  std::string b = read_text_file((dir / "b" / "dataset.csv").string());
  std::string c = read_text_file((dir / "c" / "dataset.csv").string());
  CHECK(a == b);
  CHECK(a != c);

  SnapshotDataset data = load_dataset_csv((dir / "a" / "dataset.csv").string());
  CHECK(data.num_times() == 4);
  CHECK(data.total_cells() == 800);
  CHECK(data.observed_species == std::vector<std::string>({"RNA"}));

  json man = json::parse(read_text_file((dir / "a" / "manifest.json").string()));
  CHECK(man["format_version"] == 1);
  CHECK(man["dataset"] == "dataset.csv");
  CHECK(man["seed"] == 123);
  fs::remove_all(dir);
}

TEST_CASE("command line infer runs end to end and reproduces itself") {
  fs::path dir = scratch_dir("cli_infer");

  // small dataset keeps the smoke test quick: two times, 25 cells each
  SnapshotDataset full = load_dataset_csv(kConfigDir + "/data/dataset.csv");
  SnapshotDataset mini;
  mini.observed_species = full.observed_species;
  mini.times = {full.times[0], full.times[1]};
  mini.cells = {
      std::vector<State>(full.cells[0].begin(), full.cells[0].begin() + 25),
      std::vector<State>(full.cells[1].begin(), full.cells[1].begin() + 25)};
  save_dataset_csv(mini, (dir / "mini.csv").string());

  json cfg;
  cfg["format_version"] = 1;
  cfg["model"] = kConfigDir + "/models/bursting2.json";
  cfg["dataset"] = (dir / "mini.csv").string();
  cfg["hierarchy"] = {{"bounds", {{1, 1, 8}, {1, 1, 16}}}};
  cfg["fsp_tolerance"] = 1e-6;
  cfg["sampler"] = {{"num_particles", 16}, {"max_sweep_iters", 6}};
  cfg["strategy"] = "tuned-it";
  cfg["seed"] = 9;
  write_text_file((dir / "cfg.json").string(), cfg.dump(2));

  REQUIRE(run_cli("infer --config " + (dir / "cfg.json").string() + " --out " +
                      (dir / "run1").string(),
                  dir / "log1.txt") == 0);

  json rep = json::parse(read_text_file((dir / "run1" / "report.json").string()));
  CHECK(rep["format_version"] == 1);
  CHECK(rep["success"] == true);
  CHECK(std::isfinite(rep["log_evidence"].get<double>()));
  CHECK(rep["log_evidence_sigma"].get<double>() >= 0.0);
  CHECK(rep["full_model_solves"].get<long long>() > 0);
  REQUIRE(rep["levels"].is_array());
  CHECK(rep["levels"].back()["beta"] == 1.0);

  std::string lvl_text = read_text_file((dir / "run1" / "levels.jsonl").string());
  CHECK(static_cast<size_t>(std::count(lvl_text.begin(), lvl_text.end(), '\n')) ==
        rep["levels"].size());

  std::string samples = read_text_file((dir / "run1" / "samples.csv").string());
  CHECK(std::count(samples.begin(), samples.end(), '\n') == 17);  // header + N
  CHECK(samples.rfind("log10_k_on,", 0) == 0);

  // same seed, fresh directory: byte-identical samples
  REQUIRE(run_cli("infer --config " + (dir / "cfg.json").string() + " --out " +
                      (dir / "run2").string(),
                  dir / "log2.txt") == 0);
  CHECK(read_text_file((dir / "run2" / "samples.csv").string()) == samples);

  // the report embeds a resolved config that reproduces the run by itself
  write_text_file((dir / "resolved.json").string(),
                  rep["resolved_config"].dump(2) + "\n");
  REQUIRE(run_cli("infer --config " + (dir / "resolved.json").string() + " --out " +
                      (dir / "run3").string(),
                  dir / "log3.txt") == 0);
  CHECK(read_text_file((dir / "run3" / "samples.csv").string()) == samples);
  fs::remove_all(dir);
}

TEST_CASE("command line evidence compares models that share a dataset") {
  fs::path dir = scratch_dir("cli_evidence");

  SnapshotDataset full = load_dataset_csv(kConfigDir + "/data/dataset.csv");
  SnapshotDataset mini;
  mini.observed_species = full.observed_species;
  mini.times = {full.times[0], full.times[2]};
  mini.cells = {
      std::vector<State>(full.cells[0].begin(), full.cells[0].begin() + 20),
      std::vector<State>(full.cells[2].begin(), full.cells[2].begin() + 20)};
  save_dataset_csv(mini, (dir / "mini.csv").string());

  auto write_run = [&](const std::string& name, const std::string& model,
                       const json& bounds) {
    json cfg;
    cfg["format_version"] = 1;
    cfg["model"] = kConfigDir + "/models/" + model;
    cfg["dataset"] = (dir / "mini.csv").string();
    cfg["hierarchy"] = {{"bounds", bounds}};
    cfg["fsp_tolerance"] = 1e-6;
    cfg["sampler"] = {{"num_particles", 16}, {"max_sweep_iters", 6}};
    cfg["strategy"] = "full";
    cfg["seed"] = 4;
    write_text_file((dir / name).string(), cfg.dump(2));
  };
  write_run("run2state.json", "bursting2.json", {{1, 1, 16}});
  write_run("run3state.json", "bursting3.json", {{1, 1, 1, 16}});

  json ev;
  ev["format_version"] = 1;
  ev["runs"] = {"run2state.json", "run3state.json"};
  write_text_file((dir / "evidence.json").string(), ev.dump(2));

  REQUIRE(run_cli("evidence --config " + (dir / "evidence.json").string() + " --out " +
                      (dir / "out").string(),
                  dir / "log.txt") == 0);

  json rep = json::parse(read_text_file((dir / "out" / "evidence_report.json").string()));
  CHECK(rep["format_version"] == 1);
  REQUIRE(rep["models"].size() == 2);
  for (const auto& m : rep["models"]) {
    CHECK(std::isfinite(m["log_evidence"].get<double>()));
    CHECK(m["log_evidence_sigma"].get<double>() >= 0.0);
  }
  double b01 = rep["pairwise_log_bayes_factors"][0][1].get<double>();
  double b10 = rep["pairwise_log_bayes_factors"][1][0].get<double>();
  CHECK(b01 == doctest::Approx(-b10).epsilon(1e-12));
  double p0 = rep["class_posterior"][0].get<double>();
  double p1 = rep["class_posterior"][1].get<double>();
  CHECK(p0 + p1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fs::exists(dir / "out" / "run_0" / "samples.csv"));
  CHECK(fs::exists(dir / "out" / "run_1" / "samples.csv"));
  fs::remove_all(dir);
}

TEST_CASE("command line rejects broken configurations with exit code 2") {
  fs::path dir = scratch_dir("cli_errors");

  write_text_file((dir / "bad_key.json").string(),
                  "{\"format_version\": 1, \"warp\": 9}");
  CHECK(run_cli("solve --config " + (dir / "bad_key.json").string(),
                dir / "log1.txt") == 2);

  write_text_file((dir / "no_solve.json").string(),
                  "{\"format_version\": 1, \"model\": \"" + kConfigDir +
                      "/models/birth_death.json\"}");
  CHECK(run_cli("solve --config " + (dir / "no_solve.json").string(),
                dir / "log2.txt") == 2);

  // dataset path that does not exist fails before any solve
  json cfg;
  cfg["format_version"] = 1;
  cfg["model"] = kConfigDir + "/models/bursting2.json";
  cfg["dataset"] = (dir / "absent.csv").string();
  cfg["hierarchy"] = {{"bounds", {{1, 1, 8}}}};
  write_text_file((dir / "no_data.json").string(), cfg.dump(2));
  CHECK(run_cli("infer --config " + (dir / "no_data.json").string() + " --out " +
                    (dir / "x").string(),
                dir / "log3.txt") == 2);

  CHECK(run_cli("infer", dir / "log4.txt") != 0);           // missing --config
  CHECK(run_cli("warp --config x.json", dir / "log5.txt") != 0);
  fs::remove_all(dir);
}
