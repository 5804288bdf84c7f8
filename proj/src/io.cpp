#include "mfstmcmc/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mfstmcmc/errors.hpp"

namespace mfst {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << text;
}

namespace {

std::string resolve_path(const std::string& raw, const std::string& base_dir) {
  std::filesystem::path p(raw);
  if (p.is_absolute()) return p.lexically_normal().string();
  std::filesystem::path base =
      base_dir.empty() ? std::filesystem::current_path() : std::filesystem::path(base_dir);
  return (base / p).lexically_normal().string();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

double req_pos(const json& j, const char* key, double dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number()) throw ConfigError(std::string(key) + " must be a number in " + where);
  double v = j[key].get<double>();
  if (!(v > 0.0)) throw ConfigError(std::string(key) + " must be positive in " + where);
  return v;
}

int req_int(const json& j, const char* key, int dflt, int lo, const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number_integer())
    throw ConfigError(std::string(key) + " must be an integer in " + where);
  int v = j[key].get<int>();
  if (v < lo)
    throw ConfigError(std::string(key) + " must be >= " + std::to_string(lo) + " in " + where);
  return v;
}

std::vector<int32_t> int_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of integers");
  std::vector<int32_t> out;
  for (const auto& e : j) {
    if (!e.is_number_integer()) throw ConfigError(where + " must contain integers only");
    long long v = e.get<long long>();
    if (v < 0 || v > std::numeric_limits<int32_t>::max())
      throw ConfigError(where + " entry out of range");
    out.push_back(static_cast<int32_t>(v));
  }
  return out;
}

std::vector<double> num_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(where + " must contain numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

std::map<std::string, double> theta_map(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ".theta must map parameter names to values");
  std::map<std::string, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number())
      throw ConfigError(where + ".theta." + it.key() + " must be a number");
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  check_keys(j,
             {"format_version", "model", "dataset", "hierarchy", "fsp_tolerance",
              "sampler", "strategy", "integrator", "seed", "workers", "output_dir",
              "solve", "simulate"},
             "config root");
  if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != kFormatVersion)
    throw ConfigError("config must declare format_version " +
                      std::to_string(kFormatVersion));

  RunConfig cfg;
  if (j.contains("model")) {
    if (!j["model"].is_string()) throw ConfigError("model must be a path string");
    cfg.model_path = resolve_path(j["model"].get<std::string>(), base_dir);
  }
  if (j.contains("dataset")) {
    if (!j["dataset"].is_string()) throw ConfigError("dataset must be a path string");
    cfg.dataset_path = resolve_path(j["dataset"].get<std::string>(), base_dir);
  }

  if (j.contains("hierarchy")) {
    const json& h = j["hierarchy"];
    check_keys(h, {"bounds", "interpolate"}, "hierarchy");
    if (h.contains("bounds") == h.contains("interpolate"))
      throw ConfigError("hierarchy needs exactly one of 'bounds' or 'interpolate'");
    if (h.contains("bounds")) {
      if (!h["bounds"].is_array() || h["bounds"].empty())
        throw ConfigError("hierarchy.bounds must be a non-empty array");
      for (size_t i = 0; i < h["bounds"].size(); ++i)
        cfg.explicit_bounds.push_back(
            int_vector(h["bounds"][i], "hierarchy.bounds[" + std::to_string(i) + "]"));
    } else {
      const json& it = h["interpolate"];
      check_keys(it, {"c", "d", "l_max"}, "hierarchy.interpolate");
      if (!it.contains("c") || !it.contains("d") || !it.contains("l_max"))
        throw ConfigError("hierarchy.interpolate needs c, d, and l_max");
      cfg.interp_c = int_vector(it["c"], "hierarchy.interpolate.c");
      cfg.interp_d = int_vector(it["d"], "hierarchy.interpolate.d");
      cfg.interp_lmax = req_int(it, "l_max", 0, 0, "hierarchy.interpolate");
    }
  }

  cfg.fsp_tolerance = req_pos(j, "fsp_tolerance", 1e-8, "config");

  if (j.contains("sampler")) {
    const json& s = j["sampler"];
    check_keys(s,
               {"num_particles", "kappa", "kappa_bridge", "kappa_cross",
                "correlation_target", "max_sweep_iters", "n_it", "max_levels",
                "scale_eta"},
               "sampler");
    cfg.sampler.num_particles = req_int(s, "num_particles", 512, 2, "sampler");
    cfg.sampler.kappa = req_pos(s, "kappa", 1.0, "sampler");
    if (s.contains("kappa_bridge"))
      cfg.sampler.kappa_bridge = req_pos(s, "kappa_bridge", 0.0, "sampler");
    cfg.sampler.kappa_cross = req_pos(s, "kappa_cross", 1.0, "sampler");
    cfg.sampler.corr_target = req_pos(s, "correlation_target", 0.6, "sampler");
    cfg.sampler.max_sweep_iters = req_int(s, "max_sweep_iters", 100, 1, "sampler");
    cfg.sampler.n_it = req_int(s, "n_it", 0, 0, "sampler");
    cfg.sampler.max_levels = req_int(s, "max_levels", 200, 1, "sampler");
    cfg.sampler.scale_eta = req_pos(s, "scale_eta", 1.0, "sampler");
  }

  if (j.contains("strategy")) {
    if (!j["strategy"].is_string()) throw ConfigError("strategy must be a string");
    cfg.strategy = j["strategy"].get<std::string>();
    parse_strategy(cfg.strategy);  // validates
  }

  if (j.contains("integrator")) {
    const json& g = j["integrator"];
    check_keys(g, {"abs_tol", "rel_tol", "krylov_basis", "max_step"}, "integrator");
    cfg.integ.abs_tol = req_pos(g, "abs_tol", 1e-14, "integrator");
    cfg.integ.rel_tol = req_pos(g, "rel_tol", 1e-4, "integrator");
    cfg.integ.krylov_basis = req_int(g, "krylov_basis", 30, 2, "integrator");
    if (g.contains("max_step")) {
      if (!g["max_step"].is_number()) throw ConfigError("integrator.max_step must be a number");
      double ms = g["max_step"].get<double>();
      if (ms < 0.0) throw ConfigError("integrator.max_step must be >= 0");
      cfg.integ.max_step = ms == 0.0 ? std::numeric_limits<double>::infinity() : ms;
    }
  }

  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      throw ConfigError("seed must be a non-negative integer");
    if (j["seed"].is_number_integer() && j["seed"].get<long long>() < 0)
      throw ConfigError("seed must be a non-negative integer");
    cfg.seed = j["seed"].get<uint64_t>();
  }
  cfg.workers = req_int(j, "workers", 1, 1, "config");
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("output_dir must be a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }

  if (j.contains("solve")) {
    const json& s = j["solve"];
    check_keys(s, {"theta", "bound", "times"}, "solve");
    if (!s.contains("theta") || !s.contains("bound") || !s.contains("times"))
      throw ConfigError("solve needs theta, bound, and times");
    cfg.solve.present = true;
    cfg.solve.theta = theta_map(s["theta"], "solve");
    cfg.solve.bound = int_vector(s["bound"], "solve.bound");
    cfg.solve.times = num_vector(s["times"], "solve.times");
  }

  if (j.contains("simulate")) {
    const json& s = j["simulate"];
    check_keys(s, {"theta", "times", "n_cells", "observed_species", "freeze_bound"},
               "simulate");
    if (!s.contains("theta") || !s.contains("times") || !s.contains("n_cells") ||
        !s.contains("observed_species"))
      throw ConfigError("simulate needs theta, times, n_cells, and observed_species");
    cfg.simulate.present = true;
    cfg.simulate.theta = theta_map(s["theta"], "simulate");
    cfg.simulate.times = num_vector(s["times"], "simulate.times");
    cfg.simulate.n_cells = req_int(s, "n_cells", 0, 1, "simulate");
    if (!s["observed_species"].is_array() || s["observed_species"].empty())
      throw ConfigError("simulate.observed_species must be a non-empty array");
    for (const auto& e : s["observed_species"]) {
      if (!e.is_string()) throw ConfigError("simulate.observed_species must hold strings");
      cfg.simulate.observed_species.push_back(e.get<std::string>());
    }
    if (s.contains("freeze_bound"))
      cfg.simulate.freeze_bound = int_vector(s["freeze_bound"], "simulate.freeze_bound");
  }

  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::string text = read_text_file(path);
  std::string base = std::filesystem::absolute(std::filesystem::path(path))
                         .parent_path()
                         .string();
  try {
    return parse_run_config(text, base);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_env_overrides(RunConfig& cfg) {
  if (const char* v = std::getenv("MFST_SEED")) {
    char* end = nullptr;
    unsigned long long s = std::strtoull(v, &end, 10);
    if (end == v || *end != '\0') throw ConfigError("MFST_SEED is not an integer");
    cfg.seed = static_cast<uint64_t>(s);
  }
  if (const char* v = std::getenv("MFST_WORKERS")) {
    int w = std::atoi(v);
    if (w < 1) throw ConfigError("MFST_WORKERS must be >= 1");
    cfg.workers = w;
  }
  if (const char* v = std::getenv("MFST_STRATEGY")) {
    parse_strategy(v);
    cfg.strategy = v;
  }
  if (const char* v = std::getenv("MFST_OUTPUT_DIR")) cfg.output_dir = v;
}

std::string resolved_config_json(const RunConfig& cfg) {
  ojson j;
  j["format_version"] = kFormatVersion;
  if (!cfg.model_path.empty()) j["model"] = cfg.model_path;
  if (!cfg.dataset_path.empty()) j["dataset"] = cfg.dataset_path;
  if (!cfg.explicit_bounds.empty()) {
    ojson b = ojson::array();
    for (const auto& v : cfg.explicit_bounds) b.push_back(v);
    j["hierarchy"] = ojson{{"bounds", b}};
  } else if (cfg.interp_lmax >= 0) {
    j["hierarchy"] = ojson{{"interpolate", ojson{{"c", cfg.interp_c},
                                                 {"d", cfg.interp_d},
                                                 {"l_max", cfg.interp_lmax}}}};
  }
  j["fsp_tolerance"] = cfg.fsp_tolerance;
  j["sampler"] = ojson{{"num_particles", cfg.sampler.num_particles},
                       {"kappa", cfg.sampler.kappa},
                       {"kappa_cross", cfg.sampler.kappa_cross},
                       {"correlation_target", cfg.sampler.corr_target},
                       {"max_sweep_iters", cfg.sampler.max_sweep_iters},
                       {"n_it", cfg.sampler.n_it},
                       {"max_levels", cfg.sampler.max_levels},
                       {"scale_eta", cfg.sampler.scale_eta}};
  if (cfg.sampler.kappa_bridge > 0.0)
    j["sampler"]["kappa_bridge"] = cfg.sampler.kappa_bridge;
  j["strategy"] = cfg.strategy;
  j["integrator"] =
      ojson{{"abs_tol", cfg.integ.abs_tol},
            {"rel_tol", cfg.integ.rel_tol},
            {"krylov_basis", cfg.integ.krylov_basis},
            {"max_step", std::isfinite(cfg.integ.max_step) ? cfg.integ.max_step : 0.0}};
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["output_dir"] = cfg.output_dir;
  if (cfg.solve.present)
    j["solve"] = ojson{{"theta", cfg.solve.theta},
                       {"bound", cfg.solve.bound},
                       {"times", cfg.solve.times}};
  if (cfg.simulate.present) {
    j["simulate"] = ojson{{"theta", cfg.simulate.theta},
                          {"times", cfg.simulate.times},
                          {"n_cells", cfg.simulate.n_cells},
                          {"observed_species", cfg.simulate.observed_species}};
    if (!cfg.simulate.freeze_bound.empty())
      j["simulate"]["freeze_bound"] = cfg.simulate.freeze_bound;
  }
  return j.dump(2) + "\n";
}

ModelHierarchy make_hierarchy(const RunConfig& cfg, const ReactionNetwork& net) {
  ModelHierarchy h;
  if (!cfg.explicit_bounds.empty()) {
    h.bounds = cfg.explicit_bounds;
  } else if (cfg.interp_lmax >= 0) {
    h = hierarchy_from_interpolation(cfg.interp_c, cfg.interp_d, cfg.interp_lmax);
  } else {
    throw ConfigError("config has no hierarchy (explicit bounds or interpolation rule)");
  }
  h.fsp_tol.assign(static_cast<size_t>(h.levels()), cfg.fsp_tolerance);
  h.validate(net.num_species());
  return h;
}

Eigen::VectorXd theta_log10_from_map(const ReactionNetwork& net,
                                     const std::map<std::string, double>& vals) {
  for (const auto& kv : vals)
    if (net.param_index(kv.first) < 0)
      throw ConfigError("theta names unknown parameter '" + kv.first + "'");
  Eigen::VectorXd th(net.num_params());
  for (int i = 0; i < net.num_params(); ++i) {
    auto it = vals.find(net.parameters[static_cast<size_t>(i)].name);
    if (it == vals.end())
      throw ConfigError("theta missing parameter '" +
                        net.parameters[static_cast<size_t>(i)].name + "'");
    if (!(it->second > 0.0))
      throw ConfigError("theta." + it->first + " must be a positive rate");
    th[i] = std::log10(it->second);
  }
  return th;
}

std::string samples_csv_text(const ReactionNetwork& net,
                             const std::vector<Particle>& pop) {
  std::string out;
  for (int i = 0; i < net.num_params(); ++i) {
    if (i) out += ',';
    out += "log10_" + net.parameters[static_cast<size_t>(i)].name;
  }
  out += ",log_like,log_prior\n";
  for (const Particle& p : pop) {
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) {
      if (i) out += ',';
      out += format_g17(p.theta[i]);
    }
    out += ',';
    out += format_g17(p.log_like);
    out += ',';
    out += format_g17(p.log_prior);
    out += '\n';
  }
  return out;
}

namespace {

ojson level_json(const LevelRecord& r) {
  ojson o;
  o["level"] = r.level;
  o["beta"] = r.beta;
  o["fidelity"] = r.fidelity;
  o["delta_beta"] = r.delta_beta;
  o["ess"] = r.ess;
  o["cov"] = r.cov;
  o["acceptance"] = r.acceptance;
  o["sweep_iters"] = r.sweep_iters;
  o["wall_time"] = r.wall_time;
  o["strategy_decision"] = r.strategy_decision;
  o["it_criterion_value"] = r.it_criterion_value;  // NaN serializes as null
  o["cross_cov"] = r.cross_cov;
  o["log_c_l"] = r.log_c_l;
  return o;
}

}  // namespace

std::string level_log_text(const std::vector<LevelRecord>& levels) {
  std::string out;
  for (const LevelRecord& r : levels) {
    out += level_json(r).dump();
    out += '\n';
  }
  return out;
}

std::string report_json_text(const RunConfig& cfg, const RunResult& res,
                             const std::vector<long long>& solve_counts,
                             bool success, double wall_seconds) {
  ojson j;
  j["format_version"] = kFormatVersion;
  j["success"] = success;
  j["strategy"] = cfg.strategy;
  j["seed"] = cfg.seed;
  j["log_evidence"] = res.log_evidence;
  j["log_evidence_sigma"] = res.log_evidence_sigma;
  j["wall_time"] = wall_seconds;
  j["full_model_solves"] = solve_counts.empty() ? 0 : solve_counts.back();
  j["per_fidelity_solve_counts"] = solve_counts;
  ojson lv = ojson::array();
  for (const LevelRecord& r : res.levels) lv.push_back(level_json(r));
  j["levels"] = lv;
  j["resolved_config"] = ojson::parse(resolved_config_json(cfg));
  return j.dump(2) + "\n";
}

std::string distribution_csv_text(const TruncatedStateSpace& space,
                                  const Eigen::VectorXd& probs,
                                  const std::vector<std::string>& species) {
  std::string out;
  for (size_t i = 0; i < species.size(); ++i) {
    if (i) out += ',';
    out += species[i];
  }
  out += ",probability\n";
  for (int s = 0; s < space.size(); ++s) {
    const int32_t* x = space.state_ptr(s);
    for (int i = 0; i < space.num_species(); ++i) {
      if (i) out += ',';
      out += std::to_string(x[i]);
    }
    out += ',';
    out += format_g17(s < probs.size() ? probs[s] : 0.0);
    out += '\n';
  }
  return out;
}

std::string simulate_manifest_text(const RunConfig& cfg) {
  ojson j;
  j["format_version"] = kFormatVersion;
  j["model"] = cfg.model_path;
  j["theta"] = cfg.simulate.theta;
  j["seed"] = cfg.seed;
  j["times"] = cfg.simulate.times;
  j["n_cells"] = cfg.simulate.n_cells;
  j["observed_species"] = cfg.simulate.observed_species;
  j["dataset"] = "dataset.csv";
  return j.dump(2) + "\n";
}

}  // namespace mfst
