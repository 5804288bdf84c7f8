#pragma once
// Run configuration schema (JSON) and the writers for every artifact the CLI
// produces: sample CSVs, level logs (JSON lines), report/manifest JSON, and
// per-time distribution tables. All schemas carry format_version.

#include <map>
#include <string>
#include <vector>

#include "mfstmcmc/integrator.hpp"
#include "mfstmcmc/likelihood.hpp"
#include "mfstmcmc/model.hpp"
#include "mfstmcmc/multifi.hpp"
#include "mfstmcmc/state_space.hpp"

namespace mfst {

inline constexpr int kFormatVersion = 1;

struct SolveSection {
  bool present = false;
  std::map<std::string, double> theta;  // linear-space rates by parameter name
  FidelityBound bound;
  std::vector<double> times;
};

struct SimulateSection {
  bool present = false;
  std::map<std::string, double> theta;
  std::vector<double> times;
  int n_cells = 0;
  std::vector<std::string> observed_species;
  FidelityBound freeze_bound;  // empty = simulate the untruncated network
};

struct RunConfig {
  std::string model_path;
  std::string dataset_path;
  std::vector<FidelityBound> explicit_bounds;
  std::vector<int32_t> interp_c, interp_d;
  int interp_lmax = -1;  // >= 0 when the interpolation rule defines the hierarchy
  double fsp_tolerance = 1e-8;
  SamplerConfig sampler;
  std::string strategy = "full";
  IntegratorConfig integ;
  uint64_t seed = 0;
  int workers = 1;
  std::string output_dir = ".";
  SolveSection solve;
  SimulateSection simulate;
};

// Parses and validates; relative model/dataset paths resolve against base_dir.
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir);
RunConfig load_run_config(const std::string& path);

// MFST_SEED, MFST_WORKERS, MFST_STRATEGY, MFST_OUTPUT_DIR beat the file;
// command-line flags beat both.
void apply_env_overrides(RunConfig& cfg);

// Canonical re-serialization with resolved absolute paths; embedded in
// reports so a run can be reproduced from its own report.
std::string resolved_config_json(const RunConfig& cfg);

ModelHierarchy make_hierarchy(const RunConfig& cfg, const ReactionNetwork& net);

// Linear-space name->value map to the sampler's log10 vector, in the model's
// parameter order. Missing, unknown, or non-positive entries are errors.
Eigen::VectorXd theta_log10_from_map(const ReactionNetwork& net,
                                     const std::map<std::string, double>& vals);

std::string format_g17(double v);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// columns: log10_<param>..., log_like, log_prior
std::string samples_csv_text(const ReactionNetwork& net,
                             const std::vector<Particle>& pop);

// one JSON object per line, one line per level
std::string level_log_text(const std::vector<LevelRecord>& levels);

std::string report_json_text(const RunConfig& cfg, const RunResult& res,
                             const std::vector<long long>& solve_counts,
                             bool success, double wall_seconds);

// state coordinates + probability, one row per state
std::string distribution_csv_text(const TruncatedStateSpace& space,
                                  const Eigen::VectorXd& probs,
                                  const std::vector<std::string>& species);

std::string simulate_manifest_text(const RunConfig& cfg);

}  // namespace mfst
