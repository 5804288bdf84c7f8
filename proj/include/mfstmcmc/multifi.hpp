#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mfstmcmc/likelihood.hpp"
#include "mfstmcmc/rng.hpp"
#include "mfstmcmc/stmcmc.hpp"

namespace mfst {

// Annealing/bridging schedule policies. "full" ignores the surrogate hierarchy
// and tempers at the top fidelity only; the other three start at the coarsest
// model and decide per level whether to sharpen beta or move up the hierarchy.
enum class Strategy { FullFidelityOnly, EssBridge, ItBridge, TunedItBridge };

Strategy parse_strategy(const std::string& name);
std::string strategy_name(Strategy s);

struct PriorSpec {
  std::function<double(const Eigen::VectorXd&)> log_density;
  std::function<Eigen::VectorXd(RngStream&)> sample;
};

struct SamplerConfig {
  int num_particles = 512;
  double kappa = 1.0;         // target COV for the tempering step size
  double kappa_bridge = 0.0;  // ESS-strategy bridge threshold; 0 = use kappa
  double kappa_cross = 1.0;   // target COV for the tuned cross-fidelity jump
  double corr_target = 0.6;
  int max_sweep_iters = 100;
  double scale_eta = 1.0;
  int n_it = 0;  // particles used for the information criterion; 0 = all
  int max_levels = 200;
  int workers = 1;
};

struct LevelRecord;
using LevelCallback = std::function<void(const LevelRecord&)>;

struct LevelRecord {
  int level = 0;
  double beta = 0.0;  // after the transition
  int fidelity = 1;   // after the transition
  double delta_beta = 0.0;
  double ess = 0.0;
  double cov = 0.0;
  double acceptance = 0.0;
  int sweep_iters = 0;
  double wall_time = 0.0;
  std::string strategy_decision;  // "temper" or "bridge"
  double it_criterion_value = std::numeric_limits<double>::quiet_NaN();
  double cross_cov = std::numeric_limits<double>::quiet_NaN();
  double log_c_l = 0.0;
};

struct RunResult {
  std::vector<Particle> posterior;
  double log_evidence = 0.0;
  double log_evidence_sigma = 0.0;
  std::vector<LevelRecord> levels;
  double final_scale = 0.0;
};

// Signed information criterion deciding whether tempering the surrogate by
// delta_beta still gains information about the top-fidelity posterior.
// Negative means the surrogate ranks parameters in a way the full model
// disagrees with, so bridging is preferred. Value is meaningful up to a
// positive constant; only the sign is used.
double it_criterion(const std::vector<double>& log_like_full,
                    const std::vector<double>& log_like_m, double beta,
                    double delta_beta);

// Largest beta' in [0,1] where the cross-fidelity weights
// w_i = exp(beta' L_{m+1,i} - beta L_{m,i}) hit the target COV; falls back to
// the COV-minimizing beta' on the scan grid when no root exists.
double tune_beta_cross_fidelity(const std::vector<double>& log_like_m,
                                const std::vector<double>& log_like_m1, double beta,
                                double kappa_cross, double* cov_at_result = nullptr);

// COV of exp(beta_new*L1 - beta*L0) over the population, pairwise-excluding
// non-finite L0 entries. Shared by the ESS decision and the tuned jump.
double cross_weight_cov(const std::vector<double>& log_like_old,
                        const std::vector<double>& log_like_new, double beta,
                        double beta_new);

// on_level, when set, sees each completed level immediately; aborted runs
// keep the levels already reported.
RunResult run_multifidelity(LikelihoodModel& like, const PriorSpec& prior,
                            Strategy strategy, const SamplerConfig& cfg,
                            uint64_t seed, const LevelCallback& on_level = {});

// Top-fidelity-only tempering baseline; identical engine with the hierarchy
// collapsed to its finest member.
RunResult run_fixed_fidelity(LikelihoodModel& like, const PriorSpec& prior,
                             const SamplerConfig& cfg, uint64_t seed,
                             const LevelCallback& on_level = {});

}  // namespace mfst
