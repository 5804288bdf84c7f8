#pragma once
// Sequential tempered MCMC population machinery: importance-weight statistics
// between adjacent (beta, fidelity) levels, the COV-matched annealing-step
// search, systematic resampling, and the adapted random-walk MH sweep that
// rejuvenates the population after each resample. Everything operates in
// log10 parameter space.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mfstmcmc/likelihood.hpp"
#include "mfstmcmc/model.hpp"
#include "mfstmcmc/rng.hpp"

namespace mfst {

struct Particle {
  Eigen::VectorXd theta;  // log10
  double log_like = 0.0;  // at the population's current fidelity
  double log_prior = 0.0;
};

struct WeightStats {
  Eigen::VectorXd log_w;   // unnormalized
  Eigen::VectorXd norm_w;  // sums to 1
  double cov = 0.0;        // std/mean of the unnormalized weights
  double ess = 0.0;        // N / (1 + cov^2)
  double log_mean = 0.0;   // log of the mean unnormalized weight
  double var_log_mean = 0.0;  // delta-method variance of log_mean
};

WeightStats compute_weight_stats(const Eigen::VectorXd& log_w);

// Importance weights for moving the population from (beta, same model) to
// beta_new, using its current log-likelihoods.
Eigen::VectorXd tempering_log_weights(const std::vector<Particle>& pop, double beta,
                                      double beta_new);

// Cross-fidelity weights beta_new * L_new - beta * L_old.
Eigen::VectorXd bridging_log_weights(const std::vector<Particle>& pop, double beta,
                                     double beta_new,
                                     const std::vector<double>& log_like_new);

// Largest step with COV(exp(dbeta * L)) = kappa, capped at 1 - beta; bisection
// on the monotone COV to relative tolerance 1e-6.
double tune_delta_beta(const Eigen::VectorXd& log_likes, double beta, double kappa);

// Parent index per offspring slot; counts differ from n_out * w_i by less
// than one. One uniform per call. n_out < 0 keeps the population size.
std::vector<int> systematic_resample(const Eigen::VectorXd& norm_w, RngStream& rng,
                                     int n_out = -1);

struct ProposalState {
  Eigen::MatrixXd cov;    // weighted population covariance (regularized)
  Eigen::MatrixXd chol;   // lower factor of scale^2 * cov
  double scale = 0.0;
};

// Weighted sample covariance; singular directions get 1e-10 * trace/d on the
// diagonal. `scale` carries over from the caller (initially 2.38/sqrt(d)).
ProposalState adapt_proposal(const std::vector<Particle>& pop,
                             const Eigen::VectorXd& norm_w, double scale);

double update_scale(double scale, double acceptance, double eta = 1.0);

using LogPriorFn = std::function<double(const Eigen::VectorXd&)>;
using LogLikeFn = std::function<double(const Eigen::VectorXd&)>;

struct MhResult {
  Particle particle;
  bool accepted = false;
};

// One Gaussian random-walk Metropolis step on pi_beta; candidates with -inf
// log-likelihood are always rejected.
MhResult mh_step(const Particle& p, double beta, const LogPriorFn& log_prior,
                 const LogLikeFn& log_like, const ProposalState& prop, RngStream& rng);

struct SweepStats {
  int iters = 0;
  double acceptance = 0.0;
  double max_abs_corr = 1.0;  // at termination
  // chain-mean lag-k autocorrelation of the first parameter, k = 1..
  std::vector<double> lag_autocorr;
};

using BatchLogLikeFn =
    std::function<std::vector<double>(const std::vector<Eigen::VectorXd>&)>;

// Runs all chains in lockstep until the per-parameter correlation between
// sweep-start and current positions drops to `corr_target` (or max_iters).
// Candidate likelihoods are evaluated in batches; each chain owns its stream,
// so results do not depend on worker count.
SweepStats mcmc_sweep(std::vector<Particle>& pop, double beta,
                      const LogPriorFn& log_prior, const BatchLogLikeFn& batch_like,
                      const ProposalState& prop, std::vector<RngStream>& streams,
                      double corr_target = 0.6, int max_iters = 100);

}  // namespace mfst
