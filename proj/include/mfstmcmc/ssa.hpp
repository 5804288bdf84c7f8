#pragma once
// Stochastic simulation (direct method) used as an independent cross-check of
// the FSP solutions and as the synthetic-data generator. The bounded variant
// runs the surrogate model: once any species exceeds its bound the state is
// permanently frozen, mirroring the absorbing exterior of the truncated CME.
// Networks with time-varying rates are handled exactly by thinning against
// the constant upper bound of each rate.

#include <vector>

#include "mfstmcmc/dataset.hpp"
#include "mfstmcmc/model.hpp"
#include "mfstmcmc/rng.hpp"
#include "mfstmcmc/state_space.hpp"

namespace mfst {

struct SsaTrajectory {
  std::vector<double> times;   // jump times, starting at 0
  std::vector<State> states;   // state after each jump; states[0] is initial
  bool frozen = false;

  const State& state_at(double t) const;  // right-continuous lookup
};

SsaTrajectory ssa_simulate(const ReactionNetwork& net,
                           const Eigen::VectorXd& theta_log10, double t_end,
                           RngStream& rng, const FidelityBound* freeze_bound = nullptr);

// Independent cells per measurement time; stream per (seed, time, cell) so
// generation order and worker count cannot change the data.
SnapshotDataset generate_snapshot_dataset(const ReactionNetwork& net,
                                          const Eigen::VectorXd& theta_log10,
                                          const std::vector<double>& times,
                                          int n_cells,
                                          const std::vector<std::string>& observed,
                                          uint64_t seed, int workers = 1,
                                          const FidelityBound* freeze_bound = nullptr);

// Normalized histogram of full-state samples on a rectangle space, samples
// clamped to the bound coordinatewise.
Eigen::VectorXd empirical_histogram(const std::vector<State>& samples,
                                    const TruncatedStateSpace& space);

}  // namespace mfst
