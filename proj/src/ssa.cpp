#include "mfstmcmc/ssa.hpp"

#include <algorithm>
#include <cmath>

#include "mfstmcmc/errors.hpp"
#include "mfstmcmc/likelihood.hpp"

namespace mfst {

const State& SsaTrajectory::state_at(double t) const {
  // last jump at or before t
  auto it = std::upper_bound(times.begin(), times.end(), t);
  size_t idx = static_cast<size_t>(it - times.begin());
  if (idx == 0) return states[0];
  return states[idx - 1];
}

namespace {

bool exceeds_bound(const State& x, const FidelityBound& b) {
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i] > b[i]) return true;
  return false;
}

// constant upper bound of a reaction's scalar rate; for the time-varying max
// kind the rate never exceeds its base parameter since the signal term only
// subtracts
double rate_upper_bound(const Reaction& r, const Eigen::VectorXd& lin) {
  if (const auto* tv = std::get_if<TimeVaryingMaxProp>(&r.prop))
    return lin[tv->base_param];
  return 1.0;
}

}  // namespace

SsaTrajectory ssa_simulate(const ReactionNetwork& net,
                           const Eigen::VectorXd& theta_log10, double t_end,
                           RngStream& rng, const FidelityBound* freeze_bound) {
  const Eigen::VectorXd lin = to_linear(theta_log10);
  const size_t nr = net.reactions.size();
  const bool tv = net.time_varying();

  SsaTrajectory traj;
  // initial state drawn from the model's initial distribution
  {
    double u = rng.uniform();
    double acc = 0.0;
    const State* chosen = &net.initial.back().first;
    for (const auto& [x, prob] : net.initial) {
      acc += prob;
      if (u < acc) {
        chosen = &x;
        break;
      }
    }
    traj.times.push_back(0.0);
    traj.states.push_back(*chosen);
  }

  State x = traj.states[0];
  double t = 0.0;
  if (freeze_bound && exceeds_bound(x, *freeze_bound)) {
    traj.frozen = true;
    return traj;
  }

  std::vector<double> alpha(nr), alpha_max(nr);
  while (true) {
    double total_max = 0.0;
    for (size_t j = 0; j < nr; ++j) {
      double sf = state_factor(net.reactions[j], x, lin);
      alpha_max[j] = sf * rate_upper_bound(net.reactions[j], lin);
      total_max += alpha_max[j];
    }
    if (total_max <= 0.0) break;  // absorbing state

    double t_next = t + rng.exponential(total_max);
    if (t_next > t_end) break;
    t = t_next;

    size_t fired = nr;
    if (!tv) {
      double u = rng.uniform() * total_max;
      double acc = 0.0;
      for (size_t j = 0; j < nr; ++j) {
        acc += alpha_max[j];
        if (u < acc) {
          fired = j;
          break;
        }
      }
      if (fired == nr) fired = nr - 1;  // guard against roundoff at the top edge
    } else {
      // thinning: accept the candidate with probability alpha(t)/alpha_max
      double total = 0.0;
      for (size_t j = 0; j < nr; ++j) {
        alpha[j] = eval_propensity(net.reactions[j], x, t, lin);
        total += alpha[j];
      }
      if (rng.uniform() * total_max >= total) continue;  // phantom jump
      double u = rng.uniform() * total;
      double acc = 0.0;
      for (size_t j = 0; j < nr; ++j) {
        acc += alpha[j];
        if (u < acc) {
          fired = j;
          break;
        }
      }
      if (fired == nr) fired = nr - 1;
    }

    x = apply_stoichiometry(net.reactions[fired], x);
    traj.times.push_back(t);
    traj.states.push_back(x);
    if (freeze_bound && exceeds_bound(x, *freeze_bound)) {
      traj.frozen = true;
      break;
    }
  }
  return traj;
}

SnapshotDataset generate_snapshot_dataset(const ReactionNetwork& net,
                                          const Eigen::VectorXd& theta_log10,
                                          const std::vector<double>& times,
                                          int n_cells,
                                          const std::vector<std::string>& observed,
                                          uint64_t seed, int workers,
                                          const FidelityBound* freeze_bound) {
  SnapshotDataset data;
  data.observed_species = observed;
  data.times = times;
  std::sort(data.times.begin(), data.times.end());
  std::vector<int> obs;
  for (const auto& name : observed) {
    int i = net.species_index(name);
    if (i < 0) throw ConfigError("cannot observe unknown species: " + name);
    obs.push_back(i);
  }
  data.cells.assign(data.times.size(), {});
  for (auto& c : data.cells) c.resize(static_cast<size_t>(n_cells));

  long long total = static_cast<long long>(data.times.size()) * n_cells;
  parallel_for(total, workers, [&](long long k) {
    size_t ti = static_cast<size_t>(k / n_cells);
    size_t cell = static_cast<size_t>(k % n_cells);
    RngStream rng = RngStream::derive(seed, StreamPurpose::SsaCell, ti, cell);
    SsaTrajectory traj =
        ssa_simulate(net, theta_log10, data.times[ti], rng, freeze_bound);
    const State& x = traj.states.back();
    State o(obs.size());
    for (size_t q = 0; q < obs.size(); ++q) o[q] = x[obs[q]];
    data.cells[ti][cell] = std::move(o);
  });
  return data;
}

Eigen::VectorXd empirical_histogram(const std::vector<State>& samples,
                                    const TruncatedStateSpace& space) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(space.size());
  for (const State& s : samples) {
    State c = s;
    for (size_t i = 0; i < c.size(); ++i)
      c[i] = std::min(c[i], space.bound()[i]);
    int idx = space.index_of(c);
    if (idx < 0) throw ConfigError("histogram state missing from space");
    h[idx] += 1.0;
  }
  if (!samples.empty()) h /= static_cast<double>(samples.size());
  return h;
}

}  // namespace mfst
