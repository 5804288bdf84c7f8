#include "mfstmcmc/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>
#include <thread>

#include "mfstmcmc/errors.hpp"

namespace mfst {

void ModelHierarchy::validate(int num_species) const {
  if (bounds.empty()) throw ConfigError("hierarchy has no levels");
  for (const auto& b : bounds)
    if (static_cast<int>(b.size()) != num_species)
      throw ConfigError("hierarchy bound size does not match species count");
  for (size_t l = 1; l < bounds.size(); ++l)
    for (size_t i = 0; i < bounds[l].size(); ++i)
      if (bounds[l][i] < bounds[l - 1][i])
        throw ConfigError("hierarchy bounds must be nested (level " +
                          std::to_string(l + 1) + ")");
  if (fsp_tol.size() != bounds.size())
    throw ConfigError("hierarchy needs one fsp tolerance per level");
}

ModelHierarchy hierarchy_from_interpolation(const std::vector<int32_t>& c,
                                            const std::vector<int32_t>& d, int l_max) {
  if (c.size() != d.size()) throw ConfigError("hierarchy interpolation: |c| != |d|");
  if (l_max < 0) throw ConfigError("hierarchy interpolation: l_max must be >= 0");
  ModelHierarchy h;
  for (int l = 1; l <= l_max + 2; ++l) {
    FidelityBound b(c.size());
    for (size_t i = 0; i < c.size(); ++i) {
      double v = c[i] + (l - 1) * (static_cast<double>(d[i]) - c[i]) / (l_max + 1);
      b[i] = static_cast<int32_t>(std::floor(v));
    }
    h.bounds.push_back(std::move(b));
  }
  h.fsp_tol.assign(h.bounds.size(), 1e-8);
  return h;
}

void parallel_for(long long n, int workers, const std::function<void(long long)>& fn) {
  if (n <= 0) return;
  int w = static_cast<int>(std::max<long long>(1, std::min<long long>(workers, n)));
  if (w == 1) {
    for (long long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(w);
  long long chunk = (n + w - 1) / w;
  std::exception_ptr first_error;
  std::mutex err_mu;
  for (int t = 0; t < w; ++t) {
    long long lo = t * chunk, hi = std::min(n, lo + chunk);
    pool.emplace_back([lo, hi, &fn, &first_error, &err_mu] {
      try {
        for (long long i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct ObsKeyHash {
  size_t operator()(const State& v) const {
    uint64_t h = 1469598103934665603ull;
    for (int32_t x : v) {
      h ^= static_cast<uint32_t>(x);
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
};

}  // namespace

double surrogate_log_likelihood(const ReactionNetwork& net,
                                const Eigen::VectorXd& theta_log10,
                                const SnapshotDataset& data, int level,
                                const ModelHierarchy& hier,
                                const LikelihoodConfig& cfg) {
  if (level < 1 || level > hier.levels())
    throw ConfigError("likelihood level out of range");
  const FidelityBound& b = hier.bounds[static_cast<size_t>(level - 1)];
  FspSolveOptions opts = cfg.fsp;
  opts.fsp_tol = hier.fsp_tol[static_cast<size_t>(level - 1)];

  FspSolution sol = solve_cme_adaptive(net, theta_log10, b, data.times, opts);

  std::vector<int> obs = data.observed_indices(net);
  FidelityBound b_obs(obs.size());
  for (size_t k = 0; k < obs.size(); ++k) b_obs[k] = b[obs[k]];

  double ll = 0.0;
  for (size_t ti = 0; ti < data.times.size(); ++ti) {
    // marginal over the hidden coordinates at this time
    std::unordered_map<State, double, ObsKeyHash> marginal;
    const Eigen::VectorXd& p = sol.dist[ti];
    State key(obs.size());
    for (int s = 0; s < sol.space->size(); ++s) {
      const int32_t* x = sol.space->state_ptr(s);
      for (size_t k = 0; k < obs.size(); ++k) key[k] = x[obs[k]];
      marginal[key] += p[s];
    }
    for (const State& c : data.cells[ti]) {
      for (size_t k = 0; k < obs.size(); ++k)
        key[k] = std::min(c[k], b_obs[k]);
      auto it = marginal.find(key);
      // clamp tiny integrator negatives, then floor: observations with no
      // in-space mass contribute log(prob_floor)
      double prob = it == marginal.end() ? 0.0 : std::max(it->second, 0.0);
      ll += std::log(std::max(prob, cfg.prob_floor));
    }
  }
  return ll;
}

double full_log_likelihood(const ReactionNetwork& net,
                           const Eigen::VectorXd& theta_log10,
                           const SnapshotDataset& data, const ModelHierarchy& hier,
                           const LikelihoodConfig& cfg) {
  return surrogate_log_likelihood(net, theta_log10, data, hier.levels(), hier, cfg);
}

CmeLikelihood::CmeLikelihood(ReactionNetwork net, SnapshotDataset data,
                             ModelHierarchy hier, LikelihoodConfig cfg)
    : net_(std::move(net)),
      data_(std::move(data)),
      hier_(std::move(hier)),
      cfg_(cfg),
      solves_(static_cast<size_t>(hier_.levels()), 0) {
  hier_.validate(net_.num_species());
  data_.observed_indices(net_);  // fail early on unknown species
}

namespace {

std::string cache_key(const Eigen::VectorXd& theta, int level) {
  std::string key(sizeof(int) + sizeof(double) * static_cast<size_t>(theta.size()), '\0');
  std::memcpy(key.data(), &level, sizeof(int));
  std::memcpy(key.data() + sizeof(int), theta.data(),
              sizeof(double) * static_cast<size_t>(theta.size()));
  return key;
}

}  // namespace

std::vector<double> CmeLikelihood::eval_batch(const std::vector<Eigen::VectorXd>& thetas,
                                              int level, int workers) {
  std::vector<double> out(thetas.size());
  std::vector<std::string> keys(thetas.size());
  // dedupe against the cache and within the batch; coordinator thread only
  std::vector<long long> job_particle;
  std::unordered_map<std::string, size_t> pending;
  for (size_t i = 0; i < thetas.size(); ++i) {
    keys[i] = cache_key(thetas[i], level);
    if (cache_.count(keys[i]) || pending.count(keys[i])) continue;
    pending.emplace(keys[i], job_particle.size());
    job_particle.push_back(static_cast<long long>(i));
  }

  std::vector<double> job_result(job_particle.size());
  std::vector<char> job_capacity(job_particle.size(), 0);
  parallel_for(static_cast<long long>(job_particle.size()), workers, [&](long long j) {
    const Eigen::VectorXd& theta = thetas[static_cast<size_t>(job_particle[j])];
    try {
      job_result[j] = surrogate_log_likelihood(net_, theta, data_, level, hier_, cfg_);
    } catch (const CapacityError&) {
      job_result[j] = -std::numeric_limits<double>::infinity();
      job_capacity[j] = 1;
    }
  });

  for (size_t j = 0; j < job_particle.size(); ++j) {
    cache_[keys[static_cast<size_t>(job_particle[j])]] = job_result[j];
    if (job_capacity[j]) ++capacity_failures_;
  }
  solves_[static_cast<size_t>(level - 1)] += static_cast<long long>(job_particle.size());
  for (size_t i = 0; i < thetas.size(); ++i) out[i] = cache_.at(keys[i]);
  return out;
}

}  // namespace mfst
