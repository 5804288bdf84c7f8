#include "mfstmcmc/multifi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mfstmcmc/errors.hpp"

namespace mfst {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();
}  // namespace

Strategy parse_strategy(const std::string& name) {
  if (name == "full") return Strategy::FullFidelityOnly;
  if (name == "ess") return Strategy::EssBridge;
  if (name == "it") return Strategy::ItBridge;
  if (name == "tuned-it") return Strategy::TunedItBridge;
  throw ConfigError("unknown strategy '" + name +
                    "' (expected full, ess, it, or tuned-it)");
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::FullFidelityOnly: return "full";
    case Strategy::EssBridge: return "ess";
    case Strategy::ItBridge: return "it";
    case Strategy::TunedItBridge: return "tuned-it";
  }
  return "?";
}

double it_criterion(const std::vector<double>& log_like_full,
                    const std::vector<double>& log_like_m, double beta,
                    double delta_beta) {
  if (log_like_full.size() != log_like_m.size())
    throw SamplerError("it_criterion: vector size mismatch");
  const size_t n = log_like_m.size();

  // keep only pairs finite in both models; a -inf in either says the point is
  // outside one model's support and carries no ranking information
  std::vector<size_t> keep;
  keep.reserve(n);
  for (size_t i = 0; i < n; ++i)
    if (std::isfinite(log_like_full[i]) && std::isfinite(log_like_m[i]))
      keep.push_back(i);
  if (keep.empty()) throw SamplerError("it_criterion: no finite likelihood pairs");

  double log_r_max = kNegInf;
  for (size_t i : keep)
    log_r_max = std::max(log_r_max, log_like_full[i] - beta * log_like_m[i]);

  double sum_r = 0.0, term1 = 0.0;
  double shift = kNegInf;
  for (size_t i : keep) shift = std::max(shift, delta_beta * log_like_m[i]);
  double sum_exp = 0.0;
  for (size_t i : keep) {
    double r = std::exp(log_like_full[i] - beta * log_like_m[i] - log_r_max);
    sum_r += r;
    term1 += r * (delta_beta * log_like_m[i]);
    sum_exp += std::exp(delta_beta * log_like_m[i] - shift);
  }
  double log_mean = shift + std::log(sum_exp / static_cast<double>(keep.size()));
  return term1 - sum_r * log_mean;
}

double cross_weight_cov(const std::vector<double>& log_like_old,
                        const std::vector<double>& log_like_new, double beta,
                        double beta_new) {
  if (log_like_old.size() != log_like_new.size())
    throw SamplerError("cross_weight_cov: vector size mismatch");
  std::vector<double> lw;
  lw.reserve(log_like_old.size());
  for (size_t i = 0; i < log_like_old.size(); ++i) {
    if (!std::isfinite(log_like_old[i])) continue;  // no mass under current target
    double a = beta_new == 0.0 ? 0.0 : beta_new * log_like_new[i];
    double b = beta == 0.0 ? 0.0 : beta * log_like_old[i];
    lw.push_back(a - b);
  }
  if (lw.empty()) throw SamplerError("cross_weight_cov: empty population");
  double mx = kNegInf;
  for (double v : lw) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return kPosInf;
  double s = 0.0, s2 = 0.0;
  for (double v : lw) {
    double w = std::exp(v - mx);
    s += w;
    s2 += w * w;
  }
  double n = static_cast<double>(lw.size());
  double mean = s / n;
  double var = s2 / n - mean * mean;
  if (var < 0.0) var = 0.0;
  return std::sqrt(var) / mean;
}

double tune_beta_cross_fidelity(const std::vector<double>& log_like_m,
                                const std::vector<double>& log_like_m1, double beta,
                                double kappa_cross, double* cov_at_result) {
  const int grid_n = 1000;
  std::vector<double> covs(grid_n + 1);
  for (int i = 0; i <= grid_n; ++i)
    covs[static_cast<size_t>(i)] = cross_weight_cov(
        log_like_m, log_like_m1, beta, static_cast<double>(i) / grid_n);

  // scan from the top for the largest crossing of the target
  for (int i = grid_n; i >= 1; --i) {
    double chi = covs[static_cast<size_t>(i)] - kappa_cross;
    double clo = covs[static_cast<size_t>(i - 1)] - kappa_cross;
    if (chi == 0.0) {
      if (cov_at_result) *cov_at_result = kappa_cross;
      return static_cast<double>(i) / grid_n;
    }
    if (!std::isfinite(chi) || !std::isfinite(clo)) continue;
    if ((clo <= 0.0 && chi > 0.0) || (clo >= 0.0 && chi < 0.0)) {
      double lo = static_cast<double>(i - 1) / grid_n;
      double hi = static_cast<double>(i) / grid_n;
      bool rising = clo <= 0.0;
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        double c = cross_weight_cov(log_like_m, log_like_m1, beta, mid) - kappa_cross;
        if ((c > 0.0) == rising)
          hi = mid;
        else
          lo = mid;
      }
      double root = 0.5 * (lo + hi);
      if (cov_at_result)
        *cov_at_result = cross_weight_cov(log_like_m, log_like_m1, beta, root);
      return root;
    }
  }

  // no root: fall back to the COV-minimizing point on the grid
  int best = -1;
  for (int i = 0; i <= grid_n; ++i) {
    if (!std::isfinite(covs[static_cast<size_t>(i)])) continue;
    if (best < 0 || covs[static_cast<size_t>(i)] < covs[static_cast<size_t>(best)])
      best = i;
  }
  if (best < 0) throw SamplerError("tune_beta_cross_fidelity: COV not finite anywhere");
  if (cov_at_result) *cov_at_result = covs[static_cast<size_t>(best)];
  return static_cast<double>(best) / grid_n;
}

namespace {

std::vector<Eigen::VectorXd> thetas_of(const std::vector<Particle>& pop) {
  std::vector<Eigen::VectorXd> th(pop.size());
  for (size_t i = 0; i < pop.size(); ++i) th[i] = pop[i].theta;
  return th;
}

Eigen::VectorXd likes_of(const std::vector<Particle>& pop) {
  Eigen::VectorXd v(pop.size());
  for (size_t i = 0; i < pop.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = pop[i].log_like;
  return v;
}

struct Transition {
  double beta_new = 0.0;
  int m_new = 1;
  bool bridge = false;
  double it_value = std::numeric_limits<double>::quiet_NaN();
  double cross_cov = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> like_new;  // filled when m_new > m (bridge)
};

}  // namespace

RunResult run_multifidelity(LikelihoodModel& like, const PriorSpec& prior,
                            Strategy strategy, const SamplerConfig& cfg,
                            uint64_t seed, const LevelCallback& on_level) {
  const int K = like.levels();
  const int d = like.dim();
  const int N = cfg.num_particles;
  if (N < d + 2) throw SamplerError("population too small for proposal adaptation");
  if (K < 1) throw SamplerError("empty model hierarchy");

  RngStream prior_stream = RngStream::derive(seed, StreamPurpose::PriorDraw, 0, 0);
  std::vector<Particle> pop(static_cast<size_t>(N));
  for (int i = 0; i < N; ++i) {
    Particle& p = pop[static_cast<size_t>(i)];
    p.theta = prior.sample(prior_stream);
    if (p.theta.size() != d) throw SamplerError("prior sample dimension mismatch");
    p.log_prior = prior.log_density(p.theta);
  }

  int m = strategy == Strategy::FullFidelityOnly ? K : 1;
  double beta = 0.0;
  {
    std::vector<double> l0 = like.eval_batch(thetas_of(pop), m, cfg.workers);
    for (int i = 0; i < N; ++i)
      pop[static_cast<size_t>(i)].log_like = l0[static_cast<size_t>(i)];
  }

  RunResult out;
  double scale = 2.38 / std::sqrt(static_cast<double>(d));
  double evidence_var = 0.0;
  int level = 0;

  while (!(beta >= 1.0 && m == K)) {
    ++level;
    if (level > cfg.max_levels)
      throw SamplerError("annealing did not finish within " +
                         std::to_string(cfg.max_levels) + " levels (beta=" +
                         std::to_string(beta) + ", fidelity=" + std::to_string(m) + ")");
    auto t_start = std::chrono::steady_clock::now();

    Transition tr;
    if (m == K) {
      double db = tune_delta_beta(likes_of(pop), beta, cfg.kappa);
      tr.beta_new = beta + db;
      tr.m_new = K;
    } else if (beta >= 1.0) {
      // surrogate posterior fully tempered, the only move left is up
      tr.bridge = true;
      tr.m_new = m + 1;
      tr.like_new = like.eval_batch(thetas_of(pop), m + 1, cfg.workers);
      tr.beta_new = beta;
      if (strategy == Strategy::TunedItBridge) {
        std::vector<double> cur(pop.size());
        for (size_t i = 0; i < pop.size(); ++i) cur[i] = pop[i].log_like;
        tr.beta_new = tune_beta_cross_fidelity(cur, tr.like_new, beta,
                                               cfg.kappa_cross, &tr.cross_cov);
      }
    } else if (strategy == Strategy::EssBridge) {
      tr.like_new = like.eval_batch(thetas_of(pop), m + 1, cfg.workers);
      std::vector<double> cur(pop.size());
      for (size_t i = 0; i < pop.size(); ++i) cur[i] = pop[i].log_like;
      // hypothetical swap of the surrogate at fixed beta
      tr.cross_cov = cross_weight_cov(cur, tr.like_new, beta, beta);
      double kb = cfg.kappa_bridge > 0.0 ? cfg.kappa_bridge : cfg.kappa;
      if (tr.cross_cov > kb) {
        tr.bridge = true;
        tr.m_new = m + 1;
        tr.beta_new = beta;
      } else {
        tr.like_new.clear();
        double db = tune_delta_beta(likes_of(pop), beta, cfg.kappa);
        tr.beta_new = beta + db;
        tr.m_new = m;
      }
    } else {  // ItBridge, TunedItBridge
      double db = tune_delta_beta(likes_of(pop), beta, cfg.kappa);
      int n_eval = cfg.n_it > 0 ? std::min(cfg.n_it, N) : N;
      std::vector<Eigen::VectorXd> th(static_cast<size_t>(n_eval));
      std::vector<double> lm(static_cast<size_t>(n_eval));
      for (int i = 0; i < n_eval; ++i) {
        th[static_cast<size_t>(i)] = pop[static_cast<size_t>(i)].theta;
        lm[static_cast<size_t>(i)] = pop[static_cast<size_t>(i)].log_like;
      }
      std::vector<double> lk = like.eval_batch(th, K, cfg.workers);
      tr.it_value = it_criterion(lk, lm, beta, db);
      if (tr.it_value >= 0.0) {
        tr.beta_new = beta + db;
        tr.m_new = m;
      } else {
        tr.bridge = true;
        tr.m_new = m + 1;
        tr.like_new = m + 1 == K && n_eval == N
                          ? lk
                          : like.eval_batch(thetas_of(pop), m + 1, cfg.workers);
        tr.beta_new = beta;
        if (strategy == Strategy::TunedItBridge) {
          std::vector<double> cur(pop.size());
          for (size_t i = 0; i < pop.size(); ++i) cur[i] = pop[i].log_like;
          tr.beta_new = tune_beta_cross_fidelity(cur, tr.like_new, beta,
                                                 cfg.kappa_cross, &tr.cross_cov);
        }
      }
    }
    if (1.0 - tr.beta_new < 1e-12) tr.beta_new = 1.0;

    // importance weights for the (beta, m) -> (beta', m') change
    Eigen::VectorXd log_w(N);
    for (int i = 0; i < N; ++i) {
      const Particle& p = pop[static_cast<size_t>(i)];
      double a, b;
      if (tr.bridge) {
        double lnew = tr.like_new[static_cast<size_t>(i)];
        a = tr.beta_new == 0.0 ? 0.0 : tr.beta_new * lnew;
      } else {
        a = tr.beta_new == 0.0 ? 0.0 : tr.beta_new * p.log_like;
      }
      b = beta == 0.0 ? 0.0 : beta * p.log_like;
      log_w[i] = a - b;
    }
    WeightStats ws = compute_weight_stats(log_w);

    LevelRecord rec;
    rec.level = level;
    rec.beta = tr.beta_new;
    rec.fidelity = tr.m_new;
    rec.delta_beta = tr.beta_new - beta;
    rec.ess = ws.ess;
    rec.cov = ws.cov;
    rec.strategy_decision = tr.bridge ? "bridge" : "temper";
    rec.it_criterion_value = tr.it_value;
    rec.cross_cov = tr.cross_cov;
    rec.log_c_l = ws.log_mean;
    out.log_evidence += ws.log_mean;
    evidence_var += ws.var_log_mean;

    ProposalState prop = adapt_proposal(pop, ws.norm_w, scale);

    RngStream rs_stream = RngStream::derive(seed, StreamPurpose::Resample,
                                            static_cast<uint64_t>(level), 0);
    std::vector<int> idx = systematic_resample(ws.norm_w, rs_stream);
    std::vector<Particle> next(pop.size());
    for (int i = 0; i < N; ++i) {
      next[static_cast<size_t>(i)] = pop[static_cast<size_t>(idx[static_cast<size_t>(i)])];
      if (tr.bridge)
        next[static_cast<size_t>(i)].log_like =
            tr.like_new[static_cast<size_t>(idx[static_cast<size_t>(i)])];
    }
    pop.swap(next);

    std::vector<RngStream> chain_streams;
    chain_streams.reserve(pop.size());
    for (int i = 0; i < N; ++i)
      chain_streams.push_back(RngStream::derive(seed, StreamPurpose::Chain,
                                                static_cast<uint64_t>(level),
                                                static_cast<uint64_t>(i)));
    const int m_now = tr.m_new;
    BatchLogLikeFn batch = [&like, m_now, &cfg](const std::vector<Eigen::VectorXd>& t) {
      return like.eval_batch(t, m_now, cfg.workers);
    };
    SweepStats sw = mcmc_sweep(pop, tr.beta_new, prior.log_density, batch, prop,
                               chain_streams, cfg.corr_target, cfg.max_sweep_iters);
    scale = update_scale(scale, sw.acceptance, cfg.scale_eta);

    rec.acceptance = sw.acceptance;
    rec.sweep_iters = sw.iters;
    rec.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    out.levels.push_back(rec);
    if (on_level) on_level(rec);

    beta = tr.beta_new;
    m = tr.m_new;
  }

  out.posterior = std::move(pop);
  out.log_evidence_sigma = std::sqrt(evidence_var);
  out.final_scale = scale;
  return out;
}

RunResult run_fixed_fidelity(LikelihoodModel& like, const PriorSpec& prior,
                             const SamplerConfig& cfg, uint64_t seed,
                             const LevelCallback& on_level) {
  return run_multifidelity(like, prior, Strategy::FullFidelityOnly, cfg, seed,
                           on_level);
}

}  // namespace mfst
