#include "mfstmcmc/stmcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "mfstmcmc/errors.hpp"

namespace mfst {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

WeightStats compute_weight_stats(const Eigen::VectorXd& log_w) {
  const Eigen::Index n = log_w.size();
  if (n == 0) throw SamplerError("empty weight vector");
  double mx = kNegInf;
  for (Eigen::Index i = 0; i < n; ++i) mx = std::max(mx, log_w[i]);
  if (!std::isfinite(mx)) throw SamplerError("all importance weights are zero");

  WeightStats ws;
  ws.log_w = log_w;
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i)
    w[i] = std::isfinite(log_w[i]) ? std::exp(log_w[i] - mx) : 0.0;
  double mean = w.mean();
  double var = (w.array() - mean).square().mean();
  ws.cov = std::sqrt(var) / mean;
  ws.ess = static_cast<double>(n) / (1.0 + ws.cov * ws.cov);
  ws.norm_w = w / w.sum();
  ws.log_mean = mx + std::log(mean);
  ws.var_log_mean = ws.cov * ws.cov / static_cast<double>(n);
  return ws;
}

Eigen::VectorXd tempering_log_weights(const std::vector<Particle>& pop, double beta,
                                      double beta_new) {
  if (beta_new < beta) throw SamplerError("tempering must not decrease beta");
  Eigen::VectorXd lw(pop.size());
  for (size_t i = 0; i < pop.size(); ++i)
    lw[static_cast<Eigen::Index>(i)] = (beta_new - beta) * pop[i].log_like;
  return lw;
}

Eigen::VectorXd bridging_log_weights(const std::vector<Particle>& pop, double beta,
                                     double beta_new,
                                     const std::vector<double>& log_like_new) {
  if (log_like_new.size() != pop.size())
    throw SamplerError("bridging weights need new-model log-likelihoods");
  Eigen::VectorXd lw(pop.size());
  for (size_t i = 0; i < pop.size(); ++i) {
    double a = beta_new * log_like_new[i];
    double b = beta * pop[i].log_like;
    // beta == 0 must kill a -inf log-like exactly
    if (beta_new == 0.0) a = 0.0;
    if (beta == 0.0) b = 0.0;
    lw[static_cast<Eigen::Index>(i)] = a - b;
  }
  return lw;
}

namespace {

double weight_cov(const Eigen::VectorXd& log_likes, double dbeta) {
  double mx = kNegInf;
  for (Eigen::Index i = 0; i < log_likes.size(); ++i)
    if (std::isfinite(log_likes[i])) mx = std::max(mx, dbeta * log_likes[i]);
  Eigen::VectorXd w(log_likes.size());
  for (Eigen::Index i = 0; i < log_likes.size(); ++i)
    w[i] = std::isfinite(log_likes[i]) ? std::exp(dbeta * log_likes[i] - mx) : 0.0;
  double mean = w.mean();
  if (mean <= 0.0) return std::numeric_limits<double>::infinity();
  double var = (w.array() - mean).square().mean();
  return std::sqrt(var) / mean;
}

}  // namespace

double tune_delta_beta(const Eigen::VectorXd& log_likes, double beta, double kappa) {
  if (beta < 0.0 || beta >= 1.0) throw SamplerError("tune_delta_beta: beta out of [0,1)");
  if (kappa <= 0.0) throw SamplerError("tune_delta_beta: kappa must be positive");
  bool any_finite = false;
  for (Eigen::Index i = 0; i < log_likes.size(); ++i)
    if (std::isfinite(log_likes[i])) any_finite = true;
  if (!any_finite) throw SamplerError("tune_delta_beta: no finite log-likelihoods");

  const double cap = 1.0 - beta;
  if (weight_cov(log_likes, cap) <= kappa) return cap;

  double lo = 0.0, hi = cap;
  for (int it = 0; it < 200 && (hi - lo) > 1e-6 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (weight_cov(log_likes, mid) > kappa)
      hi = mid;
    else
      lo = mid;
  }
  double result = 0.5 * (lo + hi);
  // degenerate populations (e.g. mass at -inf) can push the root to zero;
  // keep the annealing moving
  return std::max(result, cap * 1e-9);
}

std::vector<int> systematic_resample(const Eigen::VectorXd& norm_w, RngStream& rng,
                                     int n_out) {
  const int n = static_cast<int>(norm_w.size());
  if (n == 0) throw SamplerError("systematic_resample: empty weights");
  const int m = n_out < 0 ? n : n_out;
  double u = rng.uniform();
  std::vector<int> out(static_cast<size_t>(m));
  int i = 0;
  double c = norm_w[0];
  for (int k = 0; k < m; ++k) {
    double pos = (static_cast<double>(k) + u) / static_cast<double>(m);
    while (pos >= c && i < n - 1) {
      ++i;
      c += norm_w[i];
    }
    out[static_cast<size_t>(k)] = i;
  }
  return out;
}

ProposalState adapt_proposal(const std::vector<Particle>& pop,
                             const Eigen::VectorXd& norm_w, double scale) {
  const int n = static_cast<int>(pop.size());
  if (n == 0) throw SamplerError("adapt_proposal: empty population");
  const int d = static_cast<int>(pop[0].theta.size());

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < n; ++i) mu += norm_w[i] * pop[static_cast<size_t>(i)].theta;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd r = pop[static_cast<size_t>(i)].theta - mu;
    cov += norm_w[i] * (r * r.transpose());
  }

  double reg = 1e-10 * cov.trace() / d;
  if (!(reg > 0.0)) reg = 1e-12;  // fully degenerate population
  ProposalState ps;
  ps.scale = scale;
  for (int attempt = 0; attempt < 10; ++attempt) {
    Eigen::MatrixXd c = cov + reg * Eigen::MatrixXd::Identity(d, d);
    Eigen::LLT<Eigen::MatrixXd> llt((scale * scale) * c);
    if (llt.info() == Eigen::Success) {
      ps.cov = c;
      ps.chol = llt.matrixL();
      return ps;
    }
    reg *= 2.0;
  }
  throw SamplerError("adapt_proposal: covariance not factorizable");
}

double update_scale(double scale, double acceptance, double eta) {
  return scale * std::exp(eta * (acceptance - 0.234));
}

MhResult mh_step(const Particle& p, double beta, const LogPriorFn& log_prior,
                 const LogLikeFn& log_like, const ProposalState& prop, RngStream& rng) {
  const Eigen::Index d = p.theta.size();
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
  Eigen::VectorXd cand = p.theta + prop.chol * z;

  double lp = log_prior(cand);
  double ll = std::isfinite(lp) ? log_like(cand) : kNegInf;
  double u = rng.uniform();

  MhResult res;
  res.particle = p;
  if (!std::isfinite(ll) || !std::isfinite(lp)) return res;  // always reject
  double log_alpha = beta * (ll - p.log_like) + (lp - p.log_prior);
  if (std::log(u) < log_alpha) {
    res.particle.theta = std::move(cand);
    res.particle.log_like = ll;
    res.particle.log_prior = lp;
    res.accepted = true;
  }
  return res;
}

namespace {

double max_param_corr(const Eigen::MatrixXd& theta0, const std::vector<Particle>& pop) {
  const int n = static_cast<int>(pop.size());
  const int d = static_cast<int>(theta0.cols());
  double worst = 0.0;
  for (int j = 0; j < d; ++j) {
    double m0 = 0, m1 = 0;
    for (int i = 0; i < n; ++i) {
      m0 += theta0(i, j);
      m1 += pop[static_cast<size_t>(i)].theta[j];
    }
    m0 /= n;
    m1 /= n;
    double c01 = 0, v0 = 0, v1 = 0;
    for (int i = 0; i < n; ++i) {
      double a = theta0(i, j) - m0;
      double b = pop[static_cast<size_t>(i)].theta[j] - m1;
      c01 += a * b;
      v0 += a * a;
      v1 += b * b;
    }
    if (v0 < 1e-300 || v1 < 1e-300) continue;  // flat direction, nothing to decorrelate
    worst = std::max(worst, std::abs(c01 / std::sqrt(v0 * v1)));
  }
  return worst;
}

}  // namespace

SweepStats mcmc_sweep(std::vector<Particle>& pop, double beta,
                      const LogPriorFn& log_prior, const BatchLogLikeFn& batch_like,
                      const ProposalState& prop, std::vector<RngStream>& streams,
                      double corr_target, int max_iters) {
  const int n = static_cast<int>(pop.size());
  if (streams.size() != pop.size())
    throw SamplerError("mcmc_sweep: one stream per chain required");
  const Eigen::Index d = pop[0].theta.size();

  Eigen::MatrixXd theta0(n, d);
  for (int i = 0; i < n; ++i) theta0.row(i) = pop[static_cast<size_t>(i)].theta;

  SweepStats stats;
  long long accepted = 0;
  std::vector<double> hist;  // first-parameter trace, iteration-major
  hist.reserve(static_cast<size_t>(n) * 8);
  for (int i = 0; i < n; ++i) hist.push_back(pop[static_cast<size_t>(i)].theta[0]);

  std::vector<Eigen::VectorXd> cands(static_cast<size_t>(n));
  std::vector<double> cand_prior(static_cast<size_t>(n));

  for (int iter = 1; iter <= max_iters; ++iter) {
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd z(d);
      for (Eigen::Index q = 0; q < d; ++q) z[q] = streams[static_cast<size_t>(i)].normal();
      cands[static_cast<size_t>(i)] = pop[static_cast<size_t>(i)].theta + prop.chol * z;
      cand_prior[static_cast<size_t>(i)] = log_prior(cands[static_cast<size_t>(i)]);
    }
    std::vector<double> cand_like = batch_like(cands);

    for (int i = 0; i < n; ++i) {
      double u = streams[static_cast<size_t>(i)].uniform();
      Particle& p = pop[static_cast<size_t>(i)];
      double lp = cand_prior[static_cast<size_t>(i)];
      double ll = cand_like[static_cast<size_t>(i)];
      if (!std::isfinite(lp) || !std::isfinite(ll)) continue;
      double log_alpha = beta * (ll - p.log_like) + (lp - p.log_prior);
      if (std::log(u) < log_alpha) {
        p.theta = cands[static_cast<size_t>(i)];
        p.log_like = ll;
        p.log_prior = lp;
        ++accepted;
      }
    }
    for (int i = 0; i < n; ++i) hist.push_back(pop[static_cast<size_t>(i)].theta[0]);

    stats.iters = iter;
    stats.max_abs_corr = max_param_corr(theta0, pop);
    if (stats.max_abs_corr <= corr_target) break;
  }

  stats.acceptance =
      static_cast<double>(accepted) / (static_cast<double>(n) * stats.iters);

  // chain-averaged lag-k autocorrelation of the first parameter
  int t_len = stats.iters + 1;
  int max_lag = std::min(10, t_len - 1);
  for (int lag = 1; lag <= max_lag; ++lag) {
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
      double mean = 0;
      for (int t = 0; t < t_len; ++t) mean += hist[static_cast<size_t>(t) * n + i];
      mean /= t_len;
      for (int t = 0; t + lag < t_len; ++t)
        num += (hist[static_cast<size_t>(t) * n + i] - mean) *
               (hist[static_cast<size_t>(t + lag) * n + i] - mean);
      for (int t = 0; t < t_len; ++t) {
        double r = hist[static_cast<size_t>(t) * n + i] - mean;
        den += r * r;
      }
    }
    stats.lag_autocorr.push_back(den > 0 ? num / den : 0.0);
  }
  return stats;
}

}  // namespace mfst
