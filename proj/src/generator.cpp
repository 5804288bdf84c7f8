#include "mfstmcmc/generator.hpp"

#include <cmath>

#include "mfstmcmc/errors.hpp"

namespace mfst {

Eigen::SparseMatrix<double> SparseGenerator::core_at(double t) const {
  Eigen::SparseMatrix<double> A = static_part.core;
  for (const auto& term : tv) A += term.rate(t) * term.core;
  return A;
}

Eigen::VectorXd SparseGenerator::leak_at(double t) const {
  Eigen::VectorXd v = static_part.leak;
  for (const auto& term : tv) v += term.rate(t) * term.leak;
  return v;
}

Eigen::VectorXd SparseGenerator::freeze_at(double t) const {
  Eigen::VectorXd v = static_part.freeze;
  for (const auto& term : tv) v += term.rate(t) * term.freeze;
  return v;
}

Eigen::SparseMatrix<double> SparseGenerator::augmented_at(double t) const {
  Eigen::SparseMatrix<double> A = core_at(t);
  Eigen::VectorXd leak = leak_at(t);
  Eigen::VectorXd freeze = freeze_at(t);
  Eigen::SparseMatrix<double> aug(n + 2, n + 2);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(A.nonZeros()) + 2 * static_cast<size_t>(n));
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int c = 0; c < n; ++c) {
    if (leak[c] != 0.0) trips.emplace_back(n, c, leak[c]);
    if (freeze[c] != 0.0) trips.emplace_back(n + 1, c, freeze[c]);
  }
  aug.setFromTriplets(trips.begin(), trips.end());
  return aug;
}

double SparseGenerator::max_outflow() const {
  double m = 0.0;
  Eigen::SparseMatrix<double> A = static_part.core;
  for (const auto& term : tv) A += term.rate ? std::abs(term.rate(0.0)) * term.core : term.core;
  for (int c = 0; c < A.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it)
      if (it.row() == it.col()) m = std::max(m, std::abs(it.value()));
  return m;
}

SparseGenerator assemble_generator(const ReactionNetwork& net,
                                   const Eigen::VectorXd& theta_log10,
                                   const TruncatedStateSpace& space) {
  const int n = space.size();
  const Eigen::VectorXd lin = to_linear(theta_log10);

  SparseGenerator gen;
  gen.n = n;

  // one triplet buffer per time-varying reaction plus one shared static one
  struct Buf {
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd leak = Eigen::VectorXd();
    Eigen::VectorXd freeze = Eigen::VectorXd();
  };
  Buf stat;
  stat.leak = Eigen::VectorXd::Zero(n);
  stat.freeze = Eigen::VectorXd::Zero(n);
  std::vector<Buf> tvbuf;
  std::vector<const Reaction*> tvreact;
  for (const auto& r : net.reactions)
    if (r.time_varying()) {
      Buf b;
      b.leak = Eigen::VectorXd::Zero(n);
      b.freeze = Eigen::VectorXd::Zero(n);
      tvbuf.push_back(std::move(b));
      tvreact.push_back(&r);
    }

  for (int s = 0; s < n; ++s) {
    State x = space.state(s);
    int tvslot = 0;
    for (const auto& r : net.reactions) {
      bool is_tv = r.time_varying();
      Buf& buf = is_tv ? tvbuf[tvslot] : stat;
      if (is_tv) ++tvslot;
      double w = state_factor(r, x, lin);
      if (w == 0.0) continue;
      State y = apply_stoichiometry(r, x);
      bool below = false, beyond = false;
      for (size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0) below = true;
        if (y[i] > space.bound()[i]) beyond = true;
      }
      if (below)
        throw ConfigError("propensity positive for a jump below zero copy number");
      buf.trips.emplace_back(s, s, -w);
      if (beyond) {
        buf.freeze[s] += w;
      } else {
        int yi = space.index_of(y);
        if (yi >= 0)
          buf.trips.emplace_back(yi, s, w);
        else
          buf.leak[s] += w;
      }
    }
  }

  auto finish = [n](Buf& b) {
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(b.trips.begin(), b.trips.end());  // duplicate triplets sum
    return m;
  };
  gen.static_part.core = finish(stat);
  gen.static_part.leak = std::move(stat.leak);
  gen.static_part.freeze = std::move(stat.freeze);
  for (size_t k = 0; k < tvbuf.size(); ++k) {
    SparseGenerator::Term term;
    term.core = finish(tvbuf[k]);
    term.leak = std::move(tvbuf[k].leak);
    term.freeze = std::move(tvbuf[k].freeze);
    const Reaction* r = tvreact[k];
    term.rate = [r, lin](double t) { return rate_factor(*r, lin, t); };
    gen.tv.push_back(std::move(term));
  }
  return gen;
}

}  // namespace mfst
