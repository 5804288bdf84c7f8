#pragma once
// Sparse CME generator restricted to a truncated state space. Off-diagonal
// entry (y, x) holds the propensity of the jump x -> y for in-space targets;
// the diagonal carries minus the total outflow of every reaction, so columns
// whose jumps leave the space have a deficit. That deficit is split into two
// tracked flows: `leak` (target inside the rectangle H(b) but outside Omega,
// recoverable by expanding Omega) and `freeze` (target outside H(b), the
// surrogate model's own absorbing exterior). Time-varying reactions keep a
// constant sparsity pattern scaled by a scalar rate(t).

#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "mfstmcmc/model.hpp"
#include "mfstmcmc/state_space.hpp"

namespace mfst {

struct SparseGenerator {
  struct Term {
    Eigen::SparseMatrix<double> core;  // n x n, full-outflow diagonal
    Eigen::VectorXd leak;              // flow to H(b) \ Omega per column
    Eigen::VectorXd freeze;            // flow out of H(b) per column
    std::function<double(double)> rate;  // null for the static part
  };

  int n = 0;
  Term static_part;
  std::vector<Term> tv;  // one per time-varying reaction

  bool time_invariant() const { return tv.empty(); }

  Eigen::SparseMatrix<double> core_at(double t) const;
  Eigen::VectorXd leak_at(double t) const;
  Eigen::VectorXd freeze_at(double t) const;

  // (n+2) x (n+2) system used by the integrators: coordinates n and n+1 are
  // absorbing accumulators for the leak and freeze flows, so every column
  // sums to zero exactly and lost mass is read off the sinks.
  Eigen::SparseMatrix<double> augmented_at(double t) const;

  double max_outflow() const;  // max |diagonal|, step-size heuristic for expm
};

SparseGenerator assemble_generator(const ReactionNetwork& net,
                                   const Eigen::VectorXd& theta_log10,
                                   const TruncatedStateSpace& space);

}  // namespace mfst
