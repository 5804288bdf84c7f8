#pragma once
// Adaptive finite state projection solve of the (surrogate) CME. The working
// set grows on demand: after every accepted integrator step the mass lost to
// the expandable exterior is checked against the linear-in-time budget
// (t / t_f) * eps; on violation the step is rolled back, the constraint caps
// are relaxed, and integration resumes on the grown space.

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "mfstmcmc/generator.hpp"
#include "mfstmcmc/integrator.hpp"
#include "mfstmcmc/model.hpp"
#include "mfstmcmc/state_space.hpp"

namespace mfst {

struct FspSolveOptions {
  double fsp_tol = 1e-8;
  double growth = 1.5;
  long long max_states = 1 << 22;
  IntegratorConfig integ;
};

struct FspSolution {
  std::shared_ptr<TruncatedStateSpace> space;  // final, possibly expanded
  std::vector<double> times;
  std::vector<Eigen::VectorXd> dist;         // aligned to `space` ordinals
  std::vector<double> lost_mass;             // Omega-truncation loss by each time
  std::vector<double> frozen_mass;           // absorbed outside H(b) by each time
  int expansions = 0;
  StepperStats stepper;

  // l1 distance bound to the untruncated CME solution at output k
  double error_bound(size_t k) const { return lost_mass[k] + frozen_mass[k]; }
};

double fsp_error_mass(const Eigen::VectorXd& p);  // 1 - sum(p)

// `times` must be non-empty, sorted, non-negative. The initial distribution
// comes from the network definition and must be supported inside H(b).
FspSolution solve_cme_adaptive(const ReactionNetwork& net,
                               const Eigen::VectorXd& theta_log10,
                               const FidelityBound& b,
                               const std::vector<double>& times,
                               const FspSolveOptions& opts);

}  // namespace mfst
