#include "mfstmcmc/fsp_solver.hpp"

#include <algorithm>
#include <cmath>

#include "mfstmcmc/errors.hpp"

namespace mfst {

double fsp_error_mass(const Eigen::VectorXd& p) { return 1.0 - p.sum(); }

namespace {

// One stepper facade over the two integrator families so the adaptive loop
// below does not care whether the generator is time-varying.
class Stepper {
 public:
  Stepper(const SparseGenerator& gen, const IntegratorConfig& cfg, double horizon) {
    if (gen.time_invariant()) {
      krylov_ = std::make_unique<KrylovStepper>(gen.augmented_at(0.0), cfg, horizon);
    } else {
      // copy the generator parts; the facade outlives the caller's reference
      auto parts = std::make_shared<SparseGenerator>(gen);
      rosw_ = std::make_unique<RosenbrockWStepper>(
          [parts](double t) { return parts->augmented_at(t); }, cfg, horizon);
    }
  }
  double step(double t, double t_end, Eigen::VectorXd& p, StepperStats* stats) {
    return krylov_ ? krylov_->step(t, t_end, p, stats) : rosw_->step(t, t_end, p, stats);
  }

 private:
  std::unique_ptr<KrylovStepper> krylov_;
  std::unique_ptr<RosenbrockWStepper> rosw_;
};

}  // namespace

FspSolution solve_cme_adaptive(const ReactionNetwork& net,
                               const Eigen::VectorXd& theta_log10,
                               const FidelityBound& b,
                               const std::vector<double>& times,
                               const FspSolveOptions& opts) {
  if (times.empty()) throw ConfigError("solve_cme_adaptive: no output times");
  for (size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
      throw ConfigError("solve_cme_adaptive: times must be sorted and non-negative");
  }
  if (static_cast<int>(b.size()) != net.num_species())
    throw ConfigError("solve_cme_adaptive: bound size does not match species count");

  std::vector<State> support;
  for (const auto& [x, prob] : net.initial) {
    (void)prob;
    support.push_back(x);
  }
  auto space = build_reachable_space(net, support, b,
                                     default_constraints(net, support, b));

  const double t_f = times.back();
  FspSolution sol;

  // p has two extra accumulator coordinates: [omega leak, frozen exterior]
  Eigen::VectorXd p = Eigen::VectorXd::Zero(space->size() + 2);
  for (const auto& [x, prob] : net.initial) {
    int idx = space->index_of(x);
    if (idx < 0) throw ConfigError("initial state outside the fidelity bound");
    p[idx] = prob;
  }

  auto gen = assemble_generator(net, theta_log10, *space);
  auto stepper = std::make_unique<Stepper>(gen, opts.integ, std::max(t_f, 1e-300));

  auto record = [&](double tk) {
    sol.times.push_back(tk);
    sol.dist.push_back(p.head(space->size()));
    sol.lost_mass.push_back(p[space->size()]);
    sol.frozen_mass.push_back(p[space->size() + 1]);
  };

  double t = 0.0;
  size_t next_out = 0;
  while (next_out < times.size() && times[next_out] <= 0.0) {
    record(0.0);
    ++next_out;
  }

  // rollback checkpoint: last accepted state
  double t_chk = t;
  Eigen::VectorXd p_chk = p;

  while (next_out < times.size()) {
    double t_target = times[next_out];
    while (t < t_target) {
      double t_new = stepper->step(t, t_target, p, &sol.stepper);
      double budget = (t_new / t_f) * opts.fsp_tol + 1e-13;
      double lost = p[space->size()];
      if (lost > budget) {
        // roll back and expand; stale mass in the leak sink stays lost, the
        // checkpoint was within budget so the invariant is kept
        auto grown = expand_state_set(space, net, opts.growth);
        // one relaxation round can come up empty when a cap needs several
        // increments before the blocked jump target becomes admissible
        while (grown->size() == space->size() && !grown->covers_bound() &&
               !grown->constraints_vacuous())
          grown = expand_state_set(grown, net, opts.growth);
        if (grown->size() > opts.max_states)
          throw CapacityError("adaptive FSP needs " + std::to_string(grown->size()) +
                              " states, cap is " + std::to_string(opts.max_states));
        if (grown->size() == space->size())
          // Omega is the whole reachable set inside the bound and the budget
          // is still blown: the tolerance is unattainable at this fidelity
          throw CapacityError("FSP error budget unattainable within the bound (lost mass " +
                              std::to_string(lost) + " at t=" + std::to_string(t_new) + ")");
        ++sol.expansions;
        int old_n = space->size();
        space = grown;
        Eigen::VectorXd pg = Eigen::VectorXd::Zero(space->size() + 2);
        pg.head(old_n) = p_chk.head(old_n);
        pg[space->size()] = p_chk[old_n];
        pg[space->size() + 1] = p_chk[old_n + 1];
        p = pg;
        p_chk = pg;
        t = t_chk;
        gen = assemble_generator(net, theta_log10, *space);
        stepper = std::make_unique<Stepper>(gen, opts.integ, std::max(t_f, 1e-300));
        continue;
      }
      t = t_new;
      t_chk = t;
      p_chk = p;
    }
    record(t_target);
    ++next_out;
  }

  // earlier outputs were recorded on smaller spaces; ordinals are stable so
  // padding with zeros aligns them to the final space
  for (auto& d : sol.dist) {
    if (d.size() < space->size()) {
      Eigen::VectorXd padded = Eigen::VectorXd::Zero(space->size());
      padded.head(d.size()) = d;
      d = std::move(padded);
    }
  }
  sol.space = space;
  return sol;
}

}  // namespace mfst
