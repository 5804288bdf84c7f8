#pragma once
// Stochastic reaction network definition: species, reactions with a small
// closed algebra of propensity forms, and independent log10-normal priors on
// the rate parameters. Samplers work in log10 space throughout; conversion to
// linear units happens once per propensity evaluation pass.

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mfstmcmc/rng.hpp"

namespace mfst {

using State = std::vector<int32_t>;

struct Parameter {
  std::string name;
  double prior_log10_mean = 0.0;
  double prior_log10_std = 1.0;
};

// alpha = c * prod_i C(x_i, nu_i)
struct MassActionProp {
  int rate_param;
};

// alpha = k / (1 + a * x_reg^b) * prod_i C(x_i, nu_i); repressive Hill form
struct HillProp {
  int rate_param;
  int scale_param;
  int exponent_param;
  int regulator_species;
};

// Pulse-shaped input signal S(t) = max{0, exp(-r1 (t-T0)) (1 - exp(-r2 (t-T0)))}.
// Zero for t <= T0, rises on the r2 timescale, decays on the r1 timescale.
struct SignalParams {
  int r1_param;
  int r2_param;
  int t0_param;
};

// alpha = max{0, a - b * S(t)} * prod_i C(x_i, nu_i)
struct TimeVaryingMaxProp {
  int base_param;
  int coeff_param;
  SignalParams signal;
};

// alpha = (sum_k w_k * x_{s_k}) * prod_i C(x_i, nu_i); weights are parameters
struct LinearProp {
  std::vector<std::pair<int, int>> terms;  // (param index, species index)
};

using PropensityExpr =
    std::variant<MassActionProp, HillProp, TimeVaryingMaxProp, LinearProp>;

struct Reaction {
  std::vector<int32_t> reactants;  // consumed counts per species
  std::vector<int32_t> products;   // produced counts per species
  std::vector<int32_t> net;        // products - reactants
  PropensityExpr prop;

  bool time_varying() const {
    return std::holds_alternative<TimeVaryingMaxProp>(prop);
  }
};

struct ReactionNetwork {
  std::string name;
  std::vector<std::string> species;
  std::vector<Parameter> parameters;
  std::vector<Reaction> reactions;
  // sparse initial distribution; a single entry with probability 1 for the
  // usual deterministic initial condition
  std::vector<std::pair<State, double>> initial;

  int num_species() const { return static_cast<int>(species.size()); }
  int num_params() const { return static_cast<int>(parameters.size()); }
  int species_index(const std::string& s) const;  // -1 if unknown
  int param_index(const std::string& s) const;
  bool time_varying() const;
};

// 10^theta elementwise; the only place log10 parameters become linear rates
Eigen::VectorXd to_linear(const Eigen::VectorXd& theta_log10);

double signal_value(const SignalParams& sig, const Eigen::VectorXd& lin, double t);

// Time-dependent scalar rate of a reaction (1 for time-invariant kinds).
double rate_factor(const Reaction& r, const Eigen::VectorXd& lin, double t);

// Everything except the time-dependent rate: the kind-specific rate law times
// the combinatorial reactant factor prod_i C(x_i, nu_i). Vanishes whenever a
// reactant is insufficient, so jumps to negative copy numbers carry no flux.
double state_factor(const Reaction& r, const State& x, const Eigen::VectorXd& lin);

double eval_propensity(const Reaction& r, const State& x, double t,
                       const Eigen::VectorXd& lin);

State apply_stoichiometry(const Reaction& r, const State& x);

// Independent Gaussians in log10 space.
double prior_log_density(const std::vector<Parameter>& params,
                         const Eigen::VectorXd& theta_log10);
Eigen::VectorXd prior_sample(const std::vector<Parameter>& params, RngStream& rng);

// Model definition file (JSON); format documented in README.
ReactionNetwork model_from_json_text(const std::string& text);
ReactionNetwork load_model(const std::string& path);
std::string model_to_json_text(const ReactionNetwork& net);

}  // namespace mfst
