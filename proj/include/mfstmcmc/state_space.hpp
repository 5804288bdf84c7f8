#pragma once
// Finite state-space truncation machinery. A fidelity level is a rectangular
// copy-number bound b; the working set Omega is the subset of H(b) reachable
// from the initial support under a family of linear shape constraints
// sum_i w_i x_i <= cap. Expansion relaxes the caps geometrically and grows
// Omega by breadth-first reachability, keeping existing state ordinals stable
// so solution vectors can be remapped by padding.

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "mfstmcmc/model.hpp"

namespace mfst {

using FidelityBound = std::vector<int32_t>;

struct ShapeConstraint {
  std::vector<int32_t> weights;
  long long cap = 0;

  long long eval(const State& x) const {
    long long s = 0;
    for (size_t i = 0; i < weights.size(); ++i)
      s += static_cast<long long>(weights[i]) * x[i];
    return s;
  }
  bool satisfied(const State& x) const { return eval(x) <= cap; }
};

class TruncatedStateSpace {
 public:
  TruncatedStateSpace(FidelityBound bound, std::vector<ShapeConstraint> constraints);

  int num_species() const { return static_cast<int>(bound_.size()); }
  int size() const { return static_cast<int>(index_.size()); }
  const FidelityBound& bound() const { return bound_; }
  const std::vector<ShapeConstraint>& constraints() const { return constraints_; }

  State state(int idx) const;
  const int32_t* state_ptr(int idx) const { return states_.data() + static_cast<size_t>(idx) * bound_.size(); }
  int index_of(const State& x) const;  // -1 if absent
  bool inside_bound(const State& x) const;

  // True when Omega already holds every state of the rectangle H(b).
  bool covers_bound() const;

  // True when every constraint cap is at or past its maximum over H(b), so
  // relaxing further cannot admit anything new and Omega is the full
  // reachable set within the bound.
  bool constraints_vacuous() const;

  int append(const State& x);  // returns new ordinal; caller checks membership first

 private:
  FidelityBound bound_;
  std::vector<ShapeConstraint> constraints_;
  std::vector<int32_t> states_;  // flat, num_species stride

  struct KeyHash {
    size_t operator()(const State& v) const {
      uint64_t h = 1469598103934665603ull;
      for (int32_t x : v) {
        h ^= static_cast<uint32_t>(x);
        h *= 1099511628211ull;
      }
      return static_cast<size_t>(h);
    }
  };
  std::unordered_map<State, int32_t, KeyHash> index_;
};

// All of H(b), enumerated in row-major order (last coordinate fastest).
std::shared_ptr<TruncatedStateSpace> build_rectangle_space(const FidelityBound& b);

// Default constraint family: one cap per coordinate plus a total copy-number
// cap. Initial caps cover `support` plus one reaction step, clipped to b.
std::vector<ShapeConstraint> default_constraints(const ReactionNetwork& net,
                                                 const std::vector<State>& support,
                                                 const FidelityBound& b);

// States reachable from `seeds` by repeated reaction jumps, staying inside the
// constraints and the bound. Seeds come first, discoveries appended in BFS
// order, so the result is deterministic.
std::shared_ptr<TruncatedStateSpace> build_reachable_space(
    const ReactionNetwork& net, const std::vector<State>& seeds,
    const FidelityBound& b, std::vector<ShapeConstraint> constraints);

// Relax the caps by `growth` (ceil), then grow by reachability from the
// current states. Ordinals of existing states are preserved. Returns the
// input unchanged when Omega already covers H(b).
std::shared_ptr<TruncatedStateSpace> expand_state_set(
    const std::shared_ptr<TruncatedStateSpace>& space, const ReactionNetwork& net,
    double growth);

// Flat int32 dump/load of the state list (species count in the header).
void write_state_checkpoint(const TruncatedStateSpace& space, const std::string& path);
std::vector<State> read_state_checkpoint(const std::string& path);

}  // namespace mfst
