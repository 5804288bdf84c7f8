#include "mfstmcmc/state_space.hpp"

#include <cmath>
#include <cstdio>
#include <deque>

#include "mfstmcmc/errors.hpp"

namespace mfst {

TruncatedStateSpace::TruncatedStateSpace(FidelityBound bound,
                                         std::vector<ShapeConstraint> constraints)
    : bound_(std::move(bound)), constraints_(std::move(constraints)) {}

State TruncatedStateSpace::state(int idx) const {
  const int32_t* p = state_ptr(idx);
  return State(p, p + bound_.size());
}

int TruncatedStateSpace::index_of(const State& x) const {
  auto it = index_.find(x);
  return it == index_.end() ? -1 : it->second;
}

bool TruncatedStateSpace::inside_bound(const State& x) const {
  for (size_t i = 0; i < bound_.size(); ++i)
    if (x[i] < 0 || x[i] > bound_[i]) return false;
  return true;
}

bool TruncatedStateSpace::covers_bound() const {
  long long full = 1;
  for (int32_t b : bound_) {
    full *= (static_cast<long long>(b) + 1);
    if (full > size()) return false;  // early out, also avoids overflow
  }
  return full == size();
}

bool TruncatedStateSpace::constraints_vacuous() const {
  for (const auto& c : constraints_) {
    long long box_max = 0;
    for (size_t i = 0; i < c.weights.size(); ++i)
      if (c.weights[i] > 0) box_max += static_cast<long long>(c.weights[i]) * bound_[i];
    if (c.cap < box_max) return false;
  }
  return true;
}

int TruncatedStateSpace::append(const State& x) {
  int32_t idx = static_cast<int32_t>(size());
  index_.emplace(x, idx);
  states_.insert(states_.end(), x.begin(), x.end());
  return idx;
}

std::shared_ptr<TruncatedStateSpace> build_rectangle_space(const FidelityBound& b) {
  long long total = 1;
  for (int32_t bi : b) {
    if (bi < 0) throw ConfigError("fidelity bound must be non-negative");
    total *= (static_cast<long long>(bi) + 1);
    if (total > (1ll << 31)) throw ConfigError("rectangle space too large to enumerate");
  }
  auto space = std::make_shared<TruncatedStateSpace>(b, std::vector<ShapeConstraint>{});
  State x(b.size(), 0);
  for (long long n = 0; n < total; ++n) {
    space->append(x);
    // row-major increment, last coordinate fastest
    for (int i = static_cast<int>(b.size()) - 1; i >= 0; --i) {
      if (++x[i] <= b[i]) break;
      x[i] = 0;
    }
  }
  return space;
}

std::vector<ShapeConstraint> default_constraints(const ReactionNetwork& net,
                                                 const std::vector<State>& support,
                                                 const FidelityBound& b) {
  if (support.empty()) throw ConfigError("empty initial support");
  int n = net.num_species();
  std::vector<long long> coord_max(n, 0);
  long long total_max = 0;
  auto consider = [&](const State& x) {
    long long tot = 0;
    for (int i = 0; i < n; ++i) {
      coord_max[i] = std::max(coord_max[i], static_cast<long long>(x[i]));
      tot += x[i];
    }
    total_max = std::max(total_max, tot);
  };
  for (const State& x : support) {
    consider(x);
    for (const auto& r : net.reactions) {
      State y = apply_stoichiometry(r, x);
      bool valid = true;
      for (int i = 0; i < n; ++i)
        if (y[i] < 0) valid = false;
      if (valid) consider(y);
    }
  }
  std::vector<ShapeConstraint> cons;
  for (int i = 0; i < n; ++i) {
    ShapeConstraint c;
    c.weights.assign(n, 0);
    c.weights[i] = 1;
    c.cap = std::min(coord_max[i], static_cast<long long>(b[i]));
    cons.push_back(std::move(c));
  }
  ShapeConstraint tot;
  tot.weights.assign(n, 1);
  long long bsum = 0;
  for (int32_t bi : b) bsum += bi;
  tot.cap = std::min(total_max, bsum);
  cons.push_back(std::move(tot));
  return cons;
}

namespace {

void grow_by_reachability(TruncatedStateSpace& space, const ReactionNetwork& net) {
  std::deque<int> work;
  for (int i = 0; i < space.size(); ++i) work.push_back(i);
  while (!work.empty()) {
    State x = space.state(work.front());
    work.pop_front();
    for (const auto& r : net.reactions) {
      State y = apply_stoichiometry(r, x);
      if (!space.inside_bound(y)) continue;
      bool ok = true;
      for (const auto& c : space.constraints())
        if (!c.satisfied(y)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      if (space.index_of(y) >= 0) continue;
      work.push_back(space.append(y));
    }
  }
}

}  // namespace

std::shared_ptr<TruncatedStateSpace> build_reachable_space(
    const ReactionNetwork& net, const std::vector<State>& seeds,
    const FidelityBound& b, std::vector<ShapeConstraint> constraints) {
  auto space = std::make_shared<TruncatedStateSpace>(b, std::move(constraints));
  for (const State& x : seeds) {
    if (!space->inside_bound(x))
      throw ConfigError("seed state outside the fidelity bound");
    if (space->index_of(x) < 0) space->append(x);
  }
  grow_by_reachability(*space, net);
  return space;
}

std::shared_ptr<TruncatedStateSpace> expand_state_set(
    const std::shared_ptr<TruncatedStateSpace>& space, const ReactionNetwork& net,
    double growth) {
  if (space->covers_bound()) return space;
  std::vector<ShapeConstraint> relaxed = space->constraints();
  for (auto& c : relaxed) {
    // strict growth: a cap of 0 (species reachable only in several steps)
    // must still open up, geometric scaling alone would pin it at 0
    long long scaled = static_cast<long long>(std::ceil(static_cast<double>(c.cap) * growth));
    c.cap = std::max(scaled, c.cap + 1);
  }
  auto grown = std::make_shared<TruncatedStateSpace>(space->bound(), std::move(relaxed));
  for (int i = 0; i < space->size(); ++i) grown->append(space->state(i));
  grow_by_reachability(*grown, net);
  return grown;
}

void write_state_checkpoint(const TruncatedStateSpace& space, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ConfigError("cannot open checkpoint for writing: " + path);
  int32_t header[2] = {space.num_species(), space.size()};
  std::fwrite(header, sizeof(int32_t), 2, f);
  for (int i = 0; i < space.size(); ++i)
    std::fwrite(space.state_ptr(i), sizeof(int32_t), space.num_species(), f);
  std::fclose(f);
}

std::vector<State> read_state_checkpoint(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw ConfigError("cannot open checkpoint: " + path);
  int32_t header[2];
  if (std::fread(header, sizeof(int32_t), 2, f) != 2) {
    std::fclose(f);
    throw ConfigError("truncated checkpoint header: " + path);
  }
  std::vector<State> states(header[1], State(header[0]));
  for (auto& x : states) {
    if (std::fread(x.data(), sizeof(int32_t), x.size(), f) != x.size()) {
      std::fclose(f);
      throw ConfigError("truncated checkpoint body: " + path);
    }
  }
  std::fclose(f);
  return states;
}

}  // namespace mfst
