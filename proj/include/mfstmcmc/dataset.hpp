#pragma once
// Snapshot datasets: independent cells measured at a handful of times, each
// row one observed copy-number vector. CSV on disk with header
// time,<species>,... so the file itself names the observed species.

#include <string>
#include <vector>

#include "mfstmcmc/model.hpp"

namespace mfst {

struct SnapshotDataset {
  std::vector<std::string> observed_species;
  std::vector<double> times;                 // sorted, unique
  std::vector<std::vector<State>> cells;     // per time, observed coordinates

  int num_times() const { return static_cast<int>(times.size()); }
  long long total_cells() const;

  // observed-species indices resolved against a network; ConfigError on miss
  std::vector<int> observed_indices(const ReactionNetwork& net) const;
};

SnapshotDataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const SnapshotDataset& data, const std::string& path);

}  // namespace mfst
