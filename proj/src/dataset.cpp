#include "mfstmcmc/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mfstmcmc/errors.hpp"

namespace mfst {

long long SnapshotDataset::total_cells() const {
  long long n = 0;
  for (const auto& c : cells) n += static_cast<long long>(c.size());
  return n;
}

std::vector<int> SnapshotDataset::observed_indices(const ReactionNetwork& net) const {
  std::vector<int> idx;
  for (const auto& name : observed_species) {
    int i = net.species_index(name);
    if (i < 0) throw ConfigError("dataset observes unknown species: " + name);
    idx.push_back(i);
  }
  return idx;
}

SnapshotDataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty dataset: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  SnapshotDataset data;
  {
    std::stringstream header(line);
    std::string col;
    bool first = true;
    while (std::getline(header, col, ',')) {
      if (first) {
        if (col != "time") throw ConfigError("dataset header must start with 'time'");
        first = false;
      } else {
        data.observed_species.push_back(col);
      }
    }
  }
  if (data.observed_species.empty())
    throw ConfigError("dataset has no species columns: " + path);

  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    if (!std::getline(row, cell, ',')) continue;
    double t;
    State x;
    try {
      t = std::stod(cell);
      while (std::getline(row, cell, ',')) {
        long v = std::stol(cell);
        if (v < 0)
          throw ConfigError("dataset row " + std::to_string(lineno) +
                            " has a negative count");
        x.push_back(static_cast<int32_t>(v));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("dataset row " + std::to_string(lineno) +
                        " is not numeric");
    }
    if (t < 0.0)
      throw ConfigError("dataset row " + std::to_string(lineno) +
                        " has a negative time");
    if (x.size() != data.observed_species.size())
      throw ConfigError("dataset row " + std::to_string(lineno) + " has wrong width");
    auto it = std::lower_bound(data.times.begin(), data.times.end(), t);
    size_t pos;
    if (it != data.times.end() && *it == t) {
      pos = static_cast<size_t>(it - data.times.begin());
    } else {
      pos = static_cast<size_t>(it - data.times.begin());
      data.times.insert(it, t);
      data.cells.emplace(data.cells.begin() + static_cast<long>(pos));
    }
    data.cells[pos].push_back(std::move(x));
  }
  if (data.times.empty()) throw ConfigError("dataset has no rows: " + path);
  return data;
}

void save_dataset_csv(const SnapshotDataset& data, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot open dataset for writing: " + path);
  std::fprintf(f, "time");
  for (const auto& s : data.observed_species) std::fprintf(f, ",%s", s.c_str());
  std::fprintf(f, "\n");
  for (size_t ti = 0; ti < data.times.size(); ++ti) {
    for (const auto& x : data.cells[ti]) {
      std::fprintf(f, "%.17g", data.times[ti]);
      for (int32_t v : x) std::fprintf(f, ",%d", v);
      std::fprintf(f, "\n");
    }
  }
  std::fclose(f);
}

}  // namespace mfst
