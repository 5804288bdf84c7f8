#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "mfstmcmc/dataset.hpp"
#include "mfstmcmc/errors.hpp"
#include "mfstmcmc/model.hpp"

using namespace mfst;

namespace {

const std::string kConfigDir = MFST_CONFIG_DIR;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& p) : path(p) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("csv rows group by time and times come out sorted") {
  TempFile f("ds_unsorted.csv");
  // deliberately interleaved and unsorted rows
  write_file(f.path,
             "time,RNA,Protein\n"
             "2.0,5,1\n"
             "0.5,0,0\n"
             "2.0,7,2\n"
             "0.5,1,0\n"
             "1.0,3,1\n");
  SnapshotDataset ds = load_dataset_csv(f.path);
  REQUIRE(ds.observed_species == std::vector<std::string>{"RNA", "Protein"});
  REQUIRE(ds.times == std::vector<double>{0.5, 1.0, 2.0});
  REQUIRE(ds.cells.size() == 3);
  CHECK(ds.cells[0].size() == 2);
  CHECK(ds.cells[1].size() == 1);
  CHECK(ds.cells[2].size() == 2);
  // arrival order within one time is preserved
  CHECK(ds.cells[2][0] == State{5, 1});
  CHECK(ds.cells[2][1] == State{7, 2});
  CHECK(ds.total_cells() == 5);
}

TEST_CASE("round trip through save and load") {
  SnapshotDataset ds;
  ds.observed_species = {"RNA"};
  ds.times = {0.25, 1.5};
  ds.cells = {{State{0}, State{3}, State{1}}, {State{8}}};

  TempFile f("ds_roundtrip.csv");
  save_dataset_csv(ds, f.path);
  SnapshotDataset back = load_dataset_csv(f.path);
  CHECK(back.observed_species == ds.observed_species);
  CHECK(back.times == ds.times);
  CHECK(back.cells == ds.cells);
  CHECK(back.total_cells() == 4);
}

TEST_CASE("the bundled demo dataset loads") {
  SnapshotDataset ds = load_dataset_csv(kConfigDir + "/data/dataset.csv");
  CHECK(ds.observed_species == std::vector<std::string>{"RNA"});
  CHECK(ds.num_times() == 4);
  CHECK(ds.total_cells() == 800);
}

TEST_CASE("malformed csv inputs are rejected") {
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_dataset_csv("no_such_file.csv"), ConfigError);
  }
  SUBCASE("header must start with time") {
    TempFile f("ds_bad_header.csv");
    write_file(f.path, "t,RNA\n1.0,2\n");
    CHECK_THROWS_AS(load_dataset_csv(f.path), ConfigError);
  }
  SUBCASE("header must name at least one species") {
    TempFile f("ds_no_species.csv");
    write_file(f.path, "time\n1.0\n");
    CHECK_THROWS_AS(load_dataset_csv(f.path), ConfigError);
  }
  SUBCASE("field count must match the header") {
    TempFile f("ds_bad_row.csv");
    write_file(f.path, "time,RNA,P\n1.0,2\n");
    CHECK_THROWS_AS(load_dataset_csv(f.path), ConfigError);
  }
  SUBCASE("counts must be nonnegative integers") {
    TempFile f("ds_neg.csv");
    write_file(f.path, "time,RNA\n1.0,-3\n");
    CHECK_THROWS_AS(load_dataset_csv(f.path), ConfigError);
  }
  SUBCASE("no data rows") {
    TempFile f("ds_empty.csv");
    write_file(f.path, "time,RNA\n");
    CHECK_THROWS_AS(load_dataset_csv(f.path), ConfigError);
  }
  SUBCASE("non numeric count") {
    TempFile f("ds_text.csv");
    write_file(f.path, "time,RNA\n1.0,lots\n");
    CHECK_THROWS_AS(load_dataset_csv(f.path), ConfigError);
  }
  SUBCASE("negative time") {
    TempFile f("ds_negt.csv");
    write_file(f.path, "time,RNA\n-1.0,2\n");
    CHECK_THROWS_AS(load_dataset_csv(f.path), ConfigError);
  }
}

TEST_CASE("observed indices resolve against the model") {
  ReactionNetwork net = load_model(kConfigDir + "/models/bursting2.json");
  SnapshotDataset ds;
  ds.observed_species = {"RNA"};
  ds.times = {1.0};
  ds.cells = {{State{2}}};
  std::vector<int> idx = ds.observed_indices(net);
  REQUIRE(idx.size() == 1);
  CHECK(idx[0] == 2);

  ds.observed_species = {"Mystery"};
  CHECK_THROWS_AS(ds.observed_indices(net), ConfigError);
}
