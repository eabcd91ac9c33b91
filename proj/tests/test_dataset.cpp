#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "aligngroup/dataset.hpp"
#include "aligngroup/synthetic.hpp"

using namespace aligngroup;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("aligngroup_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& content) {
    const auto p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
};

DatasetPaths toy_paths(TempDir& dir) {
  DatasetPaths p;
  p.user_train = dir.file("user_train.txt", "0\t0\n1\t0\n");
  p.user_test = dir.file("user_test.txt", "");
  p.group_train = dir.file("group_train.txt", "0\t0\n");
  p.group_test = dir.file("group_test.txt", "");
  p.members = dir.file("group_members.txt", "0\t0,1\n");
  return p;
}

}  // namespace

TEST_CASE("load_dataset: 3-line toy corpus") {
  TempDir dir;
  const auto ds = load_dataset(toy_paths(dir));
  CHECK(ds.num_users == 2);
  CHECK(ds.num_items == 1);
  CHECK(ds.num_groups == 1);
  CHECK(ds.user_item_train.size() == 2);
  CHECK(ds.group_item_train.count({0, 0}) == 1);
  CHECK(ds.group_members[0] == std::vector<Index>{0, 1});
}

TEST_CASE("load_dataset: empty group_item file loads with empty set") {
  TempDir dir;
  auto p = toy_paths(dir);
  p.group_train = dir.file("group_train.txt", "");
  const auto ds = load_dataset(p);
  CHECK(ds.group_item_train.empty());
  CHECK(ds.num_groups == 1);
}

TEST_CASE("load_dataset: malformed line reports file and line number") {
  TempDir dir;
  auto p = toy_paths(dir);
  p.user_train = dir.file("user_train.txt", "0\t0\nnot-a-line\n");
  try {
    load_dataset(p);
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("user_train.txt:2") != std::string::npos);
  }
}

TEST_CASE("load_dataset: duplicate test entry for the same group is an error") {
  TempDir dir;
  auto p = toy_paths(dir);
  p.group_train = dir.file("group_train.txt", "");
  p.group_test = dir.file("group_test.txt", "0\t0\n0\t0\n");
  CHECK_THROWS_AS(load_dataset(p), LoadError);
}

TEST_CASE("load_dataset: test pair duplicated in training set is an error") {
  TempDir dir;
  auto p = toy_paths(dir);
  p.user_test = dir.file("user_test.txt", "0\t0\n");
  CHECK_THROWS_AS(load_dataset(p), LoadError);
}

TEST_CASE("load_dataset: negative list containing a positive is an error") {
  TempDir dir;
  auto p = toy_paths(dir);
  p.user_test = dir.file("user_test.txt", "");
  p.user_negatives = dir.file("user_negatives.txt", "0\t0\n");
  CHECK_THROWS_AS(load_dataset(p), LoadError);
}

TEST_CASE("load_dataset: negative list containing the held-out item is an error") {
  TempDir dir;
  DatasetPaths p;
  p.user_train = dir.file("user_train.txt", "0\t0\n1\t0\n1\t1\n");
  p.user_test = dir.file("user_test.txt", "0\t1\n");
  p.group_train = dir.file("group_train.txt", "0\t0\n");
  p.group_test = dir.file("group_test.txt", "");
  p.members = dir.file("group_members.txt", "0\t0,1\n");
  p.user_negatives = dir.file("user_negatives.txt", "0\t1\n");
  CHECK_THROWS_AS(load_dataset(p), LoadError);
}

TEST_CASE("load_dataset: duplicate group members are an error") {
  TempDir dir;
  auto p = toy_paths(dir);
  p.members = dir.file("group_members.txt", "0\t0,0\n");
  CHECK_THROWS_AS(load_dataset(p), LoadError);
}

TEST_CASE("dataset_stats: toy corpus averages") {
  TempDir dir;
  const auto ds = load_dataset(toy_paths(dir));
  const auto s = dataset_stats(ds);
  CHECK(s.avg_group_size == doctest::Approx(2.0));
  CHECK(s.user_item_interactions == 2);
  CHECK(s.group_item_interactions == 1);
}

TEST_CASE("round trip: save then reload yields an identical dataset") {
  const auto ds = generate_synthetic(SyntheticSpec{});
  TempDir dir;
  const auto out = (dir.path / "canonical").string();
  save_dataset(ds, out);
  const auto again = load_dataset(out);
  CHECK(datasets_equal(ds, again));
}

TEST_CASE("AGREE-style layout converts to the canonical model") {
  TempDir dir;
  dir.file("userRatingTrain.txt", "10 7 1\n10 9 1\n12 7 1\n");
  dir.file("userRatingTest.txt", "10 5\n12 9\n");
  dir.file("groupRatingTrain.txt", "100 7\n");
  dir.file("groupRatingTest.txt", "100 9\n");
  dir.file("groupMember.txt", "100 10,12\n");
  dir.file("userRatingNegative.txt", "(10,5) 3 4\n");
  const auto ds = load_agree_layout(dir.path.string(),
                                    (dir.path / "maps").string());
  CHECK(ds.num_users == 2);
  CHECK(ds.num_groups == 1);
  // raw ids 7,9,5,3,4 densified in first-seen order
  CHECK(ds.num_items == 5);
  CHECK(ds.user_item_train.count({0, 0}) == 1);  // 10-7
  CHECK(ds.user_item_test.size() == 2);
  CHECK(ds.eval_negatives_user.at(0).size() == 2);
  CHECK(fs::exists(dir.path / "maps" / "id_map_item.txt"));
}

// Real-data check, runs only when the public corpus is present.
TEST_CASE("mafengwo: published corpus statistics") {
  if (!fs::exists("data/mafengwo")) {
    MESSAGE("data/mafengwo not present; skipping real-corpus statistics");
    return;
  }
  const auto ds = load_dataset("data/mafengwo");
  const auto s = dataset_stats(ds);
  CHECK(s.num_users == 5275);
  CHECK(s.num_items == 1513);
  CHECK(s.num_groups == 995);
  CHECK(s.user_item_interactions == 39761);
  CHECK(s.group_item_interactions == 3595);
  CHECK(s.avg_group_size == doctest::Approx(7.19).epsilon(0.01));
}
