#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "graphmix/dataset.hpp"
#include "test_util.hpp"

using namespace graphmix;
namespace fs = std::filesystem;

namespace {

fs::path fixture_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("graphmix_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

// two graphs: a triangle (label 1) and a single edge (label -1)
fs::path triangle_edge_fixture() {
  const auto dir = fixture_dir("tu_fixture");
  write_file(dir / "tiny_A.txt",
             "1, 2\n2, 1\n1, 3\n3, 1\n2, 3\n3, 2\n4, 5\n5, 4\n");
  write_file(dir / "tiny_graph_indicator.txt", "1\n1\n1\n2\n2\n");
  write_file(dir / "tiny_graph_labels.txt", "1\n-1\n");
  return dir;
}

std::multiset<int> degree_multiset(const GraphInstance& g) {
  std::multiset<int> out;
  for (int v = 0; v < g.num_nodes(); ++v) {
    out.insert(static_cast<int>(degree(g, v)));
  }
  return out;
}

}  // namespace

TEST_CASE("load_tu_dataset recovers hand-written structures") {
  const auto dir = triangle_edge_fixture();
  const Dataset ds = load_tu_dataset(dir.string(), "tiny");
  REQUIRE(ds.size() == 2);
  CHECK(ds.num_classes == 2);
  CHECK(ds.feature_dim == 0);

  CHECK(ds.graphs[0].num_nodes() == 3);
  CHECK(ds.graphs[0].edges().size() == 3);
  CHECK(ds.graphs[0].label() == 1);  // raw label 1 maps above raw -1
  CHECK(ds.graphs[1].num_nodes() == 2);
  CHECK(ds.graphs[1].edges().size() == 1);
  CHECK(ds.graphs[1].label() == 0);
}

TEST_CASE("load_tu_dataset deduplicates directed edge pairs") {
  const auto dir = fixture_dir("tu_dedup");
  write_file(dir / "d_A.txt", "1, 2\n2, 1\n");
  write_file(dir / "d_graph_indicator.txt", "1\n1\n");
  write_file(dir / "d_graph_labels.txt", "0\n");
  const Dataset ds = load_tu_dataset(dir.string(), "d");
  CHECK(ds.graphs[0].edges().size() == 1);
}

TEST_CASE("load_tu_dataset parses node labels and attributes") {
  const auto dir = fixture_dir("tu_feat");
  write_file(dir / "f_A.txt", "1, 2\n2, 1\n");
  write_file(dir / "f_graph_indicator.txt", "1\n1\n");
  write_file(dir / "f_graph_labels.txt", "0\n");
  write_file(dir / "f_node_labels.txt", "7\n9\n");
  write_file(dir / "f_node_attributes.txt", "1.5, -2.0\n0.0, 3.25\n");
  const Dataset ds = load_tu_dataset(dir.string(), "f");
  CHECK(ds.feature_dim == 4);  // 2 one-hot + 2 continuous
  CHECK(ds.num_onehot_dims == 2);
  const Matrix& x = ds.graphs[0].features();
  CHECK(x(0, 0) == doctest::Approx(1.0));  // label 7 -> first one-hot slot
  CHECK(x(0, 1) == doctest::Approx(0.0));
  CHECK(x(1, 1) == doctest::Approx(1.0));
  CHECK(x(0, 2) == doctest::Approx(1.5));
  CHECK(x(1, 3) == doctest::Approx(3.25));
}

TEST_CASE("load_tu_dataset errors") {
  const auto dir = fixture_dir("tu_bad");
  CHECK_THROWS(load_tu_dataset(dir.string(), "missing"));

  // edge crossing two graphs
  write_file(dir / "x_A.txt", "1, 2\n2, 1\n");
  write_file(dir / "x_graph_indicator.txt", "1\n2\n");
  write_file(dir / "x_graph_labels.txt", "0\n1\n");
  CHECK_THROWS(load_tu_dataset(dir.string(), "x"));

  // indicator outside the declared graph range
  write_file(dir / "y_A.txt", "");
  write_file(dir / "y_graph_indicator.txt", "1\n3\n");
  write_file(dir / "y_graph_labels.txt", "0\n1\n");
  CHECK_THROWS(load_tu_dataset(dir.string(), "y"));
}

TEST_CASE("attach_degree_features") {
  Dataset ds;
  ds.name = "deg";
  ds.num_classes = 2;
  ds.feature_dim = 1;
  ds.graphs.push_back(testutil::make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}, 0));
  std::vector<Edge> star = {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}};
  ds.graphs.push_back(testutil::make_graph(4, std::move(star), 1));
  ds.graphs.push_back(testutil::make_graph(1, {}, 0));

  const Dataset out = attach_degree_features(ds);
  CHECK(out.feature_dim == 1);
  for (int v = 0; v < 3; ++v) CHECK(out.graphs[0].features()(v, 0) == doctest::Approx(2.0));
  CHECK(out.graphs[1].features()(0, 0) == doctest::Approx(3.0));
  for (int v = 1; v < 4; ++v) CHECK(out.graphs[1].features()(v, 0) == doctest::Approx(1.0));
  CHECK(out.graphs[2].features()(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("standardize") {
  Dataset ds;
  ds.name = "std";
  ds.num_classes = 2;
  ds.feature_dim = 2;
  {
    Matrix x(2, 2);
    x(0, 0) = 5.0; x(0, 1) = 0.0;
    x(1, 0) = 5.0; x(1, 1) = 2.0;
    ds.graphs.emplace_back(2, std::vector<Edge>{{0, 1, 1.0}}, std::move(x), 0);
  }
  const FeatureStats stats = compute_feature_stats(ds, {0});
  CHECK(stats.mean[0] == doctest::Approx(5.0));
  CHECK(stats.stddev[0] == doctest::Approx(0.0));
  CHECK(stats.mean[1] == doctest::Approx(1.0));
  CHECK(stats.stddev[1] == doctest::Approx(1.0));

  const Dataset out = standardize(ds, stats);
  CHECK(out.graphs[0].features()(0, 0) == doctest::Approx(0.0));  // constant column -> zeros
  CHECK(out.graphs[0].features()(1, 0) == doctest::Approx(0.0));
  CHECK(out.graphs[0].features()(0, 1) == doctest::Approx(-1.0));
  CHECK(out.graphs[0].features()(1, 1) == doctest::Approx(1.0));

  // recomputed stats of the standardized data: mean 0, std 1
  const FeatureStats post = compute_feature_stats(out, {0});
  CHECK(post.mean[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(post.stddev[1] == doctest::Approx(1.0).epsilon(1e-9));

  // idempotent given fixed stats on a varying column
  const Dataset twice = standardize(out, compute_feature_stats(out, {0}));
  CHECK(twice.graphs[0].features()(0, 1) == doctest::Approx(-1.0));
}

TEST_CASE("standardize skips one-hot columns") {
  Dataset ds;
  ds.name = "oh";
  ds.num_classes = 2;
  ds.feature_dim = 2;
  ds.num_onehot_dims = 1;
  Matrix x(2, 2);
  x(0, 0) = 1.0; x(0, 1) = 10.0;
  x(1, 0) = 0.0; x(1, 1) = 20.0;
  ds.graphs.emplace_back(2, std::vector<Edge>{{0, 1, 1.0}}, std::move(x), 0);
  const Dataset out = standardize(ds, compute_feature_stats(ds, {0}));
  CHECK(out.graphs[0].features()(0, 0) == doctest::Approx(1.0));  // untouched
  CHECK(out.graphs[0].features()(0, 1) == doctest::Approx(-1.0));
}

TEST_CASE("stratified_kfold") {
  Dataset ds;
  ds.name = "folds";
  ds.num_classes = 2;
  ds.feature_dim = 1;
  for (int i = 0; i < 10; ++i) {
    ds.graphs.push_back(testutil::make_graph(2, {{0, 1, 1.0}}, i % 2));
  }
  const auto splits = stratified_kfold(ds, 5, 3);
  REQUIRE(splits.size() == 5);

  std::set<int> all_test;
  for (int f = 0; f < 5; ++f) {
    const auto test = splits[static_cast<std::size_t>(f)].indices(Part::Test);
    REQUIRE(test.size() == 2);
    // one graph of each class in every test fold
    CHECK(ds.graphs[static_cast<std::size_t>(test[0])].label() !=
          ds.graphs[static_cast<std::size_t>(test[1])].label());
    for (int idx : test) all_test.insert(idx);
    // exhaustive, disjoint partition
    const auto train = splits[static_cast<std::size_t>(f)].indices(Part::Train);
    const auto val = splits[static_cast<std::size_t>(f)].indices(Part::Val);
    CHECK(train.size() + val.size() + test.size() == ds.size());
  }
  CHECK(all_test.size() == 10);  // union of test folds covers everything

  // determinism
  const auto again = stratified_kfold(ds, 5, 3);
  for (int f = 0; f < 5; ++f) {
    CHECK(splits[static_cast<std::size_t>(f)].assignment ==
          again[static_cast<std::size_t>(f)].assignment);
  }

  // class with < k members
  Dataset small = ds;
  small.graphs.push_back(testutil::make_graph(2, {{0, 1, 1.0}}, 1));
  small.num_classes = 3;
  small.graphs.push_back(testutil::make_graph(2, {{0, 1, 1.0}}, 2));
  CHECK_THROWS_WITH_AS(stratified_kfold(small, 5, 3) /* class 2 has 1 member */,
                       doctest::Contains("class 2"), std::invalid_argument);
}

TEST_CASE("stratified_kfold keeps per-class fold counts within one") {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    Dataset ds;
    ds.name = "t";
    ds.num_classes = 2 + rng.index(3);
    ds.feature_dim = 1;
    const int n = 30 + rng.index(40);
    for (int i = 0; i < n; ++i) {
      ds.graphs.push_back(testutil::make_graph(2, {{0, 1, 1.0}}, rng.index(static_cast<std::size_t>(ds.num_classes))));
    }
    // top up any class below k
    std::vector<int> counts(static_cast<std::size_t>(ds.num_classes), 0);
    for (const auto& g : ds.graphs) counts[static_cast<std::size_t>(g.label())]++;
    for (int c = 0; c < ds.num_classes; ++c) {
      while (counts[static_cast<std::size_t>(c)] < 5) {
        ds.graphs.push_back(testutil::make_graph(2, {{0, 1, 1.0}}, c));
        counts[static_cast<std::size_t>(c)]++;
      }
    }
    const auto splits = stratified_kfold(ds, 5, trial);
    for (const auto& split : splits) {
      for (int c = 0; c < ds.num_classes; ++c) {
        int in_test = 0;
        for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
          if (ds.graphs[i].label() == c && split.assignment[i] == Part::Test) ++in_test;
        }
        const double expected = counts[static_cast<std::size_t>(c)] / 5.0;
        CHECK(std::abs(in_test - expected) <= 1.0);
      }
    }
  }
}

TEST_CASE("synth_motif_dataset") {
  const Dataset ds = synth_motif_dataset(200, 7);
  REQUIRE(ds.size() == 200);
  int class1 = 0;
  for (const auto& g : ds.graphs) class1 += g.label();
  CHECK(class1 == 100);

  for (const auto& g : ds.graphs) {
    if (g.label() == 1) {
      CHECK(testutil::has_triangle(g));
    } else {
      CHECK_FALSE(testutil::has_triangle(g));
    }
    // degree features
    for (int v = 0; v < g.num_nodes(); ++v) {
      CHECK(g.features()(v, 0) == doctest::Approx(degree(g, v)));
    }
  }

  // byte-identical under the same seed
  const Dataset again = synth_motif_dataset(200, 7);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(ds.graphs[i].num_nodes() == again.graphs[i].num_nodes());
    CHECK(testutil::edge_set(ds.graphs[i].edges()) == testutil::edge_set(again.graphs[i].edges()));
    CHECK(ds.graphs[i].features().data == again.graphs[i].features().data);
  }

  CHECK_THROWS(synth_motif_dataset(3, 0));
}

TEST_CASE("TU round-trip preserves structure and labels") {
  const Dataset ds = synth_motif_dataset(20, 13);
  const auto dir = fixture_dir("tu_roundtrip");
  save_tu_dataset(ds, dir.string());
  const Dataset back = load_tu_dataset(dir.string(), "motif");
  REQUIRE(back.size() == ds.size());
  CHECK(back.num_classes == ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.graphs[i].num_nodes() == ds.graphs[i].num_nodes());
    CHECK(back.graphs[i].label() == ds.graphs[i].label());
    CHECK(degree_multiset(back.graphs[i]) == degree_multiset(ds.graphs[i]));
  }
}
