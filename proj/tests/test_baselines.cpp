#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "graphmix/baselines.hpp"
#include "test_util.hpp"

using namespace graphmix;
using namespace graphmix::testutil;

TEST_CASE("drop_nodes") {
  Rng rng(3);
  const auto g = random_graph(rng, 10, 0.4, 2, 1);

  // zero ratio drops nothing
  const auto same = drop_nodes(g, 0.0, rng);
  CHECK(same.num_nodes() == 10);
  CHECK(edge_set(same.edges()) == edge_set(g.edges()));

  const auto eight = drop_nodes(g, 0.2, rng);
  CHECK(eight.num_nodes() == 8);
  CHECK(eight.label() == 1);

  // would-empty graph returns the original
  const auto single = make_graph(1, {});
  CHECK(drop_nodes(single, 0.9, rng).num_nodes() == 1);

  // surviving edge set equals the brute-force filter (checked via degree sums
  // against a fresh induced subgraph of surviving original ids is not
  // observable after remapping; instead check the invariant counts)
  for (int trial = 0; trial < 50; ++trial) {
    const auto h = random_graph(rng, 9, 0.5);
    const auto dropped = drop_nodes(h, 0.3, rng);
    CHECK(dropped.num_nodes() == 6);
    // every surviving edge must map to an original edge: degrees bounded
    for (int v = 0; v < dropped.num_nodes(); ++v) {
      CHECK(degree(dropped, v) <= 8.0);
    }
    CHECK(dropped.edges().size() <= h.edges().size());
  }
}

TEST_CASE("drop_nodes surviving structure matches a brute-force filter") {
  // features hold original node ids, so the node mapping is recoverable
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = make_graph(8, random_graph(rng, 8, 0.5).edges());
    const auto out = drop_nodes(g, 0.25, rng);
    REQUIRE(out.num_nodes() == 6);
    std::vector<NodeId> orig_ids;
    for (int v = 0; v < out.num_nodes(); ++v) {
      orig_ids.push_back(static_cast<NodeId>(out.features()(v, 0)));
    }
    const NodeSet kept(orig_ids);
    const auto expect = brute_induced_edges(g, kept);
    std::set<std::pair<NodeId, NodeId>> got;
    for (const Edge& e : out.edges()) {
      NodeId a = orig_ids[static_cast<std::size_t>(e.u)];
      NodeId b = orig_ids[static_cast<std::size_t>(e.v)];
      got.insert({std::min(a, b), std::max(a, b)});
    }
    CHECK(got == expect);
  }
}

TEST_CASE("perturb_edges") {
  Rng rng(7);
  const auto g = random_graph(rng, 8, 0.35, 1, 0);

  const auto same = perturb_edges(g, 1e-9, rng);
  CHECK(edge_set(same.edges()) == edge_set(g.edges()));

  for (int trial = 0; trial < 100; ++trial) {
    const auto h = random_graph(rng, 8, 0.35);
    if (h.edges().size() < 3) continue;
    const auto out = perturb_edges(h, 0.4, rng);
    const int m = static_cast<int>(0.4 * static_cast<double>(h.edges().size()));
    const long non_edges = 8L * 7 / 2 - static_cast<long>(h.edges().size());
    if (non_edges >= m) {
      CHECK(out.edges().size() == h.edges().size());  // |E| preserved
    }
    // added edges are disjoint from the original edge set
    const auto orig = edge_set(h.edges());
    int added = 0;
    for (const Edge& e : out.edges()) {
      if (!orig.count({e.u, e.v})) ++added;
    }
    CHECK(added == std::min<long>(m, non_edges));
    CHECK(out.num_nodes() == 8);
  }

  // not enough non-edges: complete graph minus nothing, removals still happen
  std::vector<Edge> all;
  for (NodeId u = 0; u < 5; ++u) {
    for (NodeId v = u + 1; v < 5; ++v) all.push_back({u, v, 1.0});
  }
  const auto complete = make_graph(5, std::move(all));
  const auto pert = perturb_edges(complete, 0.4, rng);
  // 4 removed, 4 wanted but only removed slots exist as non-edges of the
  // original graph: none exist, so only removals remain
  CHECK(pert.edges().size() == complete.edges().size() - 4);
}

TEST_CASE("mask_attrs") {
  Rng rng(11);
  const auto g = random_graph(rng, 10, 0.3, 4, 1);

  const auto same = mask_attrs(g, 0.05, rng);  // floor(0.5) = 0 rows
  CHECK(same.features().data == g.features().data);

  const auto out = mask_attrs(g, 0.42, rng);  // floor(4.2) = 4 rows
  CHECK(edge_set(out.edges()) == edge_set(g.edges()));
  int zero_rows = 0;
  for (int v = 0; v < 10; ++v) {
    bool all_zero = true;
    bool all_same = true;
    for (int j = 0; j < 4; ++j) {
      if (out.features()(v, j) != 0.0) all_zero = false;
      if (out.features()(v, j) != g.features()(v, j)) all_same = false;
    }
    CHECK((all_zero || all_same));
    if (all_zero && !all_same) ++zero_rows;
  }
  CHECK(zero_rows == 4);
}

TEST_CASE("subgraph_rw") {
  Rng rng(13);
  // dense connected graph, keep everything: the walk covers it within the
  // step budget essentially always; the sparse path usually but not always
  std::vector<Edge> k5;
  for (NodeId u = 0; u < 5; ++u) {
    for (NodeId v = u + 1; v < 5; ++v) k5.push_back({u, v, 1.0});
  }
  const auto complete = make_graph(5, std::move(k5));
  int full = 0;
  for (int t = 0; t < 1000; ++t) {
    if (subgraph_rw(complete, 1.0, rng).num_nodes() == 5) ++full;
  }
  CHECK(full == 1000);

  const auto path = path_graph(6);
  int covered = 0;
  for (int t = 0; t < 1000; ++t) {
    if (subgraph_rw(path, 1.0, rng).num_nodes() == 6) ++covered;
  }
  CHECK(covered > 850);

  // node count never exceeds the target
  for (int t = 0; t < 200; ++t) {
    const auto g = random_graph(rng, 9, 0.3);
    const auto out = subgraph_rw(g, 0.6, rng);
    CHECK(out.num_nodes() <= 6);  // ceil(0.6*9)
    CHECK(out.num_nodes() >= 1);
    CHECK(out.label() == g.label());
  }

  // induced-subgraph property via id-carrying features
  for (int t = 0; t < 50; ++t) {
    const auto g = make_graph(8, random_graph(rng, 8, 0.5).edges());
    const auto out = subgraph_rw(g, 0.7, rng);
    std::vector<NodeId> orig;
    for (int v = 0; v < out.num_nodes(); ++v) {
      orig.push_back(static_cast<NodeId>(out.features()(v, 0)));
    }
    const auto expect = brute_induced_edges(g, NodeSet(orig));
    CHECK(out.edges().size() == expect.size());
  }

  // determinism
  Rng ra(5), rb(5);
  const auto g = random_graph(ra, 7, 0.4);
  Rng ga(77), gb(77);
  const auto o1 = subgraph_rw(g, 0.5, ga);
  const auto o2 = subgraph_rw(g, 0.5, gb);
  CHECK(o1.num_nodes() == o2.num_nodes());
  CHECK(edge_set(o1.edges()) == edge_set(o2.edges()));
}

TEST_CASE("manifold_mixup_combine") {
  Rng rng(17);
  std::vector<double> a = {1.0, 2.0, 3.0};
  std::vector<double> b = {-1.0, 0.0, 5.0};
  for (int t = 0; t < 100; ++t) {
    const MixedRepr mix = manifold_mixup_combine(a, b, 0, 2, 3, 2.0, rng);
    CHECK(mix.lambda >= 0.0);
    CHECK(mix.lambda <= 1.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(mix.repr[i] ==
            doctest::Approx((1.0 - mix.lambda) * a[i] + mix.lambda * b[i]).epsilon(1e-12));
    }
    double label_sum = 0.0;
    for (double w : mix.label) label_sum += w;
    CHECK(label_sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mix.label[0] == doctest::Approx(1.0 - mix.lambda));
    CHECK(mix.label[2] == doctest::Approx(mix.lambda));
    CHECK(mix.label[1] == doctest::Approx(0.0));
  }

  // same label on both sides concentrates the mixed label
  const MixedRepr same = manifold_mixup_combine(a, b, 1, 1, 3, 2.0, rng);
  CHECK(same.label[1] == doctest::Approx(1.0));
  CHECK_THROWS(manifold_mixup_combine(a, std::vector<double>{1.0}, 0, 1, 2, 2.0, rng));
}

TEST_CASE("BaselineConfig validation and dispatch") {
  BaselineConfig cfg;
  cfg.ratio = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg.ratio = 1.0;
  CHECK_THROWS(cfg.validate());
  cfg.ratio = 0.2;
  CHECK_NOTHROW(cfg.validate());

  Rng rng(19);
  const auto g = random_graph(rng, 8, 0.4, 2, 1);
  for (BaselineKind kind :
       {BaselineKind::DropN, BaselineKind::PermE, BaselineKind::MaskN, BaselineKind::SubG}) {
    cfg.kind = kind;
    cfg.ratio = kind == BaselineKind::SubG ? 0.8 : 0.2;
    const auto out = apply_structural_baseline(g, cfg, rng);
    CHECK(out.label() == g.label());  // original label kept
    CHECK(out.num_nodes() >= 1);
  }
  cfg.kind = BaselineKind::ManifoldMixup;
  CHECK_THROWS(apply_structural_baseline(g, cfg, rng));
}
