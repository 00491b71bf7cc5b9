#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "graphmix/graph.hpp"
#include "test_util.hpp"

using namespace graphmix;
using namespace graphmix::testutil;

TEST_CASE("GraphInstance validates invariants") {
  CHECK_THROWS(make_graph(3, {{0, 0, 1.0}}));                 // self-loop
  CHECK_THROWS(make_graph(3, {{0, 3, 1.0}}));                 // id out of range
  CHECK_THROWS(make_graph(3, {{0, 1, 1.0}, {1, 0, 1.0}}));    // duplicate after normalization
  CHECK_THROWS(make_graph(3, {{0, 1, -0.5}}));                // negative weight
  CHECK_THROWS(GraphInstance(3, {}, Matrix(2, 1), 0));        // feature rows != n
  CHECK_NOTHROW(make_graph(0, {}));                           // empty graphs are legal values
}

TEST_CASE("degree") {
  const auto path = path_graph(3);
  CHECK(degree(path, 1) == doctest::Approx(2.0));
  CHECK(degree(path, 0) == doctest::Approx(1.0));

  const auto isolated = make_graph(1, {});
  CHECK(degree(isolated, 0) == doctest::Approx(0.0));

  const auto tri = make_graph(3, {{0, 1, 0.5}, {1, 2, 0.5}, {0, 2, 0.5}});
  for (NodeId v = 0; v < 3; ++v) CHECK(degree(tri, v) == doctest::Approx(1.0));

  CHECK_THROWS(degree(path, 5));
  CHECK_THROWS(degree(path, -1));
}

TEST_CASE("neighbors") {
  const auto path = path_graph(3);
  CHECK(neighbors(path, 1).ids() == std::vector<NodeId>{0, 2});
  CHECK(neighbors(make_graph(2, {}), 0).empty());

  std::vector<Edge> star;
  for (int leaf = 1; leaf <= 5; ++leaf) star.push_back({0, leaf, 1.0});
  const auto k15 = make_graph(6, std::move(star));
  CHECK(neighbors(k15, 0).ids() == std::vector<NodeId>{1, 2, 3, 4, 5});
  CHECK_THROWS(neighbors(path, 7));
}

TEST_CASE("induced_subgraph on the triangle") {
  const auto tri = make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
  const auto part = induced_subgraph(tri, NodeSet({0, 1}));
  REQUIRE(part.edges.size() == 1);
  CHECK(part.edges[0].u == 0);
  CHECK(part.edges[0].v == 1);
  CHECK(part.deficit_of(0) == doctest::Approx(1.0));
  CHECK(part.deficit_of(1) == doctest::Approx(1.0));

  const auto all = induced_subgraph(tri, NodeSet({0, 1, 2}));
  CHECK(all.edges.size() == 3);
  CHECK(all.total_deficit() == doctest::Approx(0.0));
  CHECK(all.positive_deficit_nodes().empty());
}

TEST_CASE("induced_subgraph matches the brute-force filter exhaustively on small graphs") {
  for (int n = 1; n <= 4; ++n) {
    for (const auto& g : all_graphs(n)) {
      for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<NodeId> ids;
        for (int v = 0; v < n; ++v) {
          if (mask & (std::size_t{1} << v)) ids.push_back(v);
        }
        const NodeSet nodes(ids);
        const auto part = induced_subgraph(g, nodes);
        CHECK(edge_set(part.edges) == brute_induced_edges(g, nodes));
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          double inside = 0.0;
          for (const auto& [u, w] : g.adjacency(nodes.ids()[i])) {
            if (nodes.contains(u)) inside += w;
          }
          CHECK(part.deg_deficit[i] ==
                doctest::Approx(degree(g, nodes.ids()[i]) - inside).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("remove_nodes equals induced_subgraph on the complement") {
  const auto path = path_graph(3);
  const auto part = remove_nodes(path, NodeSet({1}));
  CHECK(part.nodes.ids() == std::vector<NodeId>{0, 2});
  CHECK(part.edges.empty());
  CHECK(part.deficit_of(0) == doctest::Approx(1.0));
  CHECK(part.deficit_of(2) == doctest::Approx(1.0));

  const auto whole = remove_nodes(path, NodeSet());
  CHECK(whole.nodes.size() == 3);
  CHECK(whole.total_deficit() == doctest::Approx(0.0));

  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = random_graph(rng, 6, 0.4);
    std::vector<NodeId> drop_ids;
    for (int v = 0; v < 6; ++v) {
      if (rng.uniform() < 0.5) drop_ids.push_back(v);
    }
    const NodeSet drop(drop_ids);
    std::vector<NodeId> keep_ids;
    for (int v = 0; v < 6; ++v) {
      if (!drop.contains(v)) keep_ids.push_back(v);
    }
    const auto a = remove_nodes(g, drop);
    const auto b = induced_subgraph(g, NodeSet(keep_ids));
    CHECK(a.nodes.ids() == b.nodes.ids());
    CHECK(edge_set(a.edges) == edge_set(b.edges));
    CHECK(a.deg_deficit == b.deg_deficit);
  }
}

TEST_CASE("total deficit counts cut-edge endpoints inside the part") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = random_graph(rng, 7, 0.35);
    std::vector<NodeId> ids;
    for (int v = 0; v < 7; ++v) {
      if (rng.uniform() < 0.5) ids.push_back(v);
    }
    const NodeSet nodes(ids);
    const auto part = induced_subgraph(g, nodes);
    int cut_endpoints = 0;
    for (const Edge& e : g.edges()) {
      if (nodes.contains(e.u) != nodes.contains(e.v)) ++cut_endpoints;
    }
    CHECK(part.total_deficit() == doctest::Approx(static_cast<double>(cut_endpoints)));
  }
}

TEST_CASE("merge_disjoint basics") {
  const auto a = make_graph(1, {}, 3);
  const auto b = make_graph(1, {}, 5);
  const auto pa = induced_subgraph(a, NodeSet({0}));
  const auto pb = induced_subgraph(b, NodeSet({0}));

  const auto merged = merge_disjoint(pa, pb, {{0, 0}});
  CHECK(merged.graph.num_nodes() == 2);
  CHECK(merged.graph.edges().size() == 1);
  CHECK(merged.graph.label() == 5);  // destination parent label
  CHECK(merged.provenance[0].side == Side::Source);
  CHECK(merged.provenance[1].side == Side::Dest);

  const auto disconnected = merge_disjoint(pa, pb, {});
  CHECK(disconnected.graph.edges().empty());

  // duplicate cross edges collapse
  const auto dup = merge_disjoint(pa, pb, {{0, 0}, {0, 0}});
  CHECK(dup.graph.edges().size() == 1);

  CHECK_THROWS(merge_disjoint(pa, pb, {{1, 0}}));  // invalid endpoint
}

TEST_CASE("merge_disjoint counting and provenance over random parts") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ga = random_graph(rng, 3 + rng.index(5), 0.5);
    const auto gb = random_graph(rng, 3 + rng.index(5), 0.5);
    std::vector<NodeId> ia, ib;
    for (int v = 0; v < ga.num_nodes(); ++v) {
      if (rng.uniform() < 0.6) ia.push_back(v);
    }
    for (int v = 0; v < gb.num_nodes(); ++v) {
      if (rng.uniform() < 0.6) ib.push_back(v);
    }
    const auto pa = induced_subgraph(ga, NodeSet(ia));
    const auto pb = induced_subgraph(gb, NodeSet(ib));

    std::set<std::pair<NodeId, NodeId>> cross;
    for (NodeId u : pa.nodes) {
      for (NodeId v : pb.nodes) {
        if (rng.uniform() < 0.2) cross.insert({u, v});
      }
    }
    const std::vector<std::pair<NodeId, NodeId>> cross_vec(cross.begin(), cross.end());
    const auto merged = merge_disjoint(pa, pb, cross_vec);

    CHECK(merged.graph.num_nodes() ==
          static_cast<int>(pa.nodes.size()) + static_cast<int>(pb.nodes.size()));
    CHECK(merged.graph.edges().size() == pa.edges.size() + pb.edges.size() + cross.size());
    // provenance is a bijection onto the new id range
    CHECK(merged.provenance.size() == static_cast<std::size_t>(merged.graph.num_nodes()));
    std::set<std::pair<int, NodeId>> origins;
    for (const auto& o : merged.provenance) {
      origins.insert({o.side == Side::Source ? 0 : 1, o.original_id});
    }
    CHECK(origins.size() == merged.provenance.size());
    // feature rows come from the right parent
    for (std::size_t nid = 0; nid < merged.provenance.size(); ++nid) {
      const auto& o = merged.provenance[nid];
      const GraphInstance& parent = o.side == Side::Source ? ga : gb;
      CHECK(merged.graph.features()(static_cast<int>(nid), 0) ==
            doctest::Approx(parent.features()(o.original_id, 0)));
    }
  }
}

TEST_CASE("operations leave inputs unmodified") {
  const auto g = make_graph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  const auto edges_before = g.edges();
  const auto features_before = g.features().data;
  (void)induced_subgraph(g, NodeSet({0, 1}));
  (void)remove_nodes(g, NodeSet({2}));
  (void)neighbors(g, 1);
  (void)degree(g, 0);
  CHECK(g.edges().size() == edges_before.size());
  CHECK(g.features().data == features_before);
}
