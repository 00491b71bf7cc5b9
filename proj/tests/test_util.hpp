#pragma once

#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include "graphmix/graph.hpp"
#include "graphmix/rng.hpp"

namespace graphmix::testutil {

// features default to a single column holding the node id, so feature-row
// copying is observable after merges
inline GraphInstance make_graph(int n, std::vector<Edge> edges, int label = 0, int feat_dim = 1) {
  Matrix features(n, feat_dim);
  for (int v = 0; v < n; ++v) {
    for (int j = 0; j < feat_dim; ++j) {
      features(v, j) = static_cast<double>(v) + 0.25 * j;
    }
  }
  return GraphInstance(n, std::move(edges), std::move(features), label);
}

inline GraphInstance path_graph(int n) {
  std::vector<Edge> edges;
  for (int v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1, 1.0});
  return make_graph(n, std::move(edges));
}

inline GraphInstance random_graph(Rng& rng, int n, double edge_prob, int feat_dim = 1,
                                  int label = 0) {
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.uniform() < edge_prob) edges.push_back({u, v, 1.0});
    }
  }
  Matrix features(n, feat_dim);
  for (auto& x : features.data) x = rng.uniform_range(-1.0, 1.0);
  return GraphInstance(n, std::move(edges), std::move(features), label);
}

// brute-force filter of the edge list against a node subset
inline std::set<std::pair<NodeId, NodeId>> brute_induced_edges(const GraphInstance& g,
                                                               const NodeSet& nodes) {
  std::set<std::pair<NodeId, NodeId>> out;
  for (const Edge& e : g.edges()) {
    if (nodes.contains(e.u) && nodes.contains(e.v)) out.insert({e.u, e.v});
  }
  return out;
}

inline std::set<std::pair<NodeId, NodeId>> edge_set(const std::vector<Edge>& edges) {
  std::set<std::pair<NodeId, NodeId>> out;
  for (const Edge& e : edges) out.insert({e.u, e.v});
  return out;
}

// exact K-hop ball by BFS (the p=100 oracle for partial_k_hop)
inline NodeSet bfs_ball(const GraphInstance& g, const NodeSet& anchors, int k) {
  std::vector<NodeId> collected(anchors.begin(), anchors.end());
  std::set<NodeId> seen(anchors.begin(), anchors.end());
  std::vector<NodeId> frontier = collected;
  for (int hop = 0; hop < k; ++hop) {
    std::set<NodeId> next;
    for (NodeId v : frontier) {
      for (const auto& [u, w] : g.adjacency(v)) {
        (void)w;
        next.insert(u);
      }
    }
    if (next.empty()) break;
    frontier.assign(next.begin(), next.end());
    for (NodeId v : frontier) {
      if (seen.insert(v).second) collected.push_back(v);
    }
  }
  return NodeSet(std::move(collected));
}

inline bool has_triangle(const GraphInstance& g) {
  const int n = g.num_nodes();
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (!g.has_edge(a, b)) continue;
      for (int c = b + 1; c < n; ++c) {
        if (g.has_edge(a, c) && g.has_edge(b, c)) return true;
      }
    }
  }
  return false;
}

// all graphs on n nodes (choose edges from all n*(n-1)/2 pairs)
inline std::vector<GraphInstance> all_graphs(int n) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) pairs.emplace_back(u, v);
  }
  std::vector<GraphInstance> out;
  const std::size_t count = std::size_t{1} << pairs.size();
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    std::vector<Edge> edges;
    for (std::size_t b = 0; b < pairs.size(); ++b) {
      if (mask & (std::size_t{1} << b)) edges.push_back({pairs[b].first, pairs[b].second, 1.0});
    }
    out.push_back(make_graph(n, std::move(edges)));
  }
  return out;
}

}  // namespace graphmix::testutil
