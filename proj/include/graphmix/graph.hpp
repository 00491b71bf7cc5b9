#pragma once

#include <utility>
#include <vector>

#include "graphmix/matrix.hpp"

namespace graphmix {

using NodeId = int;

// Undirected edge, stored once with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double weight = 1.0;
};

// Ordered set of node ids of some parent graph. Construction sorts and
// deduplicates, so union/insert semantics are idempotent.
class NodeSet {
public:
  NodeSet() = default;
  explicit NodeSet(std::vector<NodeId> ids);

  bool contains(NodeId v) const;
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<NodeId>& ids() const { return ids_; }

  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

private:
  std::vector<NodeId> ids_;  // ascending, unique
};

// One undirected labeled graph: nodes 0..n-1, weighted simple edges, a
// [n x d] node feature matrix and a class label. Immutable after
// construction; the constructor validates all structural invariants.
class GraphInstance {
public:
  GraphInstance(int num_nodes, std::vector<Edge> edges, Matrix features, int label);

  int num_nodes() const { return num_nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Matrix& features() const { return features_; }
  int label() const { return label_; }
  int feature_dim() const { return features_.cols; }

  // Neighbors of v with edge weights, ascending by neighbor id.
  const std::vector<std::pair<NodeId, double>>& adjacency(NodeId v) const;
  bool has_edge(NodeId u, NodeId v) const;

  void check_node(NodeId v) const;  // throws std::out_of_range

private:
  int num_nodes_;
  std::vector<Edge> edges_;  // u < v, sorted lexicographically, unique
  Matrix features_;
  int label_;
  std::vector<std::vector<std::pair<NodeId, double>>> adj_;
};

// An induced piece of a parent graph: the kept nodes (original ids), the
// induced edges, and per-node degree deficits (degree in the parent minus
// degree within the part).
struct GraphPart {
  const GraphInstance* origin = nullptr;
  NodeSet nodes;
  std::vector<Edge> edges;           // original ids, u < v
  std::vector<double> deg_deficit;   // aligned with nodes.ids()

  bool empty() const { return nodes.empty(); }
  double deficit_of(NodeId v) const;           // throws if v not in the part
  double total_deficit() const;                // D
  std::vector<NodeId> positive_deficit_nodes() const;  // U
};

enum class Side { Source, Dest };

struct NodeOrigin {
  Side side;
  NodeId original_id;
};

// merge_disjoint output: the combined graph plus a map from each new node id
// back to (side, original id).
struct MergedGraph {
  GraphInstance graph;
  std::vector<NodeOrigin> provenance;
};

// Weighted degree of v: sum of incident edge weights.
double degree(const GraphInstance& g, NodeId v);

NodeSet neighbors(const GraphInstance& g, NodeId v);

// Part containing exactly the edges of g with both endpoints in `nodes`.
GraphPart induced_subgraph(const GraphInstance& g, const NodeSet& nodes);

// Equivalent to induced_subgraph on the complement of `drop`.
GraphPart remove_nodes(const GraphInstance& g, const NodeSet& drop);

// Combine two parts into one graph: src nodes first (ascending original id),
// then dst nodes, densely renumbered. Cross edges are given as
// (src original id, dst original id) pairs, enter with unit weight and are
// deduplicated. Feature rows are copied from the respective parents and the
// label is taken from the destination parent.
MergedGraph merge_disjoint(const GraphPart& src, const GraphPart& dst,
                           const std::vector<std::pair<NodeId, NodeId>>& cross_edges);

}  // namespace graphmix
