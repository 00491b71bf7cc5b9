#include "graphmix/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace graphmix {

NodeSet::NodeSet(std::vector<NodeId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool NodeSet::contains(NodeId v) const {
  return std::binary_search(ids_.begin(), ids_.end(), v);
}

GraphInstance::GraphInstance(int num_nodes, std::vector<Edge> edges, Matrix features, int label)
    : num_nodes_(num_nodes), edges_(std::move(edges)), features_(std::move(features)), label_(label) {
  if (num_nodes_ < 0) {
    throw std::invalid_argument("GraphInstance: negative node count");
  }
  if (features_.rows != num_nodes_) {
    throw std::invalid_argument("GraphInstance: feature rows (" + std::to_string(features_.rows) +
                                ") != num_nodes (" + std::to_string(num_nodes_) + ")");
  }
  for (Edge& e : edges_) {
    if (e.u == e.v) {
      throw std::invalid_argument("GraphInstance: self-loop on node " + std::to_string(e.u));
    }
    if (e.u < 0 || e.u >= num_nodes_ || e.v < 0 || e.v >= num_nodes_) {
      throw std::invalid_argument("GraphInstance: edge endpoint out of range");
    }
    if (e.weight < 0.0) {
      throw std::invalid_argument("GraphInstance: negative edge weight");
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v) {
      throw std::invalid_argument("GraphInstance: duplicate edge (" + std::to_string(edges_[i].u) +
                                  "," + std::to_string(edges_[i].v) + ")");
    }
  }
  adj_.resize(static_cast<std::size_t>(num_nodes_));
  for (const Edge& e : edges_) {
    adj_[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.weight);
    adj_[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.weight);
  }
  for (auto& nb : adj_) {
    std::sort(nb.begin(), nb.end());
  }
}

void GraphInstance::check_node(NodeId v) const {
  if (v < 0 || v >= num_nodes_) {
    throw std::out_of_range("node id " + std::to_string(v) + " out of range [0," +
                            std::to_string(num_nodes_) + ")");
  }
}

const std::vector<std::pair<NodeId, double>>& GraphInstance::adjacency(NodeId v) const {
  check_node(v);
  return adj_[static_cast<std::size_t>(v)];
}

bool GraphInstance::has_edge(NodeId u, NodeId v) const {
  check_node(u);
  check_node(v);
  const auto& nb = adj_[static_cast<std::size_t>(u)];
  auto it = std::lower_bound(nb.begin(), nb.end(), std::make_pair(v, 0.0),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
  return it != nb.end() && it->first == v;
}

double GraphPart::deficit_of(NodeId v) const {
  const auto& ids = nodes.ids();
  auto it = std::lower_bound(ids.begin(), ids.end(), v);
  if (it == ids.end() || *it != v) {
    throw std::out_of_range("node " + std::to_string(v) + " not in part");
  }
  return deg_deficit[static_cast<std::size_t>(it - ids.begin())];
}

double GraphPart::total_deficit() const {
  double d = 0.0;
  for (double x : deg_deficit) d += x;
  return d;
}

std::vector<NodeId> GraphPart::positive_deficit_nodes() const {
  std::vector<NodeId> out;
  const auto& ids = nodes.ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (deg_deficit[i] > 0.0) out.push_back(ids[i]);
  }
  return out;
}

double degree(const GraphInstance& g, NodeId v) {
  double d = 0.0;
  for (const auto& [u, w] : g.adjacency(v)) {
    (void)u;
    d += w;
  }
  return d;
}

NodeSet neighbors(const GraphInstance& g, NodeId v) {
  std::vector<NodeId> ids;
  ids.reserve(g.adjacency(v).size());
  for (const auto& [u, w] : g.adjacency(v)) {
    (void)w;
    ids.push_back(u);
  }
  return NodeSet(std::move(ids));
}

GraphPart induced_subgraph(const GraphInstance& g, const NodeSet& nodes) {
  for (NodeId v : nodes) g.check_node(v);
  GraphPart part;
  part.origin = &g;
  part.nodes = nodes;
  for (const Edge& e : g.edges()) {
    if (nodes.contains(e.u) && nodes.contains(e.v)) {
      part.edges.push_back(e);
    }
  }
  part.deg_deficit.resize(nodes.size(), 0.0);
  const auto& ids = nodes.ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double inside = 0.0;
    for (const auto& [u, w] : g.adjacency(ids[i])) {
      if (nodes.contains(u)) inside += w;
    }
    part.deg_deficit[i] = degree(g, ids[i]) - inside;
  }
  return part;
}

GraphPart remove_nodes(const GraphInstance& g, const NodeSet& drop) {
  for (NodeId v : drop) g.check_node(v);
  std::vector<NodeId> keep;
  keep.reserve(static_cast<std::size_t>(g.num_nodes()));
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (!drop.contains(v)) keep.push_back(v);
  }
  return induced_subgraph(g, NodeSet(std::move(keep)));
}

MergedGraph merge_disjoint(const GraphPart& src, const GraphPart& dst,
                           const std::vector<std::pair<NodeId, NodeId>>& cross_edges) {
  if ((!src.empty() && src.origin == nullptr) || (!dst.empty() && dst.origin == nullptr)) {
    throw std::invalid_argument("merge_disjoint: non-empty part without origin graph");
  }
  const int n_src = static_cast<int>(src.nodes.size());
  const int n_dst = static_cast<int>(dst.nodes.size());
  const int n = n_src + n_dst;

  std::unordered_map<NodeId, NodeId> src_map, dst_map;
  std::vector<NodeOrigin> provenance;
  provenance.reserve(static_cast<std::size_t>(n));
  int next = 0;
  for (NodeId v : src.nodes) {
    src_map[v] = next++;
    provenance.push_back({Side::Source, v});
  }
  for (NodeId v : dst.nodes) {
    dst_map[v] = next++;
    provenance.push_back({Side::Dest, v});
  }

  std::vector<Edge> edges;
  edges.reserve(src.edges.size() + dst.edges.size() + cross_edges.size());
  for (const Edge& e : src.edges) {
    edges.push_back({src_map.at(e.u), src_map.at(e.v), e.weight});
  }
  for (const Edge& e : dst.edges) {
    edges.push_back({dst_map.at(e.u), dst_map.at(e.v), e.weight});
  }
  std::vector<std::pair<NodeId, NodeId>> cross;
  cross.reserve(cross_edges.size());
  for (const auto& [su, dv] : cross_edges) {
    auto sit = src_map.find(su);
    auto dit = dst_map.find(dv);
    if (sit == src_map.end() || dit == dst_map.end()) {
      throw std::invalid_argument("merge_disjoint: cross edge endpoint not in its part");
    }
    cross.emplace_back(sit->second, dit->second);
  }
  std::sort(cross.begin(), cross.end());
  cross.erase(std::unique(cross.begin(), cross.end()), cross.end());
  for (const auto& [a, b] : cross) {
    edges.push_back({a, b, 1.0});
  }

  if (!src.empty() && !dst.empty() && src.origin->feature_dim() != dst.origin->feature_dim()) {
    throw std::invalid_argument("merge_disjoint: feature dimension mismatch between parts");
  }
  int feat_dim = 0;
  if (!src.empty()) {
    feat_dim = src.origin->feature_dim();
  } else if (!dst.empty()) {
    feat_dim = dst.origin->feature_dim();
  }
  Matrix features(n, feat_dim);
  int row = 0;
  for (NodeId v : src.nodes) {
    const double* from = src.origin->features().row(v);
    std::copy(from, from + feat_dim, features.row(row++));
  }
  for (NodeId v : dst.nodes) {
    const double* from = dst.origin->features().row(v);
    std::copy(from, from + feat_dim, features.row(row++));
  }

  const int label = dst.origin != nullptr ? dst.origin->label()
                                          : (src.origin != nullptr ? src.origin->label() : 0);
  return MergedGraph{GraphInstance(n, std::move(edges), std::move(features), label),
                     std::move(provenance)};
}

}  // namespace graphmix
