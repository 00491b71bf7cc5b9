#include "graphmix/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace graphmix {

namespace {

GraphInstance part_to_instance(const GraphPart& part) {
  return merge_disjoint(GraphPart{}, part, {}).graph;
}

}  // namespace

void BaselineConfig::validate() const {
  if (ratio <= 0.0 || ratio >= 1.0) {
    throw std::invalid_argument("BaselineConfig: ratio must be in (0, 1)");
  }
  if (kind == BaselineKind::ManifoldMixup && alpha <= 0.0) {
    throw std::invalid_argument("BaselineConfig: alpha must be positive");
  }
}

GraphInstance drop_nodes(const GraphInstance& g, double ratio, Rng& rng) {
  const int n = g.num_nodes();
  const int n_drop = static_cast<int>(std::ceil(ratio * n));
  if (n_drop <= 0) return g;
  if (n_drop >= n) return g;  // would empty the graph, skip
  std::vector<NodeId> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  const auto chosen = rng.sample_without_replacement(n, n_drop);
  return part_to_instance(remove_nodes(g, NodeSet(std::vector<NodeId>(chosen.begin(), chosen.end()))));
}

GraphInstance perturb_edges(const GraphInstance& g, double ratio, Rng& rng) {
  const int n = g.num_nodes();
  const long num_edges = static_cast<long>(g.edges().size());
  const int m = static_cast<int>(std::floor(ratio * static_cast<double>(num_edges)));
  if (m <= 0) return g;

  const auto removed = rng.sample_without_replacement(static_cast<int>(num_edges), m);
  std::vector<bool> drop(g.edges().size(), false);
  for (int i : removed) drop[static_cast<std::size_t>(i)] = true;
  std::vector<Edge> edges;
  edges.reserve(g.edges().size());
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    if (!drop[i]) edges.push_back(g.edges()[i]);
  }

  // additions are non-edges of the original graph
  const long non_edges = static_cast<long>(n) * (n - 1) / 2 - num_edges;
  const int m_add = static_cast<int>(std::min<long>(m, non_edges));
  std::set<std::pair<NodeId, NodeId>> added;
  if (m_add > 0) {
    if (non_edges <= 4L * m_add) {
      std::vector<std::pair<NodeId, NodeId>> all;
      for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
          if (!g.has_edge(u, v)) all.emplace_back(u, v);
        }
      }
      for (int i : rng.sample_without_replacement(static_cast<int>(all.size()), m_add)) {
        added.insert(all[static_cast<std::size_t>(i)]);
      }
    } else {
      while (static_cast<int>(added.size()) < m_add) {
        NodeId u = static_cast<NodeId>(rng.index(static_cast<std::size_t>(n)));
        NodeId v = static_cast<NodeId>(rng.index(static_cast<std::size_t>(n)));
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        if (g.has_edge(u, v)) continue;
        added.insert({u, v});
      }
    }
  }
  for (const auto& [u, v] : added) edges.push_back({u, v, 1.0});
  return GraphInstance(n, std::move(edges), g.features(), g.label());
}

GraphInstance mask_attrs(const GraphInstance& g, double ratio, Rng& rng) {
  const int n = g.num_nodes();
  const int m = static_cast<int>(std::floor(ratio * n));
  Matrix features = g.features();
  if (m > 0) {
    for (int v : rng.sample_without_replacement(n, m)) {
      double* row = features.row(v);
      std::fill(row, row + features.cols, 0.0);
    }
  }
  return GraphInstance(n, g.edges(), std::move(features), g.label());
}

GraphInstance subgraph_rw(const GraphInstance& g, double keep_ratio, Rng& rng) {
  const int n = g.num_nodes();
  const int target = std::clamp(static_cast<int>(std::ceil(keep_ratio * n)), 1, n);
  std::vector<NodeId> visited;
  std::set<NodeId> seen;
  NodeId current = static_cast<NodeId>(rng.index(static_cast<std::size_t>(n)));
  visited.push_back(current);
  seen.insert(current);
  const long max_steps = 10L * n;
  for (long step = 0; step < max_steps && static_cast<int>(seen.size()) < target; ++step) {
    const auto& nb = g.adjacency(current);
    if (nb.empty()) {
      current = visited[static_cast<std::size_t>(rng.index(visited.size()))];
      continue;
    }
    current = nb[static_cast<std::size_t>(rng.index(nb.size()))].first;
    if (seen.insert(current).second) visited.push_back(current);
  }
  return part_to_instance(induced_subgraph(g, NodeSet(std::move(visited))));
}

GraphInstance apply_structural_baseline(const GraphInstance& g, const BaselineConfig& cfg,
                                        Rng& rng) {
  cfg.validate();
  switch (cfg.kind) {
    case BaselineKind::DropN:
      return drop_nodes(g, cfg.ratio, rng);
    case BaselineKind::PermE:
      return perturb_edges(g, cfg.ratio, rng);
    case BaselineKind::MaskN:
      return mask_attrs(g, cfg.ratio, rng);
    case BaselineKind::SubG:
      return subgraph_rw(g, cfg.ratio, rng);
    case BaselineKind::ManifoldMixup:
      break;
  }
  throw std::invalid_argument("apply_structural_baseline: not a graph-to-graph baseline");
}

MixedRepr manifold_mixup_combine(std::span<const double> repr_a, std::span<const double> repr_b,
                                 int label_a, int label_b, int num_classes, double alpha,
                                 Rng& rng) {
  if (repr_a.size() != repr_b.size()) {
    throw std::invalid_argument("manifold_mixup_combine: representation size mismatch");
  }
  MixedRepr out;
  out.lambda = rng.beta(alpha);
  out.repr.resize(repr_a.size());
  for (std::size_t i = 0; i < repr_a.size(); ++i) {
    out.repr[i] = (1.0 - out.lambda) * repr_a[i] + out.lambda * repr_b[i];
  }
  out.label.assign(static_cast<std::size_t>(num_classes), 0.0);
  out.label[static_cast<std::size_t>(label_a)] += 1.0 - out.lambda;
  out.label[static_cast<std::size_t>(label_b)] += out.lambda;
  return out;
}

}  // namespace graphmix
