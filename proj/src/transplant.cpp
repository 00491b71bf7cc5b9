#include "graphmix/transplant.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace graphmix {

namespace {

// node ids ordered by descending saliency, ties broken by lower id
std::vector<NodeId> saliency_order(const SaliencyVector& sal) {
  std::vector<NodeId> order(sal.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    const double sa = sal[static_cast<std::size_t>(a)];
    const double sb = sal[static_cast<std::size_t>(b)];
    return sa != sb ? sa > sb : a < b;
  });
  return order;
}

NodeSet pick_from_pool(const std::vector<NodeId>& pool, int count, Rng& rng) {
  const auto chosen = rng.sample_without_replacement(static_cast<int>(pool.size()), count);
  std::vector<NodeId> ids;
  ids.reserve(chosen.size());
  for (int i : chosen) ids.push_back(pool[static_cast<std::size_t>(i)]);
  return NodeSet(std::move(ids));
}

int anchor_count(double anchor_percent, int num_nodes) {
  return std::max(1, static_cast<int>(std::lround(anchor_percent / 100.0 * num_nodes)));
}

double size_based_lambda(std::size_t kept_src, int src_total, std::size_t kept_dst, int dst_total) {
  const double a = static_cast<double>(kept_src) / static_cast<double>(src_total);
  const double b = static_cast<double>(kept_dst) / static_cast<double>(dst_total);
  if (a + b == 0.0) return 0.5;
  return a / (a + b);
}

// N salient nodes sampled uniformly among the top-min(2N, |V|) by saliency
NodeSet scattered_salient(const SaliencyVector& sal, int count, Rng& rng) {
  const int n = static_cast<int>(sal.size());
  count = std::clamp(count, 1, n);
  if (saliency_l1(sal) == 0.0) {
    std::vector<NodeId> all(sal.size());
    std::iota(all.begin(), all.end(), 0);
    return pick_from_pool(all, count, rng);
  }
  const auto order = saliency_order(sal);
  const int pool_n = std::min(2 * count, n);
  std::vector<NodeId> pool(order.begin(), order.begin() + pool_n);
  return pick_from_pool(pool, count, rng);
}

NodeSet scattered_uniform(int num_nodes, int count, Rng& rng) {
  count = std::clamp(count, 1, num_nodes);
  std::vector<NodeId> all(static_cast<std::size_t>(num_nodes));
  std::iota(all.begin(), all.end(), 0);
  return pick_from_pool(all, count, rng);
}

}  // namespace

void MixConfig::validate() const {
  if (anchor_percent <= 0.0 || anchor_percent > 50.0) {
    throw std::invalid_argument("MixConfig: anchor percent must be in (0, 50]");
  }
  if (khop_space.empty()) {
    throw std::invalid_argument("MixConfig: empty K-hop space");
  }
  for (int k : khop_space) {
    if (k < 1) throw std::invalid_argument("MixConfig: K-hop values must be positive");
  }
  if (alpha <= 0.0) {
    throw std::invalid_argument("MixConfig: alpha must be positive");
  }
}

std::pair<int, double> sample_mix_params(const MixConfig& cfg, Rng& rng) {
  cfg.validate();
  const int k = cfg.khop_space[static_cast<std::size_t>(rng.index(cfg.khop_space.size()))];
  const double p = 100.0 * rng.beta(cfg.alpha);
  return {k, p};
}

NodeSet select_salient_anchors(const SaliencyVector& sal, double anchor_percent, Rng& rng) {
  if (sal.empty()) {
    throw std::invalid_argument("select_salient_anchors: empty saliency vector");
  }
  const int n = static_cast<int>(sal.size());
  const int n_anchor = anchor_count(anchor_percent, n);
  if (saliency_l1(sal) == 0.0) {
    std::vector<NodeId> all(sal.size());
    std::iota(all.begin(), all.end(), 0);
    return pick_from_pool(all, n_anchor, rng);
  }
  int top_n = std::max(n_anchor,
                       static_cast<int>(std::lround(2.0 * anchor_percent / 100.0 * n)));
  top_n = std::min(top_n, n);
  const auto order = saliency_order(sal);
  std::vector<NodeId> pool(order.begin(), order.begin() + top_n);
  return pick_from_pool(pool, n_anchor, rng);
}

NodeSet select_random_anchors(const GraphInstance& g, double anchor_percent, Rng& rng) {
  if (g.num_nodes() == 0) {
    throw std::invalid_argument("select_random_anchors: empty graph");
  }
  const int n_anchor = anchor_count(anchor_percent, g.num_nodes());
  std::vector<NodeId> all(static_cast<std::size_t>(g.num_nodes()));
  std::iota(all.begin(), all.end(), 0);
  return pick_from_pool(all, n_anchor, rng);
}

NodeSet partial_k_hop(const GraphInstance& g, const NodeSet& anchors, int k_hops, double p_percent,
                      Rng& rng) {
  if (anchors.empty()) {
    throw std::invalid_argument("partial_k_hop: empty anchor set");
  }
  for (NodeId v : anchors) g.check_node(v);
  std::vector<NodeId> collected(anchors.begin(), anchors.end());
  std::vector<NodeId> hop = collected;
  for (int k = 0; k < k_hops; ++k) {
    std::vector<NodeId> frontier;
    for (NodeId h : hop) {
      for (const auto& [u, w] : g.adjacency(h)) {
        (void)w;
        frontier.push_back(u);
      }
    }
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
    if (frontier.empty()) break;
    const int take = std::clamp(
        static_cast<int>(std::ceil(p_percent / 100.0 * static_cast<double>(frontier.size()))), 1,
        static_cast<int>(frontier.size()));
    const NodeSet picked = pick_from_pool(frontier, take, rng);
    hop.assign(picked.begin(), picked.end());
    collected.insert(collected.end(), hop.begin(), hop.end());
  }
  return NodeSet(std::move(collected));
}

DpConnection connect_dp(const GraphPart& src, const GraphPart& dst, Rng& rng) {
  DpConnection out;
  const auto u_src = src.positive_deficit_nodes();
  const auto u_dst = dst.positive_deficit_nodes();
  if (u_src.empty() || u_dst.empty()) {
    return out;
  }
  const double d_total = src.total_deficit() + dst.total_deficit();
  out.num_draws = static_cast<int>(std::floor(d_total / 2.0));
  std::set<std::pair<NodeId, NodeId>> unique_pairs;
  for (int i = 0; i < out.num_draws; ++i) {
    unique_pairs.insert({u_src[static_cast<std::size_t>(rng.index(u_src.size()))],
                         u_dst[static_cast<std::size_t>(rng.index(u_dst.size()))]});
  }
  out.edges.assign(unique_pairs.begin(), unique_pairs.end());
  return out;
}

double importance(const SaliencyVector& sal, const NodeSet& nodes) {
  if (sal.empty()) return 0.0;
  for (NodeId v : nodes) {
    if (v < 0 || static_cast<std::size_t>(v) >= sal.size()) {
      throw std::out_of_range("importance: node id outside saliency vector");
    }
  }
  const double total = saliency_l1(sal);
  if (total == 0.0) {
    return static_cast<double>(nodes.size()) / static_cast<double>(sal.size());
  }
  double sum = 0.0;
  for (NodeId v : nodes) sum += sal[static_cast<std::size_t>(v)];
  return sum / total;
}

double mix_label(const SaliencyVector& sal_src, const NodeSet& kept_src,
                 const SaliencyVector& sal_dst, const NodeSet& kept_dst) {
  const double i_src = importance(sal_src, kept_src);
  const double i_dst = importance(sal_dst, kept_dst);
  if (i_src + i_dst == 0.0) {
    const double denom = static_cast<double>(kept_src.size() + kept_dst.size());
    return denom == 0.0 ? 0.5 : static_cast<double>(kept_src.size()) / denom;
  }
  return i_src / (i_src + i_dst);
}

TransplantResult graph_transplant(const GraphInstance& src, const SaliencyVector& sal_src,
                                  const GraphInstance& dst, const SaliencyVector& sal_dst,
                                  const MixConfig& cfg, int k_hops, double p_percent, Rng& rng,
                                  const CrossEdgeFn& cross_edge_fn, const TransplantOptions& opts) {
  cfg.validate();
  if (src.num_nodes() == 0 || dst.num_nodes() == 0) {
    throw std::invalid_argument("graph_transplant: empty input graph");
  }
  if (sal_src.size() != static_cast<std::size_t>(src.num_nodes()) ||
      sal_dst.size() != static_cast<std::size_t>(dst.num_nodes())) {
    throw std::invalid_argument("graph_transplant: saliency length mismatch");
  }

  NodeSet kept_src_nodes;
  if (opts.scattered) {
    kept_src_nodes = opts.salient_src_anchors
                         ? scattered_salient(sal_src, opts.scattered_src_count, rng)
                         : scattered_uniform(src.num_nodes(), opts.scattered_src_count, rng);
  } else {
    const NodeSet anchors = opts.salient_src_anchors
                                ? select_salient_anchors(sal_src, cfg.anchor_percent, rng)
                                : select_random_anchors(src, cfg.anchor_percent, rng);
    kept_src_nodes = partial_k_hop(src, anchors, k_hops, p_percent, rng);
  }
  const GraphPart part_src = induced_subgraph(src, kept_src_nodes);

  NodeSet removed_dst;
  if (opts.scattered) {
    removed_dst = scattered_uniform(dst.num_nodes(), opts.scattered_dst_count, rng);
  } else {
    const NodeSet anchors = select_random_anchors(dst, cfg.anchor_percent, rng);
    removed_dst = partial_k_hop(dst, anchors, k_hops, p_percent, rng);
  }
  const GraphPart part_dst = remove_nodes(dst, removed_dst);

  TransplantResult result;
  result.source_label = src.label();
  result.dest_label = dst.label();
  result.kept_src = kept_src_nodes;
  result.kept_dst = part_dst.nodes;
  if (part_src.empty() || part_dst.empty()) {
    result.skipped = true;
    return result;
  }

  std::vector<std::pair<NodeId, NodeId>> cross;
  if (!opts.no_cross_edges) {
    if (cross_edge_fn) {
      cross = cross_edge_fn(part_src, part_dst, rng);
    } else if (cfg.connector == Connector::Dp) {
      cross = connect_dp(part_src, part_dst, rng).edges;
    } else {
      throw std::invalid_argument("graph_transplant: EP connector needs a cross-edge callback");
    }
  }
  result.merged = merge_disjoint(part_src, part_dst, cross);
  result.lambda = opts.size_based_label
                      ? size_based_lambda(kept_src_nodes.size(), src.num_nodes(),
                                          part_dst.nodes.size(), dst.num_nodes())
                      : mix_label(sal_src, kept_src_nodes, sal_dst, part_dst.nodes);
  return result;
}

std::string describe_transplant(const TransplantResult& r) {
  std::ostringstream out;
  if (r.skipped) {
    out << "skipped source_label=" << r.source_label << " dest_label=" << r.dest_label << "\n";
    return out.str();
  }
  const MergedGraph& m = *r.merged;
  out << "lambda=" << r.lambda << " source_label=" << r.source_label
      << " dest_label=" << r.dest_label << "\n";
  out << "nodes (" << m.graph.num_nodes() << "):\n";
  for (std::size_t i = 0; i < m.provenance.size(); ++i) {
    out << "  " << i << " <- " << (m.provenance[i].side == Side::Source ? "src" : "dst") << ":"
        << m.provenance[i].original_id << "\n";
  }
  out << "edges (" << m.graph.edges().size() << "):\n";
  for (const Edge& e : m.graph.edges()) {
    const bool cross = m.provenance[static_cast<std::size_t>(e.u)].side !=
                       m.provenance[static_cast<std::size_t>(e.v)].side;
    out << "  " << e.u << " - " << e.v << (cross ? " (new)" : "") << "\n";
  }
  return out.str();
}

}  // namespace graphmix
