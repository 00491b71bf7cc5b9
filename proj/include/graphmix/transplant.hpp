#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphmix/graph.hpp"
#include "graphmix/rng.hpp"
#include "graphmix/saliency.hpp"

namespace graphmix {

enum class Connector { Dp, Ep };

struct MixConfig {
  double anchor_percent = 10.0;        // R
  std::vector<int> khop_space = {1, 2, 3};
  double alpha = 2.0;                  // Beta shape for the frontier ratio p
  Connector connector = Connector::Dp;

  void validate() const;
};

// One (K, p) draw, shared by a whole batch: K uniform over the K-hop space,
// p = 100 * Beta(alpha, alpha).
std::pair<int, double> sample_mix_params(const MixConfig& cfg, Rng& rng);

// max(1, round(R% * |V|)) anchors sampled uniformly from the top
// max(n_anchor, round(2R% * |V|)) nodes by saliency, ties broken by lower
// node id. Identically-zero saliency falls back to uniform sampling over all
// nodes.
NodeSet select_salient_anchors(const SaliencyVector& sal, double anchor_percent, Rng& rng);

NodeSet select_random_anchors(const GraphInstance& g, double anchor_percent, Rng& rng);

// K rounds of partial frontier growth from the anchors: each round keeps
// ceil(p% * |N(H)|) nodes of the current frontier's neighbor set. The
// neighbor set is taken literally (re-collected nodes are a no-op).
NodeSet partial_k_hop(const GraphInstance& g, const NodeSet& anchors, int k_hops, double p_percent,
                      Rng& rng);

struct DpConnection {
  std::vector<std::pair<NodeId, NodeId>> edges;  // deduplicated (src id, dst id)
  int num_draws = 0;                             // floor((D + D_pi) / 2)
};

// Degree-preserving connector: floor((D + D_pi)/2) pairs drawn uniformly
// with replacement from U_pi x U, then deduplicated. Empty candidate sets
// yield no edges.
DpConnection connect_dp(const GraphPart& src, const GraphPart& dst, Rng& rng);

// I(S, V) = sum of saliency over `nodes` / ||S||_1; |nodes|/|V| when the
// total saliency is zero.
double importance(const SaliencyVector& sal, const NodeSet& nodes);

// lambda = I_src / (I_src + I_dst); falls back to the size ratio when both
// importances vanish.
double mix_label(const SaliencyVector& sal_src, const NodeSet& kept_src,
                 const SaliencyVector& sal_dst, const NodeSet& kept_dst);

struct TransplantResult {
  bool skipped = false;
  std::optional<MergedGraph> merged;
  double lambda = 0.0;        // weight of the source label
  int source_label = 0;
  int dest_label = 0;
  NodeSet kept_src;           // V_bar_pi (source part nodes, original ids)
  NodeSet kept_dst;           // V \ V_bar (destination remainder, original ids)

  const GraphInstance& graph() const { return merged->graph; }
};

// Custom connector hook: receives the two parts and must return cross edges
// as (src original id, dst original id) pairs.
using CrossEdgeFn =
    std::function<std::vector<std::pair<NodeId, NodeId>>(const GraphPart&, const GraphPart&, Rng&)>;

struct TransplantOptions {
  bool salient_src_anchors = true;   // false: uniform anchors (random-subgraph ablation)
  bool no_cross_edges = false;
  bool size_based_label = false;
  // scattered mixing unit: pick node sets directly instead of K-hop growth
  bool scattered = false;
  int scattered_src_count = 0;
  int scattered_dst_count = 0;
};

// Full mixing pipeline for one (source, destination) pair: anchor selection,
// partial K-hop extraction on both sides, removal/induction, connector,
// merge, label weight. Reports skipped=true when the source part is empty or
// the destination remainder is empty; the caller then trains on the
// unmodified destination graph.
TransplantResult graph_transplant(const GraphInstance& src, const SaliencyVector& sal_src,
                                  const GraphInstance& dst, const SaliencyVector& sal_dst,
                                  const MixConfig& cfg, int k_hops, double p_percent, Rng& rng,
                                  const CrossEdgeFn& cross_edge_fn = nullptr,
                                  const TransplantOptions& opts = {});

// Text description of a mixed graph: nodes with provenance, edges, lambda.
std::string describe_transplant(const TransplantResult& r);

}  // namespace graphmix
