#pragma once

#include <span>
#include <vector>

#include "graphmix/graph.hpp"
#include "graphmix/rng.hpp"

namespace graphmix {

enum class BaselineKind { DropN, PermE, MaskN, SubG, ManifoldMixup };

// Stochastic augmentation baselines; each structural transform keeps the
// original label. `ratio` is the drop/perturb/mask fraction (tuned over
// {0.2, 0.4}) or the SubG keep fraction (tuned over {0.6, 0.8}).
struct BaselineConfig {
  BaselineKind kind = BaselineKind::DropN;
  double ratio = 0.2;
  double alpha = 2.0;  // ManifoldMixup Beta shape

  void validate() const;
};

// Drops ceil(ratio * |V|) uniform nodes; returns the original graph when the
// drop would empty it.
GraphInstance drop_nodes(const GraphInstance& g, double ratio, Rng& rng);

// Removes floor(ratio * |E|) uniform edges and adds the same number of
// uniform non-edges of the original graph (as many as exist).
GraphInstance perturb_edges(const GraphInstance& g, double ratio, Rng& rng);

// Zeroes floor(ratio * |V|) uniform node feature rows; structure unchanged.
GraphInstance mask_attrs(const GraphInstance& g, double ratio, Rng& rng);

// Random-walk subgraph: walks from a uniform start until ceil(keep_ratio*|V|)
// distinct nodes are collected or 10*|V| steps elapse, restarting from a
// random collected node when stuck; returns the induced subgraph.
GraphInstance subgraph_rw(const GraphInstance& g, double keep_ratio, Rng& rng);

GraphInstance apply_structural_baseline(const GraphInstance& g, const BaselineConfig& cfg,
                                        Rng& rng);

struct MixedRepr {
  std::vector<double> repr;
  std::vector<double> label;  // length num_classes, sums to 1
  double lambda = 0.0;
};

// Post-readout mixing: one lambda ~ Beta(alpha, alpha) shared by features and
// labels, mixed = (1 - lambda) * a + lambda * b.
MixedRepr manifold_mixup_combine(std::span<const double> repr_a, std::span<const double> repr_b,
                                 int label_a, int label_b, int num_classes, double alpha, Rng& rng);

}  // namespace graphmix
