#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphmix/graph.hpp"
#include "graphmix/matrix.hpp"
#include "graphmix/model.hpp"
#include "graphmix/rng.hpp"

namespace graphmix {

// Pairwise edge-probability MLP psi: concat(f_u, f_v) -> 128 -> 64 -> 1
// logit, ReLU activations, sigmoid on the output. Inputs are last-GNN-layer
// node latents.
struct EdgePredictor {
  Matrix w1, b1;
  Matrix w2, b2;
  Matrix w3, b3;

  int input_dim() const { return w1.rows; }
};

EdgePredictor init_edge_predictor(int latent_dim, Rng& rng);
EdgePredictor zeros_like(const EdgePredictor& p);
std::vector<Matrix*> param_list(EdgePredictor& p);
std::vector<const Matrix*> param_list(const EdgePredictor& p);
void axpy_params(EdgePredictor& dst, const EdgePredictor& src, double scale = 1.0);

// Activations of one directed psi evaluation, kept for the backward pass.
struct MlpTrace {
  std::vector<double> input;
  std::vector<double> h1_pre;
  std::vector<double> h2_pre;
  double logit = 0.0;
};

MlpTrace psi_forward(const EdgePredictor& psi, std::span<const double> fu,
                     std::span<const double> fv);
void psi_backward(const EdgePredictor& psi, const MlpTrace& trace, double dlogit,
                  EdgePredictor& grads);

// Symmetric probability: 1/2 (sigmoid(psi(u,v)) + sigmoid(psi(v,u))). Exactly
// symmetric in its arguments.
double edge_prob(const EdgePredictor& psi, std::span<const double> fu,
                 std::span<const double> fv);

// Binary straight-through Gumbel-softmax draw: `hard` is the exact Bernoulli
// sample (argmax of Gumbel-perturbed logits), `soft` the temperature-tau
// relaxation of the same perturbed logits. Forward uses hard, backward routes
// through soft.
struct STEdgeSample {
  int hard = 0;
  double soft = 0.0;
  double tau = 1.0;
  double prob = 0.5;  // clamped probability the draw was taken from
};

STEdgeSample st_sample(double prob, double tau, Rng& rng);

// Everything needed to push dL/d(edge weight) back into psi.
struct EdgeSurrogate {
  NodeId src_orig = 0;
  NodeId dst_orig = 0;
  MlpTrace trace_uv;
  MlpTrace trace_vu;
  STEdgeSample sample;
};

struct EpConnection {
  std::vector<std::pair<NodeId, NodeId>> edges;  // materialized (hard = 1) pairs
  std::vector<EdgeSurrogate> surrogates;         // aligned with edges
};

// Samples an ST edge for every (u, v) in U_pi x U (positive-deficit nodes
// only); pairs outside the candidate sets get no edge and no draw. Latents
// are indexed by original node ids of the respective parent graphs.
EpConnection connect_ep(const GraphPart& src, const GraphPart& dst, const Matrix& latents_src,
                        const Matrix& latents_dst, const EdgePredictor& psi, double tau, Rng& rng);

// dL/d(edge weight) -> psi gradients through the ST soft path.
void accumulate_surrogate_grads(const EdgePredictor& psi, const EdgeSurrogate& s,
                                double dloss_dweight, EdgePredictor& grads);

// Batched variant over all surrogates of one mixed graph.
void accumulate_surrogate_grads(const EdgePredictor& psi,
                                std::span<const EdgeSurrogate> surrogates,
                                std::span<const double> dloss_dweights, EdgePredictor& grads);

struct EpTrainPair {
  std::vector<double> fu;
  std::vector<double> fv;
  double label = 0.0;
};

// Balanced positive/negative pairs from one graph: up to `cap` existing edges
// and the same number of uniform non-edges. Edgeless graphs contribute
// negatives only, complete graphs positives only.
std::vector<EpTrainPair> sample_ep_pairs(const GraphInstance& g, const Matrix& latents, int cap,
                                         Rng& rng);

// One Adam step on mean binary cross-entropy over the pairs. Returns the
// pre-update loss.
double supervised_ep_update(EdgePredictor& psi, const std::vector<EpTrainPair>& pairs,
                            AdamState& state);

double ep_bce_loss(const EdgePredictor& psi, const std::vector<EpTrainPair>& pairs);
double ep_pair_accuracy(const EdgePredictor& psi, const std::vector<EpTrainPair>& pairs);

void save_edge_predictor(const EdgePredictor& psi, const std::string& path);
EdgePredictor load_edge_predictor(const std::string& path);

}  // namespace graphmix
