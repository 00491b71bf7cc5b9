#pragma once

#include <string>
#include <utility>
#include <vector>

#include "graphmix/graph.hpp"
#include "graphmix/matrix.hpp"
#include "graphmix/rng.hpp"

namespace graphmix {

enum class Arch { Gcn, Gcs };
enum class Readout { Mean, Sum, Max };
enum class Mode { Train, Eval };

struct GnnLayer {
  Matrix weight;       // [d_in x d_out]
  Matrix skip_weight;  // [d_in x d_out], empty for GCN
};

// All trainable weights: L message-passing layers followed by an MLP head
// with one hidden layer (ReLU, dropout 0.5 in train mode).
struct ModelParams {
  Arch arch = Arch::Gcs;
  Readout readout = Readout::Mean;
  std::vector<GnnLayer> layers;
  Matrix head_w1, head_b1;  // [dL x h], [1 x h]
  Matrix head_w2, head_b2;  // [h x C], [1 x C]

  int input_dim() const { return layers.empty() ? 0 : layers.front().weight.rows; }
  int last_gnn_dim() const { return layers.empty() ? 0 : layers.back().weight.cols; }
  int num_classes() const { return head_w2.cols; }
};

// Glorot-uniform weights, zero biases. The head hidden width equals
// `hidden_dim`.
ModelParams init_params(Arch arch, Readout readout, int input_dim, int hidden_dim, int num_layers,
                        int num_classes, Rng& rng);

ModelParams zeros_like(const ModelParams& p);

// Parameter matrices in a fixed traversal order (layer weights, skips, head).
std::vector<Matrix*> param_list(ModelParams& p);
std::vector<const Matrix*> param_list(const ModelParams& p);

// dst += scale * src over every parameter matrix.
void axpy_params(ModelParams& dst, const ModelParams& src, double scale = 1.0);

// Symmetric normalized aggregation operator rows. For GCN: self-loop of
// weight 1 inserted, coefficients e/sqrt(dhat_u dhat_v) with dhat = 1 + deg.
// For GCS: no self-loop, 1/sqrt(d_u d_v) scaling, zero-degree rows empty.
struct AdjCache {
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> deg;  // dhat (GCN) or d (GCS)
};

AdjCache build_adjacency(const GraphInstance& g, Arch arch);
Matrix aggregate(const AdjCache& adj, const Matrix& x);

// Single layers as free operations (the stack below caches the adjacency).
Matrix gcn_layer_forward(const Matrix& x, const GraphInstance& g, const Matrix& theta);
Matrix gcs_layer_forward(const Matrix& x, const GraphInstance& g, const Matrix& theta,
                         const Matrix& theta_skip);

// Everything the backward pass needs to replay the forward exactly.
struct ForwardTape {
  Mode mode = Mode::Eval;
  int num_nodes = 0;
  AdjCache adj;
  std::vector<Matrix> layer_inputs;  // X^(l)
  std::vector<Matrix> aggregated;    // A_norm X^(l)
  std::vector<Matrix> preacts;       // Z^(l)
  Matrix last_features;              // X^(L), input to the readout
  std::vector<int> max_rows;         // argmax row per dim (max readout only)
  Matrix pooled;                     // 1 x dL
  Matrix head_pre;                   // 1 x h
  Matrix head_dropped;               // input to the output layer
  std::vector<double> dropout_mask;  // per hidden unit: 0 or 1/keep; empty in eval
  Matrix logits;                     // 1 x C
};

// Full pass: L gnn layers with ReLU, readout, MLP head. Returns raw logits.
// `dropout_rng` is consumed only in train mode. Throws on empty graphs.
std::pair<Matrix, ForwardTape> forward(const ModelParams& p, const GraphInstance& g, Mode mode,
                                       Rng* dropout_rng);

// Pieces, exposed for representation-level mixing: gnn stack + readout into a
// pooled vector, and the head on its own.
Matrix gnn_embed(const ModelParams& p, const GraphInstance& g, ForwardTape& tape);
Matrix head_forward(const ModelParams& p, const Matrix& pooled, Mode mode, Rng* dropout_rng,
                    ForwardTape& tape);

std::vector<double> softmax(const Matrix& logits);

// Cross entropy against a mixed target (nonnegative weights summing to 1),
// stabilized by max subtraction.
double softmax_cross_entropy(const Matrix& logits, const std::vector<double>& target);

struct BackwardResult {
  ModelParams grads;
  Matrix grad_last_features;              // dL/dX^(L)
  std::vector<double> grad_edge_weights;  // aligned with watched_edges
};

// Exact reverse-mode gradients of softmax_cross_entropy(logits, target) with
// respect to every parameter and to X^(L). When `watched_edges` is nonempty,
// also returns dL/d(weight) for those graph edges, differentiating through
// the normalized adjacency (including the degree terms).
BackwardResult backward(const ModelParams& p, const ForwardTape& tape,
                        const std::vector<double>& target,
                        const std::vector<std::pair<int, int>>& watched_edges = {});

// Split backward stages (used by representation-level mixing).
Matrix head_backward(const ModelParams& p, const ForwardTape& tape, const Matrix& dlogits,
                     ModelParams& grads);  // returns d(pooled)
Matrix gnn_backward(const ModelParams& p, const ForwardTape& tape, const Matrix& dpooled,
                    ModelParams& grads,
                    const std::vector<std::pair<int, int>>& watched_edges = {},
                    std::vector<double>* grad_edge_weights = nullptr);  // returns dL/dX^(L)

// Loss recomputed from a given last-layer feature matrix through the tape's
// readout/head state (finite-difference oracle hook for dL/dX^(L)).
double loss_from_last_features(const ModelParams& p, const ForwardTape& tape, const Matrix& xl,
                               const std::vector<double>& target);

struct AdamState {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

AdamState make_adam_state(const std::vector<const Matrix*>& params, double lr);
void adam_step_list(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads,
                    AdamState& state);
void adam_step(ModelParams& p, const ModelParams& grads, AdamState& state);

// Checkpoints: flat parameter arrays with a shape manifest (JSON).
void save_model(const ModelParams& p, const std::string& path);
ModelParams load_model(const std::string& path);

}  // namespace graphmix
