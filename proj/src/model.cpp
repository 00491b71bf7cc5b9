#include "graphmix/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace graphmix {

namespace {

Matrix glorot(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  const double bound = std::sqrt(6.0 / (rows + cols));
  for (double& v : m.data) v = rng.uniform_range(-bound, bound);
  return m;
}

void relu_inplace(Matrix& m) {
  for (double& v : m.data) {
    if (v < 0.0) v = 0.0;
  }
}

void add_row_inplace(Matrix& m, const Matrix& row) {
  for (int j = 0; j < m.cols; ++j) m(0, j) += row(0, j);
}

nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  return Matrix(j.at("rows").get<int>(), j.at("cols").get<int>(),
                j.at("data").get<std::vector<double>>());
}

constexpr double kDropRate = 0.5;

}  // namespace

ModelParams init_params(Arch arch, Readout readout, int input_dim, int hidden_dim, int num_layers,
                        int num_classes, Rng& rng) {
  if (input_dim < 1 || hidden_dim < 1 || num_layers < 1 || num_classes < 2) {
    throw std::invalid_argument("init_params: bad dimensions");
  }
  ModelParams p;
  p.arch = arch;
  p.readout = readout;
  int d_in = input_dim;
  for (int l = 0; l < num_layers; ++l) {
    GnnLayer layer;
    layer.weight = glorot(d_in, hidden_dim, rng);
    if (arch == Arch::Gcs) {
      layer.skip_weight = glorot(d_in, hidden_dim, rng);
    }
    p.layers.push_back(std::move(layer));
    d_in = hidden_dim;
  }
  p.head_w1 = glorot(hidden_dim, hidden_dim, rng);
  p.head_b1 = Matrix(1, hidden_dim);
  p.head_w2 = glorot(hidden_dim, num_classes, rng);
  p.head_b2 = Matrix(1, num_classes);
  return p;
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z;
  z.arch = p.arch;
  z.readout = p.readout;
  for (const GnnLayer& layer : p.layers) {
    GnnLayer zl;
    zl.weight = Matrix(layer.weight.rows, layer.weight.cols);
    if (!layer.skip_weight.empty()) {
      zl.skip_weight = Matrix(layer.skip_weight.rows, layer.skip_weight.cols);
    }
    z.layers.push_back(std::move(zl));
  }
  z.head_w1 = Matrix(p.head_w1.rows, p.head_w1.cols);
  z.head_b1 = Matrix(p.head_b1.rows, p.head_b1.cols);
  z.head_w2 = Matrix(p.head_w2.rows, p.head_w2.cols);
  z.head_b2 = Matrix(p.head_b2.rows, p.head_b2.cols);
  return z;
}

std::vector<Matrix*> param_list(ModelParams& p) {
  std::vector<Matrix*> out;
  for (GnnLayer& layer : p.layers) {
    out.push_back(&layer.weight);
    if (!layer.skip_weight.empty()) out.push_back(&layer.skip_weight);
  }
  out.push_back(&p.head_w1);
  out.push_back(&p.head_b1);
  out.push_back(&p.head_w2);
  out.push_back(&p.head_b2);
  return out;
}

std::vector<const Matrix*> param_list(const ModelParams& p) {
  std::vector<const Matrix*> out;
  for (const GnnLayer& layer : p.layers) {
    out.push_back(&layer.weight);
    if (!layer.skip_weight.empty()) out.push_back(&layer.skip_weight);
  }
  out.push_back(&p.head_w1);
  out.push_back(&p.head_b1);
  out.push_back(&p.head_w2);
  out.push_back(&p.head_b2);
  return out;
}

void axpy_params(ModelParams& dst, const ModelParams& src, double scale) {
  auto d = param_list(dst);
  auto s = param_list(src);
  if (d.size() != s.size()) {
    throw std::invalid_argument("axpy_params: parameter shape mismatch");
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    axpy(*d[i], *s[i], scale);
  }
}

AdjCache build_adjacency(const GraphInstance& g, Arch arch) {
  const int n = g.num_nodes();
  AdjCache adj;
  adj.rows.resize(static_cast<std::size_t>(n));
  adj.deg.resize(static_cast<std::size_t>(n));
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  for (int v = 0; v < n; ++v) {
    d[static_cast<std::size_t>(v)] = degree(g, v);
  }
  if (arch == Arch::Gcn) {
    for (int v = 0; v < n; ++v) {
      adj.deg[static_cast<std::size_t>(v)] = 1.0 + d[static_cast<std::size_t>(v)];
    }
    for (int v = 0; v < n; ++v) {
      auto& row = adj.rows[static_cast<std::size_t>(v)];
      row.emplace_back(v, 1.0 / adj.deg[static_cast<std::size_t>(v)]);
      for (const auto& [u, w] : g.adjacency(v)) {
        if (w == 0.0) continue;
        row.emplace_back(u, w / std::sqrt(adj.deg[static_cast<std::size_t>(u)] *
                                          adj.deg[static_cast<std::size_t>(v)]));
      }
    }
  } else {
    adj.deg = d;
    for (int v = 0; v < n; ++v) {
      if (d[static_cast<std::size_t>(v)] <= 0.0) continue;
      auto& row = adj.rows[static_cast<std::size_t>(v)];
      for (const auto& [u, w] : g.adjacency(v)) {
        if (w == 0.0) continue;
        row.emplace_back(u, w / std::sqrt(d[static_cast<std::size_t>(u)] *
                                          d[static_cast<std::size_t>(v)]));
      }
    }
  }
  return adj;
}

Matrix aggregate(const AdjCache& adj, const Matrix& x) {
  Matrix out(x.rows, x.cols);
  for (int v = 0; v < x.rows; ++v) {
    double* orow = out.row(v);
    for (const auto& [u, c] : adj.rows[static_cast<std::size_t>(v)]) {
      const double* xrow = x.row(u);
      for (int j = 0; j < x.cols; ++j) {
        orow[j] += c * xrow[j];
      }
    }
  }
  return out;
}

Matrix gcn_layer_forward(const Matrix& x, const GraphInstance& g, const Matrix& theta) {
  if (x.rows != g.num_nodes()) {
    throw std::invalid_argument("gcn_layer_forward: feature rows != num_nodes");
  }
  if (x.cols != theta.rows) {
    throw std::invalid_argument("gcn_layer_forward: dimension mismatch");
  }
  return matmul(aggregate(build_adjacency(g, Arch::Gcn), x), theta);
}

Matrix gcs_layer_forward(const Matrix& x, const GraphInstance& g, const Matrix& theta,
                         const Matrix& theta_skip) {
  if (x.rows != g.num_nodes()) {
    throw std::invalid_argument("gcs_layer_forward: feature rows != num_nodes");
  }
  if (x.cols != theta.rows || x.cols != theta_skip.rows || theta.cols != theta_skip.cols) {
    throw std::invalid_argument("gcs_layer_forward: dimension mismatch");
  }
  Matrix z = matmul(aggregate(build_adjacency(g, Arch::Gcs), x), theta);
  axpy(z, matmul(x, theta_skip));
  return z;
}

Matrix gnn_embed(const ModelParams& p, const GraphInstance& g, ForwardTape& tape) {
  if (g.num_nodes() == 0) {
    throw std::invalid_argument("forward: empty graph");
  }
  if (g.feature_dim() != p.input_dim()) {
    throw std::invalid_argument("forward: graph feature dim " + std::to_string(g.feature_dim()) +
                                " != model input dim " + std::to_string(p.input_dim()));
  }
  tape.num_nodes = g.num_nodes();
  tape.adj = build_adjacency(g, p.arch);
  Matrix x = g.features();
  for (const GnnLayer& layer : p.layers) {
    Matrix m = aggregate(tape.adj, x);
    Matrix z = matmul(m, layer.weight);
    if (p.arch == Arch::Gcs) {
      axpy(z, matmul(x, layer.skip_weight));
    }
    tape.layer_inputs.push_back(std::move(x));
    tape.aggregated.push_back(std::move(m));
    tape.preacts.push_back(z);
    relu_inplace(z);
    x = std::move(z);
  }
  tape.last_features = x;

  const int n = tape.num_nodes;
  const int dl = x.cols;
  Matrix pooled(1, dl);
  switch (p.readout) {
    case Readout::Mean:
      for (int v = 0; v < n; ++v) {
        for (int j = 0; j < dl; ++j) pooled(0, j) += x(v, j);
      }
      for (int j = 0; j < dl; ++j) pooled(0, j) /= static_cast<double>(n);
      break;
    case Readout::Sum:
      for (int v = 0; v < n; ++v) {
        for (int j = 0; j < dl; ++j) pooled(0, j) += x(v, j);
      }
      break;
    case Readout::Max:
      tape.max_rows.assign(static_cast<std::size_t>(dl), 0);
      for (int j = 0; j < dl; ++j) {
        int best = 0;
        for (int v = 1; v < n; ++v) {
          if (x(v, j) > x(best, j)) best = v;  // ties keep the lowest node id
        }
        tape.max_rows[static_cast<std::size_t>(j)] = best;
        pooled(0, j) = x(best, j);
      }
      break;
  }
  tape.pooled = pooled;
  return pooled;
}

Matrix head_forward(const ModelParams& p, const Matrix& pooled, Mode mode, Rng* dropout_rng,
                    ForwardTape& tape) {
  if (pooled.cols != p.head_w1.rows) {
    throw std::invalid_argument("head_forward: pooled dim mismatch");
  }
  tape.mode = mode;
  tape.pooled = pooled;
  Matrix hpre = matmul(pooled, p.head_w1);
  add_row_inplace(hpre, p.head_b1);
  tape.head_pre = hpre;
  Matrix h = hpre;
  relu_inplace(h);
  if (mode == Mode::Train) {
    if (dropout_rng == nullptr) {
      throw std::invalid_argument("head_forward: train mode requires a dropout rng");
    }
    tape.dropout_mask.resize(static_cast<std::size_t>(h.cols));
    for (int j = 0; j < h.cols; ++j) {
      const double keep = dropout_rng->uniform() >= kDropRate ? 1.0 / (1.0 - kDropRate) : 0.0;
      tape.dropout_mask[static_cast<std::size_t>(j)] = keep;
      h(0, j) *= keep;
    }
  } else {
    tape.dropout_mask.clear();
  }
  tape.head_dropped = h;
  Matrix logits = matmul(h, p.head_w2);
  add_row_inplace(logits, p.head_b2);
  tape.logits = logits;
  return logits;
}

std::pair<Matrix, ForwardTape> forward(const ModelParams& p, const GraphInstance& g, Mode mode,
                                       Rng* dropout_rng) {
  ForwardTape tape;
  const Matrix pooled = gnn_embed(p, g, tape);
  Matrix logits = head_forward(p, pooled, mode, dropout_rng, tape);
  return {std::move(logits), std::move(tape)};
}

std::vector<double> softmax(const Matrix& logits) {
  const int c = logits.cols;
  double mx = logits(0, 0);
  for (int j = 1; j < c; ++j) mx = std::max(mx, logits(0, j));
  std::vector<double> out(static_cast<std::size_t>(c));
  double sum = 0.0;
  for (int j = 0; j < c; ++j) {
    out[static_cast<std::size_t>(j)] = std::exp(logits(0, j) - mx);
    sum += out[static_cast<std::size_t>(j)];
  }
  for (double& v : out) v /= sum;
  return out;
}

double softmax_cross_entropy(const Matrix& logits, const std::vector<double>& target) {
  const int c = logits.cols;
  if (static_cast<int>(target.size()) != c) {
    throw std::invalid_argument("softmax_cross_entropy: target size mismatch");
  }
  double tsum = 0.0;
  for (double t : target) {
    if (t < -1e-12) {
      throw std::invalid_argument("softmax_cross_entropy: negative target weight");
    }
    tsum += t;
  }
  if (std::abs(tsum - 1.0) > 1e-6) {
    throw std::invalid_argument("softmax_cross_entropy: target weights must sum to 1");
  }
  double mx = logits(0, 0);
  for (int j = 1; j < c; ++j) mx = std::max(mx, logits(0, j));
  double sum = 0.0;
  for (int j = 0; j < c; ++j) sum += std::exp(logits(0, j) - mx);
  const double lse = mx + std::log(sum);
  double dot = 0.0;
  for (int j = 0; j < c; ++j) dot += target[static_cast<std::size_t>(j)] * logits(0, j);
  return lse - dot;
}

Matrix head_backward(const ModelParams& p, const ForwardTape& tape, const Matrix& dlogits,
                     ModelParams& grads) {
  axpy(grads.head_b2, dlogits);
  axpy(grads.head_w2, matmul_tn(tape.head_dropped, dlogits));
  Matrix dh = matmul_nt(dlogits, p.head_w2);
  if (!tape.dropout_mask.empty()) {
    for (int j = 0; j < dh.cols; ++j) dh(0, j) *= tape.dropout_mask[static_cast<std::size_t>(j)];
  }
  for (int j = 0; j < dh.cols; ++j) {
    if (tape.head_pre(0, j) <= 0.0) dh(0, j) = 0.0;
  }
  axpy(grads.head_b1, dh);
  axpy(grads.head_w1, matmul_tn(tape.pooled, dh));
  return matmul_nt(dh, p.head_w1);
}

Matrix gnn_backward(const ModelParams& p, const ForwardTape& tape, const Matrix& dpooled,
                    ModelParams& grads, const std::vector<std::pair<int, int>>& watched_edges,
                    std::vector<double>* grad_edge_weights) {
  const int n = tape.num_nodes;
  const int dl = tape.last_features.cols;
  Matrix dx(n, dl);
  switch (p.readout) {
    case Readout::Mean:
      for (int v = 0; v < n; ++v) {
        for (int j = 0; j < dl; ++j) dx(v, j) = dpooled(0, j) / static_cast<double>(n);
      }
      break;
    case Readout::Sum:
      for (int v = 0; v < n; ++v) {
        for (int j = 0; j < dl; ++j) dx(v, j) = dpooled(0, j);
      }
      break;
    case Readout::Max:
      for (int j = 0; j < dl; ++j) {
        dx(tape.max_rows[static_cast<std::size_t>(j)], j) = dpooled(0, j);
      }
      break;
  }
  const Matrix grad_last = dx;

  const bool want_edges = !watched_edges.empty();
  Matrix da;
  if (want_edges) da = Matrix(n, n);

  for (int l = static_cast<int>(p.layers.size()) - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    const Matrix& z = tape.preacts[li];
    Matrix dz = dx;
    for (std::size_t i = 0; i < dz.data.size(); ++i) {
      if (z.data[i] <= 0.0) dz.data[i] = 0.0;
    }
    const GnnLayer& layer = p.layers[li];
    axpy(grads.layers[li].weight, matmul_tn(tape.aggregated[li], dz));
    Matrix dm = matmul_nt(dz, layer.weight);
    if (p.arch == Arch::Gcs) {
      axpy(grads.layers[li].skip_weight, matmul_tn(tape.layer_inputs[li], dz));
    }
    if (want_edges) {
      axpy(da, matmul_nt(dm, tape.layer_inputs[li]));
    }
    Matrix dx_new = aggregate(tape.adj, dm);
    if (p.arch == Arch::Gcs) {
      axpy(dx_new, matmul_nt(dz, layer.skip_weight));
    }
    dx = std::move(dx_new);
  }

  if (want_edges && grad_edge_weights != nullptr) {
    grad_edge_weights->assign(watched_edges.size(), 0.0);
    // dL/de_uv through A_norm: the direct 1/sqrt(d_u d_v) entry plus the
    // degree terms from d(d_u)/de = d(d_v)/de = 1.
    auto row_col_sum = [&](int u) {
      double s = 0.0;
      for (const auto& [j, c] : tape.adj.rows[static_cast<std::size_t>(u)]) {
        s += c * (da(u, j) + da(j, u));
      }
      return s;
    };
    for (std::size_t k = 0; k < watched_edges.size(); ++k) {
      const auto [u, v] = watched_edges[k];
      if (u < 0 || u >= n || v < 0 || v >= n) {
        throw std::out_of_range("gnn_backward: watched edge endpoint out of range");
      }
      const double du = tape.adj.deg[static_cast<std::size_t>(u)];
      const double dv = tape.adj.deg[static_cast<std::size_t>(v)];
      if (du <= 0.0 || dv <= 0.0) {
        throw std::invalid_argument("gnn_backward: watched edge touches a zero-degree node");
      }
      const double direct = (da(u, v) + da(v, u)) / std::sqrt(du * dv);
      (*grad_edge_weights)[k] =
          direct - row_col_sum(u) / (2.0 * du) - row_col_sum(v) / (2.0 * dv);
    }
  }
  return grad_last;
}

BackwardResult backward(const ModelParams& p, const ForwardTape& tape,
                        const std::vector<double>& target,
                        const std::vector<std::pair<int, int>>& watched_edges) {
  const int c = tape.logits.cols;
  if (static_cast<int>(target.size()) != c) {
    throw std::invalid_argument("backward: target size does not match logits");
  }
  BackwardResult out;
  out.grads = zeros_like(p);
  const std::vector<double> probs = softmax(tape.logits);
  Matrix dlogits(1, c);
  for (int j = 0; j < c; ++j) {
    dlogits(0, j) = probs[static_cast<std::size_t>(j)] - target[static_cast<std::size_t>(j)];
  }
  const Matrix dpooled = head_backward(p, tape, dlogits, out.grads);
  out.grad_last_features =
      gnn_backward(p, tape, dpooled, out.grads, watched_edges, &out.grad_edge_weights);
  return out;
}

double loss_from_last_features(const ModelParams& p, const ForwardTape& tape, const Matrix& xl,
                               const std::vector<double>& target) {
  const int n = xl.rows;
  const int dl = xl.cols;
  Matrix pooled(1, dl);
  switch (p.readout) {
    case Readout::Mean:
      for (int v = 0; v < n; ++v) {
        for (int j = 0; j < dl; ++j) pooled(0, j) += xl(v, j);
      }
      for (int j = 0; j < dl; ++j) pooled(0, j) /= static_cast<double>(n);
      break;
    case Readout::Sum:
      for (int v = 0; v < n; ++v) {
        for (int j = 0; j < dl; ++j) pooled(0, j) += xl(v, j);
      }
      break;
    case Readout::Max:
      for (int j = 0; j < dl; ++j) {
        double best = xl(0, j);
        for (int v = 1; v < n; ++v) best = std::max(best, xl(v, j));
        pooled(0, j) = best;
      }
      break;
  }
  Matrix hpre = matmul(pooled, p.head_w1);
  add_row_inplace(hpre, p.head_b1);
  relu_inplace(hpre);
  if (!tape.dropout_mask.empty()) {
    for (int j = 0; j < hpre.cols; ++j) hpre(0, j) *= tape.dropout_mask[static_cast<std::size_t>(j)];
  }
  Matrix logits = matmul(hpre, p.head_w2);
  add_row_inplace(logits, p.head_b2);
  return softmax_cross_entropy(logits, target);
}

AdamState make_adam_state(const std::vector<const Matrix*>& params, double lr) {
  AdamState s;
  s.lr = lr;
  for (const Matrix* p : params) {
    s.m.emplace_back(p->rows, p->cols);
    s.v.emplace_back(p->rows, p->cols);
  }
  return s;
}

void adam_step_list(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads,
                    AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam_step: shape list mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    const Matrix& g = *grads[i];
    Matrix& m = state.m[i];
    Matrix& v = state.v[i];
    for (std::size_t k = 0; k < p.data.size(); ++k) {
      m.data[k] = state.beta1 * m.data[k] + (1.0 - state.beta1) * g.data[k];
      v.data[k] = state.beta2 * v.data[k] + (1.0 - state.beta2) * g.data[k] * g.data[k];
      p.data[k] -= state.lr * (m.data[k] / bc1) / (std::sqrt(v.data[k] / bc2) + state.eps);
    }
  }
}

void adam_step(ModelParams& p, const ModelParams& grads, AdamState& state) {
  adam_step_list(param_list(p), param_list(grads), state);
}

void save_model(const ModelParams& p, const std::string& path) {
  nlohmann::json j;
  j["arch"] = p.arch == Arch::Gcn ? "gcn" : "gcs";
  j["readout"] = p.readout == Readout::Mean ? "mean" : (p.readout == Readout::Sum ? "sum" : "max");
  j["layers"] = nlohmann::json::array();
  for (const GnnLayer& layer : p.layers) {
    nlohmann::json jl;
    jl["weight"] = matrix_to_json(layer.weight);
    if (!layer.skip_weight.empty()) {
      jl["skip_weight"] = matrix_to_json(layer.skip_weight);
    }
    j["layers"].push_back(std::move(jl));
  }
  j["head_w1"] = matrix_to_json(p.head_w1);
  j["head_b1"] = matrix_to_json(p.head_b1);
  j["head_w2"] = matrix_to_json(p.head_w2);
  j["head_b2"] = matrix_to_json(p.head_b2);
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint " + path);
  }
  out << j.dump() << "\n";
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read checkpoint " + path);
  }
  nlohmann::json j;
  in >> j;
  ModelParams p;
  const std::string arch = j.at("arch").get<std::string>();
  p.arch = arch == "gcn" ? Arch::Gcn : Arch::Gcs;
  const std::string readout = j.at("readout").get<std::string>();
  p.readout = readout == "mean" ? Readout::Mean : (readout == "sum" ? Readout::Sum : Readout::Max);
  for (const auto& jl : j.at("layers")) {
    GnnLayer layer;
    layer.weight = matrix_from_json(jl.at("weight"));
    if (jl.contains("skip_weight")) {
      layer.skip_weight = matrix_from_json(jl.at("skip_weight"));
    }
    p.layers.push_back(std::move(layer));
  }
  p.head_w1 = matrix_from_json(j.at("head_w1"));
  p.head_b1 = matrix_from_json(j.at("head_b1"));
  p.head_w2 = matrix_from_json(j.at("head_w2"));
  p.head_b2 = matrix_from_json(j.at("head_b2"));
  return p;
}

}  // namespace graphmix
