#include "graphmix/edge_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace graphmix {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix glorot(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  const double bound = std::sqrt(6.0 / (rows + cols));
  for (double& v : m.data) v = rng.uniform_range(-bound, bound);
  return m;
}

constexpr double kProbClamp = 1e-6;

// Multi-row psi evaluation; one row per directed pair. Keeping the whole
// candidate set in one matrix makes the MLP a handful of matmuls instead of
// thousands of scalar loops.
struct BatchTrace {
  Matrix input;   // P x in
  Matrix h1_pre;  // P x 128
  Matrix h2_pre;  // P x 64
  std::vector<double> logits;
};

Matrix relu_copy(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data) {
    if (v < 0.0) v = 0.0;
  }
  return out;
}

void add_bias_rows(Matrix& m, const Matrix& bias) {
  for (int r = 0; r < m.rows; ++r) {
    double* row = m.row(r);
    for (int c = 0; c < m.cols; ++c) row[c] += bias(0, c);
  }
}

BatchTrace psi_forward_batch(const EdgePredictor& psi, Matrix input) {
  BatchTrace t;
  t.h1_pre = matmul(input, psi.w1);
  add_bias_rows(t.h1_pre, psi.b1);
  const Matrix h1 = relu_copy(t.h1_pre);
  t.h2_pre = matmul(h1, psi.w2);
  add_bias_rows(t.h2_pre, psi.b2);
  const Matrix h2 = relu_copy(t.h2_pre);
  Matrix logit_mat = matmul(h2, psi.w3);
  t.logits.resize(static_cast<std::size_t>(logit_mat.rows));
  for (int r = 0; r < logit_mat.rows; ++r) {
    t.logits[static_cast<std::size_t>(r)] = logit_mat(r, 0) + psi.b3(0, 0);
  }
  t.input = std::move(input);
  return t;
}

void psi_backward_batch(const EdgePredictor& psi, const BatchTrace& t,
                        const std::vector<double>& dlogits, EdgePredictor& grads) {
  const int p = t.input.rows;
  Matrix dlog(p, 1);
  for (int r = 0; r < p; ++r) {
    dlog(r, 0) = dlogits[static_cast<std::size_t>(r)];
    grads.b3(0, 0) += dlog(r, 0);
  }
  const Matrix h2 = relu_copy(t.h2_pre);
  const Matrix h1 = relu_copy(t.h1_pre);
  axpy(grads.w3, matmul_tn(h2, dlog));
  Matrix dh2 = matmul_nt(dlog, psi.w3);
  for (std::size_t i = 0; i < dh2.data.size(); ++i) {
    if (t.h2_pre.data[i] <= 0.0) dh2.data[i] = 0.0;
  }
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < dh2.cols; ++c) grads.b2(0, c) += dh2(r, c);
  }
  axpy(grads.w2, matmul_tn(h1, dh2));
  Matrix dh1 = matmul_nt(dh2, psi.w2);
  for (std::size_t i = 0; i < dh1.data.size(); ++i) {
    if (t.h1_pre.data[i] <= 0.0) dh1.data[i] = 0.0;
  }
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < dh1.cols; ++c) grads.b1(0, c) += dh1(r, c);
  }
  axpy(grads.w1, matmul_tn(t.input, dh1));
}

MlpTrace trace_from_batch(const BatchTrace& bt, int row) {
  MlpTrace t;
  t.input.assign(bt.input.row(row), bt.input.row(row) + bt.input.cols);
  t.h1_pre.assign(bt.h1_pre.row(row), bt.h1_pre.row(row) + bt.h1_pre.cols);
  t.h2_pre.assign(bt.h2_pre.row(row), bt.h2_pre.row(row) + bt.h2_pre.cols);
  t.logit = bt.logits[static_cast<std::size_t>(row)];
  return t;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  return Matrix(j.at("rows").get<int>(), j.at("cols").get<int>(),
                j.at("data").get<std::vector<double>>());
}

}  // namespace

EdgePredictor init_edge_predictor(int latent_dim, Rng& rng) {
  if (latent_dim < 1) {
    throw std::invalid_argument("init_edge_predictor: bad latent dim");
  }
  EdgePredictor p;
  p.w1 = glorot(2 * latent_dim, 128, rng);
  p.b1 = Matrix(1, 128);
  p.w2 = glorot(128, 64, rng);
  p.b2 = Matrix(1, 64);
  p.w3 = glorot(64, 1, rng);
  p.b3 = Matrix(1, 1);
  return p;
}

EdgePredictor zeros_like(const EdgePredictor& p) {
  EdgePredictor z;
  z.w1 = Matrix(p.w1.rows, p.w1.cols);
  z.b1 = Matrix(p.b1.rows, p.b1.cols);
  z.w2 = Matrix(p.w2.rows, p.w2.cols);
  z.b2 = Matrix(p.b2.rows, p.b2.cols);
  z.w3 = Matrix(p.w3.rows, p.w3.cols);
  z.b3 = Matrix(p.b3.rows, p.b3.cols);
  return z;
}

std::vector<Matrix*> param_list(EdgePredictor& p) {
  return {&p.w1, &p.b1, &p.w2, &p.b2, &p.w3, &p.b3};
}

std::vector<const Matrix*> param_list(const EdgePredictor& p) {
  return {&p.w1, &p.b1, &p.w2, &p.b2, &p.w3, &p.b3};
}

void axpy_params(EdgePredictor& dst, const EdgePredictor& src, double scale) {
  auto d = param_list(dst);
  auto s = param_list(src);
  for (std::size_t i = 0; i < d.size(); ++i) axpy(*d[i], *s[i], scale);
}

MlpTrace psi_forward(const EdgePredictor& psi, std::span<const double> fu,
                     std::span<const double> fv) {
  if (static_cast<int>(fu.size() + fv.size()) != psi.input_dim()) {
    throw std::invalid_argument("psi_forward: latent dimension mismatch");
  }
  Matrix input(1, psi.input_dim());
  std::copy(fu.begin(), fu.end(), input.row(0));
  std::copy(fv.begin(), fv.end(), input.row(0) + fu.size());
  return trace_from_batch(psi_forward_batch(psi, std::move(input)), 0);
}

void psi_backward(const EdgePredictor& psi, const MlpTrace& trace, double dlogit,
                  EdgePredictor& grads) {
  BatchTrace bt;
  bt.input = Matrix(1, static_cast<int>(trace.input.size()), trace.input);
  bt.h1_pre = Matrix(1, static_cast<int>(trace.h1_pre.size()), trace.h1_pre);
  bt.h2_pre = Matrix(1, static_cast<int>(trace.h2_pre.size()), trace.h2_pre);
  bt.logits = {trace.logit};
  psi_backward_batch(psi, bt, {dlogit}, grads);
}

double edge_prob(const EdgePredictor& psi, std::span<const double> fu,
                 std::span<const double> fv) {
  const double a = psi_forward(psi, fu, fv).logit;
  const double b = psi_forward(psi, fv, fu).logit;
  return 0.5 * (sigmoid(a) + sigmoid(b));
}

STEdgeSample st_sample(double prob, double tau, Rng& rng) {
  STEdgeSample s;
  s.tau = tau;
  s.prob = std::clamp(prob, kProbClamp, 1.0 - kProbClamp);
  const double a1 = std::log(s.prob) + rng.gumbel();
  const double a0 = std::log(1.0 - s.prob) + rng.gumbel();
  s.hard = a1 > a0 ? 1 : 0;
  s.soft = sigmoid((a1 - a0) / tau);
  return s;
}

namespace {

// f * w1[row0 .. row0+dim) : per-node projection through one half of the
// first layer, shared across every pair the node participates in
std::vector<double> project_half(const EdgePredictor& psi, const double* f, int dim, int row0) {
  std::vector<double> out(static_cast<std::size_t>(psi.w1.cols), 0.0);
  for (int k = 0; k < dim; ++k) {
    const double fk = f[k];
    if (fk == 0.0) continue;
    const double* wrow = psi.w1.row(row0 + k);
    for (int j = 0; j < psi.w1.cols; ++j) out[static_cast<std::size_t>(j)] += fk * wrow[j];
  }
  return out;
}

// h1_pre = first + second + b1, then the 128 -> 64 -> 1 tail
MlpTrace tail_from_projection(const EdgePredictor& psi, const std::vector<double>& first,
                              const std::vector<double>& second) {
  MlpTrace t;
  const std::size_t h1n = static_cast<std::size_t>(psi.w1.cols);
  t.h1_pre.resize(h1n);
  for (std::size_t j = 0; j < h1n; ++j) {
    t.h1_pre[j] = first[j] + second[j] + psi.b1(0, static_cast<int>(j));
  }
  t.h2_pre.resize(static_cast<std::size_t>(psi.w2.cols));
  for (int c = 0; c < psi.w2.cols; ++c) t.h2_pre[static_cast<std::size_t>(c)] = psi.b2(0, c);
  for (int r = 0; r < psi.w2.rows; ++r) {
    const double h1r = std::max(t.h1_pre[static_cast<std::size_t>(r)], 0.0);
    if (h1r == 0.0) continue;
    const double* wrow = psi.w2.row(r);
    for (int c = 0; c < psi.w2.cols; ++c) t.h2_pre[static_cast<std::size_t>(c)] += h1r * wrow[c];
  }
  double logit = psi.b3(0, 0);
  for (int r = 0; r < psi.w3.rows; ++r) {
    logit += std::max(t.h2_pre[static_cast<std::size_t>(r)], 0.0) * psi.w3(r, 0);
  }
  t.logit = logit;
  return t;
}

}  // namespace

EpConnection connect_ep(const GraphPart& src, const GraphPart& dst, const Matrix& latents_src,
                        const Matrix& latents_dst, const EdgePredictor& psi, double tau, Rng& rng) {
  EpConnection out;
  const auto u_src = src.positive_deficit_nodes();
  const auto u_dst = dst.positive_deficit_nodes();
  if (u_src.empty() || u_dst.empty()) return out;
  const int dim = latents_src.cols;
  if (2 * dim != psi.input_dim()) {
    throw std::invalid_argument("connect_ep: latent dimension mismatch");
  }

  // one projection per (node, input-half); pairs reuse them
  std::vector<std::vector<double>> src_top(u_src.size()), src_bot(u_src.size());
  std::vector<std::vector<double>> dst_top(u_dst.size()), dst_bot(u_dst.size());
  for (std::size_t i = 0; i < u_src.size(); ++i) {
    const double* f = latents_src.row(u_src[i]);
    src_top[i] = project_half(psi, f, dim, 0);
    src_bot[i] = project_half(psi, f, dim, dim);
  }
  for (std::size_t i = 0; i < u_dst.size(); ++i) {
    const double* f = latents_dst.row(u_dst[i]);
    dst_top[i] = project_half(psi, f, dim, 0);
    dst_bot[i] = project_half(psi, f, dim, dim);
  }

  for (std::size_t si = 0; si < u_src.size(); ++si) {
    const double* fu = latents_src.row(u_src[si]);
    for (std::size_t di = 0; di < u_dst.size(); ++di) {
      const double* fv = latents_dst.row(u_dst[di]);
      MlpTrace trace_uv = tail_from_projection(psi, src_top[si], dst_bot[di]);
      MlpTrace trace_vu = tail_from_projection(psi, dst_top[di], src_bot[si]);
      const double prob = 0.5 * (sigmoid(trace_uv.logit) + sigmoid(trace_vu.logit));
      const STEdgeSample sample = st_sample(prob, tau, rng);
      if (sample.hard == 1) {
        EdgeSurrogate s;
        s.src_orig = u_src[si];
        s.dst_orig = u_dst[di];
        trace_uv.input.reserve(static_cast<std::size_t>(2 * dim));
        trace_uv.input.insert(trace_uv.input.end(), fu, fu + dim);
        trace_uv.input.insert(trace_uv.input.end(), fv, fv + dim);
        trace_vu.input.reserve(static_cast<std::size_t>(2 * dim));
        trace_vu.input.insert(trace_vu.input.end(), fv, fv + dim);
        trace_vu.input.insert(trace_vu.input.end(), fu, fu + dim);
        s.trace_uv = std::move(trace_uv);
        s.trace_vu = std::move(trace_vu);
        s.sample = sample;
        out.edges.emplace_back(u_src[si], u_dst[di]);
        out.surrogates.push_back(std::move(s));
      }
    }
  }
  return out;
}

void accumulate_surrogate_grads(const EdgePredictor& psi,
                                std::span<const EdgeSurrogate> surrogates,
                                std::span<const double> dloss_dweights, EdgePredictor& grads) {
  if (surrogates.empty()) return;
  if (surrogates.size() != dloss_dweights.size()) {
    throw std::invalid_argument("accumulate_surrogate_grads: size mismatch");
  }
  const int in_dim = static_cast<int>(surrogates.front().trace_uv.input.size());
  BatchTrace bt;
  const int rows = 2 * static_cast<int>(surrogates.size());
  bt.input = Matrix(rows, in_dim);
  bt.h1_pre = Matrix(rows, static_cast<int>(surrogates.front().trace_uv.h1_pre.size()));
  bt.h2_pre = Matrix(rows, static_cast<int>(surrogates.front().trace_uv.h2_pre.size()));
  bt.logits.resize(static_cast<std::size_t>(rows));
  std::vector<double> dlogits(static_cast<std::size_t>(rows));
  for (std::size_t k = 0; k < surrogates.size(); ++k) {
    const EdgeSurrogate& s = surrogates[k];
    // straight-through: d(weight)/d(logit p) taken from the soft relaxation
    const double dsoft_dlogitp = s.sample.soft * (1.0 - s.sample.soft) / s.sample.tau;
    const double dlogitp_dp = 1.0 / (s.sample.prob * (1.0 - s.sample.prob));
    const double dp = dloss_dweights[k] * dsoft_dlogitp * dlogitp_dp;
    const double sa = sigmoid(s.trace_uv.logit);
    const double sb = sigmoid(s.trace_vu.logit);
    const int r_uv = 2 * static_cast<int>(k);
    const int r_vu = r_uv + 1;
    auto fill_row = [&](int r, const MlpTrace& t) {
      std::copy(t.input.begin(), t.input.end(), bt.input.row(r));
      std::copy(t.h1_pre.begin(), t.h1_pre.end(), bt.h1_pre.row(r));
      std::copy(t.h2_pre.begin(), t.h2_pre.end(), bt.h2_pre.row(r));
      bt.logits[static_cast<std::size_t>(r)] = t.logit;
    };
    fill_row(r_uv, s.trace_uv);
    fill_row(r_vu, s.trace_vu);
    dlogits[static_cast<std::size_t>(r_uv)] = dp * 0.5 * sa * (1.0 - sa);
    dlogits[static_cast<std::size_t>(r_vu)] = dp * 0.5 * sb * (1.0 - sb);
  }
  psi_backward_batch(psi, bt, dlogits, grads);
}

void accumulate_surrogate_grads(const EdgePredictor& psi, const EdgeSurrogate& s,
                                double dloss_dweight, EdgePredictor& grads) {
  accumulate_surrogate_grads(psi, std::span<const EdgeSurrogate>(&s, 1),
                             std::span<const double>(&dloss_dweight, 1), grads);
}

std::vector<EpTrainPair> sample_ep_pairs(const GraphInstance& g, const Matrix& latents, int cap,
                                         Rng& rng) {
  std::vector<EpTrainPair> pairs;
  const int n = g.num_nodes();
  const int dim = latents.cols;
  if (n < 2) return pairs;
  const long num_edges = static_cast<long>(g.edges().size());
  const long non_edges = static_cast<long>(n) * (n - 1) / 2 - num_edges;

  auto push_pair = [&](NodeId u, NodeId v, double label) {
    EpTrainPair p;
    p.fu.assign(latents.row(u), latents.row(u) + dim);
    p.fv.assign(latents.row(v), latents.row(v) + dim);
    p.label = label;
    pairs.push_back(std::move(p));
  };

  const int m_pos = static_cast<int>(std::min<long>(num_edges, cap));
  const int m_neg = num_edges == 0 ? static_cast<int>(std::min<long>(non_edges, cap))
                                   : static_cast<int>(std::min<long>(m_pos, non_edges));
  for (int i : rng.sample_without_replacement(static_cast<int>(num_edges), m_pos)) {
    const Edge& e = g.edges()[static_cast<std::size_t>(i)];
    push_pair(e.u, e.v, 1.0);
  }
  if (m_neg > 0) {
    std::set<std::pair<NodeId, NodeId>> chosen;
    if (non_edges <= 2 * static_cast<long>(m_neg)) {
      // few non-edges: enumerate and sample exactly
      std::vector<std::pair<NodeId, NodeId>> all;
      for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
          if (!g.has_edge(u, v)) all.emplace_back(u, v);
        }
      }
      for (int i : rng.sample_without_replacement(static_cast<int>(all.size()), m_neg)) {
        chosen.insert(all[static_cast<std::size_t>(i)]);
      }
    } else {
      while (static_cast<int>(chosen.size()) < m_neg) {
        NodeId u = static_cast<NodeId>(rng.index(static_cast<std::size_t>(n)));
        NodeId v = static_cast<NodeId>(rng.index(static_cast<std::size_t>(n)));
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        if (g.has_edge(u, v)) continue;
        chosen.insert({u, v});
      }
    }
    for (const auto& [u, v] : chosen) push_pair(u, v, 0.0);
  }
  return pairs;
}

double ep_bce_loss(const EdgePredictor& psi, const std::vector<EpTrainPair>& pairs) {
  double loss = 0.0;
  for (const EpTrainPair& p : pairs) {
    const double prob = std::clamp(edge_prob(psi, p.fu, p.fv), 1e-12, 1.0 - 1e-12);
    loss += -(p.label * std::log(prob) + (1.0 - p.label) * std::log(1.0 - prob));
  }
  return pairs.empty() ? 0.0 : loss / static_cast<double>(pairs.size());
}

double ep_pair_accuracy(const EdgePredictor& psi, const std::vector<EpTrainPair>& pairs) {
  if (pairs.empty()) return 0.0;
  int correct = 0;
  for (const EpTrainPair& p : pairs) {
    const double prob = edge_prob(psi, p.fu, p.fv);
    if ((prob > 0.5) == (p.label > 0.5)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

double supervised_ep_update(EdgePredictor& psi, const std::vector<EpTrainPair>& pairs,
                            AdamState& state) {
  if (pairs.empty()) return 0.0;
  const int dim = static_cast<int>(pairs.front().fu.size());
  Matrix input(2 * static_cast<int>(pairs.size()), 2 * dim);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    double* uv = input.row(2 * static_cast<int>(i));
    double* vu = input.row(2 * static_cast<int>(i) + 1);
    std::copy(pairs[i].fu.begin(), pairs[i].fu.end(), uv);
    std::copy(pairs[i].fv.begin(), pairs[i].fv.end(), uv + dim);
    std::copy(pairs[i].fv.begin(), pairs[i].fv.end(), vu);
    std::copy(pairs[i].fu.begin(), pairs[i].fu.end(), vu + dim);
  }
  const BatchTrace bt = psi_forward_batch(psi, std::move(input));
  EdgePredictor grads = zeros_like(psi);
  std::vector<double> dlogits(2 * pairs.size());
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double sa = sigmoid(bt.logits[2 * i]);
    const double sb = sigmoid(bt.logits[2 * i + 1]);
    const double prob = std::clamp(0.5 * (sa + sb), 1e-12, 1.0 - 1e-12);
    const double t = pairs[i].label;
    loss += -(t * std::log(prob) + (1.0 - t) * std::log(1.0 - prob)) * inv_n;
    const double dp = (prob - t) / (prob * (1.0 - prob)) * inv_n;
    dlogits[2 * i] = dp * 0.5 * sa * (1.0 - sa);
    dlogits[2 * i + 1] = dp * 0.5 * sb * (1.0 - sb);
  }
  psi_backward_batch(psi, bt, dlogits, grads);
  adam_step_list(param_list(psi), param_list(std::as_const(grads)), state);
  return loss;
}

void save_edge_predictor(const EdgePredictor& psi, const std::string& path) {
  nlohmann::json j;
  j["w1"] = matrix_to_json(psi.w1);
  j["b1"] = matrix_to_json(psi.b1);
  j["w2"] = matrix_to_json(psi.w2);
  j["b2"] = matrix_to_json(psi.b2);
  j["w3"] = matrix_to_json(psi.w3);
  j["b3"] = matrix_to_json(psi.b3);
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint " + path);
  }
  out << j.dump() << "\n";
}

EdgePredictor load_edge_predictor(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read checkpoint " + path);
  }
  nlohmann::json j;
  in >> j;
  EdgePredictor p;
  p.w1 = matrix_from_json(j.at("w1"));
  p.b1 = matrix_from_json(j.at("b1"));
  p.w2 = matrix_from_json(j.at("w2"));
  p.b2 = matrix_from_json(j.at("b2"));
  p.w3 = matrix_from_json(j.at("w3"));
  p.b3 = matrix_from_json(j.at("b3"));
  return p;
}

}  // namespace graphmix
