#include "graphmix/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "graphmix/metrics.hpp"
#include "graphmix/parallel.hpp"
#include "graphmix/saliency.hpp"

namespace graphmix {

namespace {

// batch items are processed in fixed chunks with per-item rng streams;
// chunk-local partial sums are reduced in index order, so results do not
// depend on the worker count
constexpr int kChunkItems = 16;

std::vector<double> one_hot(int label, int num_classes) {
  std::vector<double> t(static_cast<std::size_t>(num_classes), 0.0);
  t[static_cast<std::size_t>(label)] = 1.0;
  return t;
}

std::vector<double> mixed_target(int src_label, int dst_label, double lambda, int num_classes) {
  std::vector<double> t(static_cast<std::size_t>(num_classes), 0.0);
  t[static_cast<std::size_t>(src_label)] += lambda;
  t[static_cast<std::size_t>(dst_label)] += 1.0 - lambda;
  return t;
}

int argmax_row(const Matrix& logits) {
  int best = 0;
  for (int j = 1; j < logits.cols; ++j) {
    if (logits(0, j) > logits(0, best)) best = j;
  }
  return best;
}

int chunk_count(std::size_t items) {
  return static_cast<int>((items + kChunkItems - 1) / kChunkItems);
}

struct ChunkSums {
  ModelParams grads;
  EdgePredictor psi_grads;
  bool has_psi = false;
  double loss_orig = 0.0;
  double loss_aug = 0.0;
  double hits = 0.0;
  int done = 0;
  int skipped = 0;
};

struct SizingResult {
  int src_count = 1;
  int dst_count = 1;
};

// batch-average partial K-hop sizes, used as the scattered-node counts
SizingResult scattered_sizing(const TrainContext& ctx, const Dataset& ds,
                              const std::vector<int>& batch, const std::vector<int>& perm,
                              const std::vector<SaliencyVector>& sal, int k_hops, double p_percent,
                              Rng sizing_rng) {
  double src_sum = 0.0;
  double dst_sum = 0.0;
  const MixConfig& mix = ctx.cfg.mix;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const GraphInstance& src =
        ds.graphs[static_cast<std::size_t>(batch[static_cast<std::size_t>(perm[i])])];
    const GraphInstance& dst = ds.graphs[static_cast<std::size_t>(batch[i])];
    const NodeSet src_anchors =
        ctx.cfg.ablation.random_subgraph
            ? select_random_anchors(src, mix.anchor_percent, sizing_rng)
            : select_salient_anchors(sal[static_cast<std::size_t>(perm[i])], mix.anchor_percent,
                                     sizing_rng);
    src_sum += static_cast<double>(
        partial_k_hop(src, src_anchors, k_hops, p_percent, sizing_rng).size());
    const NodeSet dst_anchors = select_random_anchors(dst, mix.anchor_percent, sizing_rng);
    dst_sum += static_cast<double>(
        partial_k_hop(dst, dst_anchors, k_hops, p_percent, sizing_rng).size());
  }
  const double n = static_cast<double>(batch.size());
  SizingResult out;
  out.src_count = std::max(1, static_cast<int>(std::lround(src_sum / n)));
  out.dst_count = std::max(1, static_cast<int>(std::lround(dst_sum / n)));
  return out;
}

}  // namespace

std::string augment_mode_name(AugmentMode m) {
  switch (m) {
    case AugmentMode::None: return "none";
    case AugmentMode::TransplantDp: return "transplant-dp";
    case AugmentMode::TransplantEp: return "transplant-ep";
    case AugmentMode::DropN: return "dropn";
    case AugmentMode::PermE: return "perme";
    case AugmentMode::MaskN: return "maskn";
    case AugmentMode::SubG: return "subg";
    case AugmentMode::ManifoldMixup: return "manifold-mixup";
  }
  return "none";
}

AugmentMode augment_mode_from_name(const std::string& name) {
  if (name == "none") return AugmentMode::None;
  if (name == "transplant-dp") return AugmentMode::TransplantDp;
  if (name == "transplant-ep") return AugmentMode::TransplantEp;
  if (name == "dropn") return AugmentMode::DropN;
  if (name == "perme") return AugmentMode::PermE;
  if (name == "maskn") return AugmentMode::MaskN;
  if (name == "subg") return AugmentMode::SubG;
  if (name == "manifold-mixup") return AugmentMode::ManifoldMixup;
  throw std::invalid_argument("unknown augment mode: " + name);
}

void TrainConfig::validate() const {
  if (num_layers < 1 || hidden_dim < 1 || batch_size < 1 || max_epochs < 1) {
    throw std::invalid_argument("TrainConfig: bad dimensions");
  }
  if (early_stop_patience < 1 || lr_decay_patience < 1) {
    throw std::invalid_argument("TrainConfig: patience values must be positive");
  }
  if (lr <= 0.0 || lr_decay_factor <= 0.0 || lr_decay_factor > 1.0) {
    throw std::invalid_argument("TrainConfig: bad learning-rate settings");
  }
  mix.validate();
}

EvalResult evaluate(const ModelParams& model, const Dataset& ds, const std::vector<int>& indices) {
  if (indices.empty()) {
    throw std::invalid_argument("evaluate: empty graph list");
  }
  std::vector<int> labels(indices.size());
  std::vector<std::vector<double>> probs(indices.size());
  std::vector<double> losses(indices.size());
  parallel_tasks(chunk_count(indices.size()), [&](int c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kChunkItems;
    const std::size_t end = std::min(indices.size(), begin + kChunkItems);
    for (std::size_t i = begin; i < end; ++i) {
      const GraphInstance& g = ds.graphs[static_cast<std::size_t>(indices[i])];
      auto [logits, tape] = forward(model, g, Mode::Eval, nullptr);
      losses[i] = softmax_cross_entropy(logits, one_hot(g.label(), ds.num_classes));
      labels[i] = g.label();
      probs[i] = softmax(logits);
    }
  });
  EvalResult out;
  out.accuracy = accuracy_metric(labels, probs);
  out.auroc = auroc_metric(labels, probs, ds.num_classes);
  out.ece = ece_metric(labels, probs, 10);
  double loss = 0.0;
  for (double l : losses) loss += l;
  out.mean_loss = loss / static_cast<double>(indices.size());
  return out;
}

TrainContext make_train_context(const TrainConfig& cfg, const Dataset& ds) {
  cfg.validate();
  TrainContext ctx;
  ctx.cfg = cfg;
  Rng init_rng(cfg.seed);
  ctx.model = init_params(cfg.arch, cfg.readout, ds.feature_dim, cfg.hidden_dim, cfg.num_layers,
                          ds.num_classes, init_rng);
  ctx.model_opt = make_adam_state(param_list(std::as_const(ctx.model)), cfg.lr);
  if (cfg.augment == AugmentMode::TransplantEp) {
    ctx.psi = init_edge_predictor(cfg.hidden_dim, init_rng);
    ctx.psi_opt = make_adam_state(param_list(std::as_const(ctx.psi)), cfg.lr);
    ctx.has_psi = true;
  }
  ctx.rng = Rng(mix_seed(cfg.seed));
  return ctx;
}

StepReport train_step(TrainContext& ctx, const Dataset& ds, const std::vector<int>& batch) {
  if (batch.empty()) {
    throw std::invalid_argument("train_step: empty batch");
  }
  const TrainConfig& cfg = ctx.cfg;
  const int num_classes = ds.num_classes;
  const std::size_t bsz = batch.size();
  const double inv_b = 1.0 / static_cast<double>(bsz);
  const bool ep_mode = cfg.augment == AugmentMode::TransplantEp;
  const bool transplant_mode = ep_mode || cfg.augment == AugmentMode::TransplantDp;
  const int chunks = chunk_count(bsz);

  StepReport rep;
  ModelParams grad_total = zeros_like(ctx.model);

  // supervised pass on the originals; saliency is a byproduct of this backward
  std::vector<SaliencyVector> sal(bsz);
  std::vector<Matrix> latents(ep_mode ? bsz : 0);
  {
    const std::uint64_t phase_seed = ctx.rng.draw_seed();
    std::vector<ChunkSums> acc(static_cast<std::size_t>(chunks));
    parallel_tasks(chunks, [&](int c) {
      ChunkSums& a = acc[static_cast<std::size_t>(c)];
      a.grads = zeros_like(ctx.model);
      const std::size_t begin = static_cast<std::size_t>(c) * kChunkItems;
      const std::size_t end = std::min(bsz, begin + kChunkItems);
      for (std::size_t i = begin; i < end; ++i) {
        Rng item_rng(mix_seed(phase_seed + i));
        const GraphInstance& g = ds.graphs[static_cast<std::size_t>(batch[i])];
        auto [logits, tape] = forward(ctx.model, g, Mode::Train, &item_rng);
        const auto target = one_hot(g.label(), num_classes);
        a.loss_orig += softmax_cross_entropy(logits, target) * inv_b;
        if (argmax_row(logits) == g.label()) a.hits += 1.0;
        auto back = backward(ctx.model, tape, target);
        axpy_params(a.grads, back.grads, inv_b);
        sal[i] = node_saliency(back.grad_last_features);
        if (ep_mode) latents[i] = std::move(tape.last_features);
      }
    });
    for (const ChunkSums& a : acc) {
      axpy_params(grad_total, a.grads, 1.0);
      rep.loss_orig += a.loss_orig;
      rep.train_hits += a.hits;
    }
  }

  if (ep_mode) {
    const std::uint64_t phase_seed = ctx.rng.draw_seed();
    std::vector<std::vector<EpTrainPair>> per_item(bsz);
    parallel_tasks(chunks, [&](int c) {
      const std::size_t begin = static_cast<std::size_t>(c) * kChunkItems;
      const std::size_t end = std::min(bsz, begin + kChunkItems);
      for (std::size_t i = begin; i < end; ++i) {
        Rng item_rng(mix_seed(phase_seed + i));
        per_item[i] = sample_ep_pairs(ds.graphs[static_cast<std::size_t>(batch[i])], latents[i],
                                      cfg.ep_pair_cap, item_rng);
      }
    });
    std::vector<EpTrainPair> pairs;
    for (auto& pi : per_item) {
      for (auto& p : pi) pairs.push_back(std::move(p));
    }
    supervised_ep_update(ctx.psi, pairs, ctx.psi_opt);
  }

  if (transplant_mode) {
    std::vector<int> perm(bsz);
    std::iota(perm.begin(), perm.end(), 0);
    ctx.rng.shuffle(perm);
    const auto [k_hops, p_percent] = sample_mix_params(cfg.mix, ctx.rng);

    TransplantOptions opts;
    opts.salient_src_anchors = !cfg.ablation.random_subgraph;
    opts.no_cross_edges = cfg.ablation.no_cross_edges;
    opts.size_based_label = cfg.ablation.size_based_label;
    if (cfg.ablation.scattered_nodes) {
      const SizingResult sizing = scattered_sizing(ctx, ds, batch, perm, sal, k_hops, p_percent,
                                                   Rng(ctx.rng.draw_seed()));
      opts.scattered = true;
      opts.scattered_src_count = sizing.src_count;
      opts.scattered_dst_count = sizing.dst_count;
    }

    const bool dumping = !cfg.dump_mixed_dir.empty() && ctx.dumped_mixed < cfg.dump_mixed_limit;
    std::vector<std::string> dumps(dumping ? bsz : 0);

    const std::uint64_t phase_seed = ctx.rng.draw_seed();
    std::vector<ChunkSums> acc(static_cast<std::size_t>(chunks));
    parallel_tasks(chunks, [&](int c) {
      ChunkSums& a = acc[static_cast<std::size_t>(c)];
      a.grads = zeros_like(ctx.model);
      if (ep_mode) {
        a.psi_grads = zeros_like(ctx.psi);
        a.has_psi = true;
      }
      const std::size_t begin = static_cast<std::size_t>(c) * kChunkItems;
      const std::size_t end = std::min(bsz, begin + kChunkItems);
      for (std::size_t i = begin; i < end; ++i) {
        Rng item_rng(mix_seed(phase_seed + i));
        const std::size_t si = static_cast<std::size_t>(perm[i]);
        const GraphInstance& src = ds.graphs[static_cast<std::size_t>(batch[si])];
        const GraphInstance& dst = ds.graphs[static_cast<std::size_t>(batch[i])];

        EpConnection ep_conn;
        CrossEdgeFn cross_fn;
        if (ep_mode && !opts.no_cross_edges) {
          cross_fn = [&](const GraphPart& sp, const GraphPart& dp, Rng& r) {
            ep_conn = connect_ep(sp, dp, latents[si], latents[i], ctx.psi, cfg.st_tau, r);
            return ep_conn.edges;
          };
        }
        const TransplantResult tr = graph_transplant(src, sal[si], dst, sal[i], cfg.mix, k_hops,
                                                     p_percent, item_rng, cross_fn, opts);

        if (tr.skipped) {
          // train on the unmodified destination with its own label
          ++a.skipped;
          auto [logits, tape] = forward(ctx.model, dst, Mode::Train, &item_rng);
          const auto target = one_hot(dst.label(), num_classes);
          a.loss_aug += softmax_cross_entropy(logits, target) * inv_b;
          auto back = backward(ctx.model, tape, target);
          axpy_params(a.grads, back.grads, inv_b);
          continue;
        }
        ++a.done;
        if (dumping) dumps[i] = describe_transplant(tr);

        std::vector<std::pair<int, int>> watched;
        if (ep_mode && !ep_conn.surrogates.empty()) {
          std::unordered_map<NodeId, NodeId> src_new, dst_new;
          const auto& prov = tr.merged->provenance;
          for (std::size_t nid = 0; nid < prov.size(); ++nid) {
            (prov[nid].side == Side::Source ? src_new : dst_new)[prov[nid].original_id] =
                static_cast<NodeId>(nid);
          }
          watched.reserve(ep_conn.surrogates.size());
          for (const EdgeSurrogate& s : ep_conn.surrogates) {
            watched.emplace_back(src_new.at(s.src_orig), dst_new.at(s.dst_orig));
          }
        }

        auto [logits, tape] = forward(ctx.model, tr.graph(), Mode::Train, &item_rng);
        const auto target = mixed_target(tr.source_label, tr.dest_label, tr.lambda, num_classes);
        a.loss_aug += softmax_cross_entropy(logits, target) * inv_b;
        auto back = backward(ctx.model, tape, target, watched);
        axpy_params(a.grads, back.grads, inv_b);
        if (!watched.empty()) {
          std::vector<double> scaled = back.grad_edge_weights;
          for (double& g : scaled) g *= inv_b;
          accumulate_surrogate_grads(ctx.psi, ep_conn.surrogates, scaled, a.psi_grads);
        }
      }
    });

    EdgePredictor psi_grads;
    if (ep_mode) psi_grads = zeros_like(ctx.psi);
    for (const ChunkSums& a : acc) {
      axpy_params(grad_total, a.grads, 1.0);
      if (a.has_psi) axpy_params(psi_grads, a.psi_grads, 1.0);
      rep.loss_aug += a.loss_aug;
      rep.transplants_done += a.done;
      rep.transplants_skipped += a.skipped;
    }
    if (dumping) {
      for (const std::string& text : dumps) {
        if (text.empty() || ctx.dumped_mixed >= cfg.dump_mixed_limit) continue;
        const std::string path =
            cfg.dump_mixed_dir + "/mixed_" + std::to_string(ctx.dumped_mixed) + ".txt";
        std::ofstream out(path);
        if (out) {
          out << text;
          ++ctx.dumped_mixed;
        }
      }
    }
    if (ep_mode) {
      adam_step_list(param_list(ctx.psi), param_list(std::as_const(psi_grads)), ctx.psi_opt);
    }
  } else if (cfg.augment == AugmentMode::DropN || cfg.augment == AugmentMode::PermE ||
             cfg.augment == AugmentMode::MaskN || cfg.augment == AugmentMode::SubG) {
    BaselineConfig bc;
    bc.ratio = cfg.augment == AugmentMode::SubG ? cfg.subg_keep_ratio : cfg.baseline_ratio;
    switch (cfg.augment) {
      case AugmentMode::DropN: bc.kind = BaselineKind::DropN; break;
      case AugmentMode::PermE: bc.kind = BaselineKind::PermE; break;
      case AugmentMode::MaskN: bc.kind = BaselineKind::MaskN; break;
      default: bc.kind = BaselineKind::SubG; break;
    }
    const std::uint64_t phase_seed = ctx.rng.draw_seed();
    std::vector<ChunkSums> acc(static_cast<std::size_t>(chunks));
    parallel_tasks(chunks, [&](int c) {
      ChunkSums& a = acc[static_cast<std::size_t>(c)];
      a.grads = zeros_like(ctx.model);
      const std::size_t begin = static_cast<std::size_t>(c) * kChunkItems;
      const std::size_t end = std::min(bsz, begin + kChunkItems);
      for (std::size_t i = begin; i < end; ++i) {
        Rng item_rng(mix_seed(phase_seed + i));
        const GraphInstance& g = ds.graphs[static_cast<std::size_t>(batch[i])];
        const GraphInstance aug = apply_structural_baseline(g, bc, item_rng);
        auto [logits, tape] = forward(ctx.model, aug, Mode::Train, &item_rng);
        const auto target = one_hot(g.label(), num_classes);
        a.loss_aug += softmax_cross_entropy(logits, target) * inv_b;
        auto back = backward(ctx.model, tape, target);
        axpy_params(a.grads, back.grads, inv_b);
      }
    });
    for (const ChunkSums& a : acc) {
      axpy_params(grad_total, a.grads, 1.0);
      rep.loss_aug += a.loss_aug;
    }
  } else if (cfg.augment == AugmentMode::ManifoldMixup) {
    std::vector<int> perm(bsz);
    std::iota(perm.begin(), perm.end(), 0);
    ctx.rng.shuffle(perm);
    const std::uint64_t phase_seed = ctx.rng.draw_seed();
    std::vector<ChunkSums> acc(static_cast<std::size_t>(chunks));
    parallel_tasks(chunks, [&](int c) {
      ChunkSums& a = acc[static_cast<std::size_t>(c)];
      a.grads = zeros_like(ctx.model);
      const std::size_t begin = static_cast<std::size_t>(c) * kChunkItems;
      const std::size_t end = std::min(bsz, begin + kChunkItems);
      for (std::size_t i = begin; i < end; ++i) {
        Rng item_rng(mix_seed(phase_seed + i));
        const GraphInstance& ga = ds.graphs[static_cast<std::size_t>(batch[i])];
        const GraphInstance& gb =
            ds.graphs[static_cast<std::size_t>(batch[static_cast<std::size_t>(perm[i])])];
        ForwardTape tape_a, tape_b, tape_head;
        const Matrix pooled_a = gnn_embed(ctx.model, ga, tape_a);
        const Matrix pooled_b = gnn_embed(ctx.model, gb, tape_b);
        const MixedRepr mix = manifold_mixup_combine(
            std::span<const double>(pooled_a.data), std::span<const double>(pooled_b.data),
            ga.label(), gb.label(), num_classes, cfg.mixup_alpha, item_rng);
        const Matrix mixed(1, pooled_a.cols, mix.repr);
        const Matrix logits = head_forward(ctx.model, mixed, Mode::Train, &item_rng, tape_head);
        a.loss_aug += softmax_cross_entropy(logits, mix.label) * inv_b;
        const auto probs = softmax(logits);
        Matrix dlogits(1, num_classes);
        for (int j = 0; j < num_classes; ++j) {
          dlogits(0, j) =
              probs[static_cast<std::size_t>(j)] - mix.label[static_cast<std::size_t>(j)];
        }
        ModelParams pair_grads = zeros_like(ctx.model);
        const Matrix dpooled = head_backward(ctx.model, tape_head, dlogits, pair_grads);
        Matrix dpooled_a = dpooled;
        scale_inplace(dpooled_a, 1.0 - mix.lambda);
        Matrix dpooled_b = dpooled;
        scale_inplace(dpooled_b, mix.lambda);
        gnn_backward(ctx.model, tape_a, dpooled_a, pair_grads);
        gnn_backward(ctx.model, tape_b, dpooled_b, pair_grads);
        axpy_params(a.grads, pair_grads, inv_b);
      }
    });
    for (const ChunkSums& a : acc) {
      axpy_params(grad_total, a.grads, 1.0);
      rep.loss_aug += a.loss_aug;
    }
  }

  adam_step(ctx.model, grad_total, ctx.model_opt);
  ++ctx.iteration;
  rep.train_hits /= static_cast<double>(bsz);
  return rep;
}

RunMetrics run_fold(const Dataset& raw, const SplitSpec& split, const TrainConfig& cfg,
                    const std::string& checkpoint_prefix) {
  const auto t_start = std::chrono::steady_clock::now();
  const auto train_idx = split.indices(Part::Train);
  const auto val_idx = split.indices(Part::Val);
  const auto test_idx = split.indices(Part::Test);
  if (train_idx.empty() || val_idx.empty() || test_idx.empty()) {
    throw std::invalid_argument("run_fold: every split part must be nonempty");
  }

  std::vector<int> stats_idx = train_idx;
  stats_idx.insert(stats_idx.end(), val_idx.begin(), val_idx.end());
  const FeatureStats stats = compute_feature_stats(raw, stats_idx);
  const Dataset ds = standardize(raw, stats);

  TrainContext ctx = make_train_context(cfg, ds);
  RunMetrics rm;
  ModelParams best_model = ctx.model;
  EdgePredictor best_psi = ctx.psi;
  double best_val_acc = -1.0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  long val_improve_iter = 0;
  long loss_improve_iter = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::vector<int> order = train_idx;
    ctx.rng.shuffle(order);
    EpochRecord er;
    int num_batches = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), pos + static_cast<std::size_t>(cfg.batch_size));
      const std::vector<int> batch(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                   order.begin() + static_cast<std::ptrdiff_t>(end));
      const StepReport sr = train_step(ctx, ds, batch);
      er.train_loss += sr.loss_orig;
      er.aug_loss += sr.loss_aug;
      er.train_acc += sr.train_hits;
      ++num_batches;
    }
    er.train_loss /= static_cast<double>(num_batches);
    er.aug_loss /= static_cast<double>(num_batches);
    er.train_acc /= static_cast<double>(num_batches);

    const EvalResult val = evaluate(ctx.model, ds, val_idx);
    er.val_loss = val.mean_loss;
    er.val_acc = val.accuracy;
    er.lr = ctx.model_opt.lr;
    rm.epochs.push_back(er);

    if (val.accuracy > best_val_acc) {
      best_val_acc = val.accuracy;
      best_model = ctx.model;
      if (ctx.has_psi) best_psi = ctx.psi;
      val_improve_iter = ctx.iteration;
      rm.best_epoch = epoch;
    }
    if (val.mean_loss < best_val_loss) {
      best_val_loss = val.mean_loss;
      loss_improve_iter = ctx.iteration;
    } else if (ctx.iteration - loss_improve_iter >= cfg.lr_decay_patience) {
      ctx.model_opt.lr *= cfg.lr_decay_factor;
      ctx.psi_opt.lr *= cfg.lr_decay_factor;
      loss_improve_iter = ctx.iteration;
    }
    if (ctx.iteration - val_improve_iter >= cfg.early_stop_patience) {
      rm.early_stopped = true;
      break;
    }
  }

  rm.iterations = ctx.iteration;
  rm.best_val_accuracy = best_val_acc;
  const EvalResult test = evaluate(best_model, ds, test_idx);
  rm.test_accuracy = test.accuracy;
  rm.test_auroc = test.auroc;
  rm.test_ece = test.ece;
  rm.test_loss = test.mean_loss;
  if (!checkpoint_prefix.empty()) {
    save_model(best_model, checkpoint_prefix + "_model.json");
    if (ctx.has_psi) save_edge_predictor(best_psi, checkpoint_prefix + "_ep.json");
  }
  rm.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rm;
}

}  // namespace graphmix
