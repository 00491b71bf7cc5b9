#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphmix/baselines.hpp"
#include "graphmix/dataset.hpp"
#include "graphmix/edge_predictor.hpp"
#include "graphmix/model.hpp"
#include "graphmix/transplant.hpp"

namespace graphmix {

enum class AugmentMode {
  None,
  TransplantDp,
  TransplantEp,
  DropN,
  PermE,
  MaskN,
  SubG,
  ManifoldMixup
};

std::string augment_mode_name(AugmentMode m);
AugmentMode augment_mode_from_name(const std::string& name);

struct AblationFlags {
  bool size_based_label = false;
  bool scattered_nodes = false;
  bool random_subgraph = false;
  bool no_cross_edges = false;
};

struct TrainConfig {
  Arch arch = Arch::Gcs;
  Readout readout = Readout::Mean;
  int num_layers = 3;
  int hidden_dim = 128;
  AugmentMode augment = AugmentMode::None;
  AblationFlags ablation;
  MixConfig mix;
  double baseline_ratio = 0.2;   // DropN / PermE / MaskN
  double subg_keep_ratio = 0.8;  // SubG
  double mixup_alpha = 2.0;      // ManifoldMixup
  double lr = 5e-4;
  int batch_size = 128;
  int max_epochs = 1000;
  long early_stop_patience = 1500;  // iterations without val accuracy improvement
  long lr_decay_patience = 1000;    // iterations without val loss improvement
  double lr_decay_factor = 0.5;
  std::uint64_t seed = 0;
  int ep_pair_cap = 32;
  double st_tau = 1.0;
  std::string dump_mixed_dir;  // empty: no mixed-graph dumps
  int dump_mixed_limit = 20;

  void validate() const;
};

struct EpochRecord {
  double train_loss = 0.0;  // supervised term, batch-mean
  double aug_loss = 0.0;    // augmented term, batch-mean (0 when augment=none)
  double train_acc = 0.0;   // argmax rate of the train-mode forward passes
  double val_loss = 0.0;
  double val_acc = 0.0;
  double lr = 0.0;
};

struct RunMetrics {
  std::vector<EpochRecord> epochs;
  double test_accuracy = 0.0;
  double test_auroc = 0.0;
  double test_ece = 0.0;
  double test_loss = 0.0;
  double best_val_accuracy = 0.0;
  int best_epoch = 0;
  long iterations = 0;
  bool early_stopped = false;
  double wall_seconds = 0.0;
};

struct EvalResult {
  double accuracy = 0.0;
  double auroc = 0.0;
  double ece = 0.0;
  double mean_loss = 0.0;
};

// Eval-mode metrics over the listed graphs. Throws on an empty list.
EvalResult evaluate(const ModelParams& model, const Dataset& ds, const std::vector<int>& indices);

struct StepReport {
  double loss_orig = 0.0;
  double loss_aug = 0.0;
  double train_hits = 0.0;  // correct argmax count over the originals
  int transplants_done = 0;
  int transplants_skipped = 0;
};

// Mutable training state threaded through train_step calls.
struct TrainContext {
  TrainConfig cfg;
  ModelParams model;
  EdgePredictor psi;
  bool has_psi = false;
  AdamState model_opt;
  AdamState psi_opt;
  Rng rng{0};
  long iteration = 0;
  int dumped_mixed = 0;
};

TrainContext make_train_context(const TrainConfig& cfg, const Dataset& ds);

// One optimization step on a batch: supervised forward/backward on the
// originals (also yielding node saliencies), the configured augmentation
// pass, and a single Adam update with the summed gradients. In EP mode the
// edge predictor gets its supervised update before the transplants and an
// update from the augmented loss after them.
StepReport train_step(TrainContext& ctx, const Dataset& ds, const std::vector<int>& batch);

// Full fold: standardizes features on train+val stats, trains with early
// stopping on validation accuracy and LR decay on validation loss (both
// patience counters in iterations), restores the best-validation-accuracy
// checkpoint and reports test metrics from it. Optionally writes the best
// model (and edge predictor) to `checkpoint_prefix`.
RunMetrics run_fold(const Dataset& raw, const SplitSpec& split, const TrainConfig& cfg,
                    const std::string& checkpoint_prefix = "");

}  // namespace graphmix
