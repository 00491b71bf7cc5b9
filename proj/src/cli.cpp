#include "graphmix/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphmix/dataset.hpp"
#include "graphmix/saliency.hpp"
#include "graphmix/trainer.hpp"

namespace graphmix {

namespace {

std::vector<int> parse_khops(const std::string& spec) {
  std::vector<int> out;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    out.push_back(std::stoi(token));
  }
  return out;
}

AblationFlags parse_ablation(const std::string& spec) {
  AblationFlags flags;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    if (token == "size-based-label") {
      flags.size_based_label = true;
    } else if (token == "scattered-nodes") {
      flags.scattered_nodes = true;
    } else if (token == "random-subgraph") {
      flags.random_subgraph = true;
    } else if (token == "no-cross-edges") {
      flags.no_cross_edges = true;
    } else {
      throw CLI::ValidationError("--ablation", "unknown ablation flag: " + token);
    }
  }
  return flags;
}

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
};

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  for (double v : values) s.stddev += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(s.stddev / static_cast<double>(values.size()));
  return s;
}

nlohmann::json config_to_json(const TrainConfig& cfg, const std::string& dataset_name) {
  nlohmann::json j;
  j["dataset"] = dataset_name;
  j["arch"] = cfg.arch == Arch::Gcn ? "gcn" : "gcs";
  j["readout"] =
      cfg.readout == Readout::Mean ? "mean" : (cfg.readout == Readout::Sum ? "sum" : "max");
  j["layers"] = cfg.num_layers;
  j["hidden"] = cfg.hidden_dim;
  j["augment"] = augment_mode_name(cfg.augment);
  j["anchor_percent"] = cfg.mix.anchor_percent;
  j["khops"] = cfg.mix.khop_space;
  j["alpha"] = cfg.mix.alpha;
  j["baseline_ratio"] = cfg.baseline_ratio;
  j["subg_keep_ratio"] = cfg.subg_keep_ratio;
  j["lr"] = cfg.lr;
  j["batch"] = cfg.batch_size;
  j["max_epochs"] = cfg.max_epochs;
  j["early_stop_patience"] = cfg.early_stop_patience;
  j["lr_decay_patience"] = cfg.lr_decay_patience;
  j["seed"] = cfg.seed;
  nlohmann::json ab = nlohmann::json::array();
  if (cfg.ablation.size_based_label) ab.push_back("size-based-label");
  if (cfg.ablation.scattered_nodes) ab.push_back("scattered-nodes");
  if (cfg.ablation.random_subgraph) ab.push_back("random-subgraph");
  if (cfg.ablation.no_cross_edges) ab.push_back("no-cross-edges");
  j["ablation"] = ab;
  return j;
}

void dump_saliency_file(const Dataset& raw, const SplitSpec& split, const ModelParams& model,
                        const std::string& path) {
  std::vector<int> stats_idx = split.indices(Part::Train);
  const auto val_idx = split.indices(Part::Val);
  stats_idx.insert(stats_idx.end(), val_idx.begin(), val_idx.end());
  const Dataset ds = standardize(raw, compute_feature_stats(raw, stats_idx));
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write saliency dump " + path);
  }
  for (int gi : split.indices(Part::Train)) {
    const GraphInstance& g = ds.graphs[static_cast<std::size_t>(gi)];
    auto [logits, tape] = forward(model, g, Mode::Eval, nullptr);
    std::vector<double> target(static_cast<std::size_t>(ds.num_classes), 0.0);
    target[static_cast<std::size_t>(g.label())] = 1.0;
    const auto back = backward(model, tape, target);
    out << "graph " << gi << " label " << g.label() << "\n";
    out << format_saliency(node_saliency(back.grad_last_features));
  }
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"graph classification with subgraph-transplant data augmentation"};

  std::string data_dir, data_name, synthetic, out_file, readout_name = "mean";
  std::string arch_name = "gcs", augment_name = "none", khops_spec = "1,2,3", ablation_spec;
  std::string dump_mixed_dir, dump_saliency_path, save_model_prefix;
  int layers = 3, hidden = 128, folds = 5, repeats = 1, batch = 128, max_epochs = 1000;
  int synthetic_n = 400, only_fold = -1;
  double anchor_percent = 10.0, alpha = 2.0, lr = 5e-4, ratio = 0.2, subg_ratio = 0.8;
  long es_patience = 1500, lr_patience = 1000;
  std::uint64_t seed = 0;

  app.add_option("--data", data_dir, "directory holding a TU-format dataset");
  app.add_option("--name", data_name, "dataset name (file prefix inside --data)");
  app.add_option("--synthetic", synthetic, "synthetic dataset (supported: motif)");
  app.add_option("--synthetic-n", synthetic_n, "synthetic dataset size")->check(CLI::PositiveNumber);
  app.add_option("--arch", arch_name, "gnn architecture: gcn | gcs");
  app.add_option("--layers", layers, "number of gnn layers")->check(CLI::Range(1, 16));
  app.add_option("--hidden", hidden, "hidden width")->check(CLI::PositiveNumber);
  app.add_option("--readout", readout_name, "readout: mean | sum | max");
  app.add_option("--augment", augment_name,
                 "none | transplant-dp | transplant-ep | dropn | perme | maskn | subg | "
                 "manifold-mixup");
  app.add_option("--R", anchor_percent, "anchor node percentage");
  app.add_option("--khops", khops_spec, "comma-separated K-hop space, e.g. 1,2,3");
  app.add_option("--alpha", alpha, "Beta shape for the frontier ratio / mixup");
  app.add_option("--ratio", ratio, "baseline drop/perturb/mask ratio");
  app.add_option("--subg-ratio", subg_ratio, "SubG keep ratio");
  app.add_option("--ablation", ablation_spec,
                 "comma list: size-based-label,scattered-nodes,random-subgraph,no-cross-edges");
  app.add_option("--lr", lr, "initial learning rate");
  app.add_option("--batch", batch, "batch size")->check(CLI::PositiveNumber);
  app.add_option("--epochs", max_epochs, "max training epochs")->check(CLI::PositiveNumber);
  app.add_option("--patience", es_patience, "early-stop patience in iterations");
  app.add_option("--lr-patience", lr_patience, "lr-decay patience in iterations");
  app.add_option("--seed", seed, "base random seed");
  app.add_option("--folds", folds, "number of cross-validation folds")->check(CLI::Range(2, 100));
  app.add_option("--repeats", repeats, "number of CV repetitions")->check(CLI::PositiveNumber);
  app.add_option("--fold", only_fold, "run a single fold index (-1 = all)");
  app.add_option("--out", out_file, "results file (one JSON record per fold-repeat)");
  app.add_option("--dump-mixed", dump_mixed_dir, "directory for mixed-graph debug dumps");
  app.add_option("--dump-saliency", dump_saliency_path, "saliency dump file (first fold-repeat)");
  app.add_option("--save-model", save_model_prefix, "checkpoint prefix per fold-repeat");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    Dataset ds;
    if (!synthetic.empty()) {
      if (synthetic != "motif") {
        throw std::runtime_error("unsupported synthetic dataset: " + synthetic);
      }
      if (!data_dir.empty() || !data_name.empty()) {
        throw std::runtime_error("--synthetic cannot be combined with --data/--name");
      }
      ds = synth_motif_dataset(synthetic_n, seed);
    } else {
      if (data_dir.empty() || data_name.empty()) {
        throw std::runtime_error("either --synthetic or both --data and --name are required");
      }
      ds = load_tu_dataset(data_dir, data_name);
      if (ds.feature_dim == 0) {
        ds = attach_degree_features(ds);  // featureless datasets use degrees
      }
    }

    TrainConfig cfg;
    cfg.arch = arch_name == "gcn" ? Arch::Gcn
               : arch_name == "gcs"
                   ? Arch::Gcs
                   : throw std::runtime_error("unknown arch: " + arch_name);
    cfg.readout = readout_name == "mean"  ? Readout::Mean
                  : readout_name == "sum" ? Readout::Sum
                  : readout_name == "max"
                      ? Readout::Max
                      : throw std::runtime_error("unknown readout: " + readout_name);
    cfg.num_layers = layers;
    cfg.hidden_dim = hidden;
    cfg.augment = augment_mode_from_name(augment_name);
    cfg.ablation = parse_ablation(ablation_spec);
    cfg.mix.anchor_percent = anchor_percent;
    cfg.mix.khop_space = parse_khops(khops_spec);
    cfg.mix.alpha = alpha;
    cfg.mix.connector =
        cfg.augment == AugmentMode::TransplantEp ? Connector::Ep : Connector::Dp;
    cfg.baseline_ratio = ratio;
    cfg.subg_keep_ratio = subg_ratio;
    cfg.mixup_alpha = alpha;
    cfg.lr = lr;
    cfg.batch_size = batch;
    cfg.max_epochs = max_epochs;
    cfg.early_stop_patience = es_patience;
    cfg.lr_decay_patience = lr_patience;
    cfg.dump_mixed_dir = dump_mixed_dir;
    cfg.validate();

    std::ofstream out;
    if (!out_file.empty()) {
      out.open(out_file);
      if (!out) {
        throw std::runtime_error("cannot write results file " + out_file);
      }
    }

    std::vector<double> accs, aurocs, eces;
    std::cout << "dataset=" << ds.name << " graphs=" << ds.size() << " classes=" << ds.num_classes
              << " feature_dim=" << ds.feature_dim << " arch=" << arch_name
              << " layers=" << layers << " augment=" << augment_mode_name(cfg.augment)
              << " R=" << cfg.mix.anchor_percent << " khops=" << khops_spec
              << " alpha=" << cfg.mix.alpha << " folds=" << folds << " repeats=" << repeats
              << " seed=" << seed << "\n";

    for (int rep = 0; rep < repeats; ++rep) {
      const auto splits = stratified_kfold(ds, folds, seed + static_cast<std::uint64_t>(rep));
      for (int f = 0; f < folds; ++f) {
        if (only_fold >= 0 && f != only_fold) continue;
        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = seed + 1000ULL * static_cast<std::uint64_t>(rep) +
                        static_cast<std::uint64_t>(f);
        std::string ckpt;
        if (!save_model_prefix.empty()) {
          ckpt = save_model_prefix + "_r" + std::to_string(rep) + "_f" + std::to_string(f);
        } else if (!dump_saliency_path.empty() && rep == 0 &&
                   (only_fold < 0 ? f == 0 : f == only_fold)) {
          ckpt = dump_saliency_path + ".ckpt";
        }
        const RunMetrics rm = run_fold(ds, splits[static_cast<std::size_t>(f)], fold_cfg, ckpt);
        accs.push_back(rm.test_accuracy);
        aurocs.push_back(rm.test_auroc);
        eces.push_back(rm.test_ece);

        std::cout << "repeat " << rep << " fold " << f << ": test_acc=" << rm.test_accuracy
                  << " auroc=" << rm.test_auroc << " ece=" << rm.test_ece
                  << " best_val=" << rm.best_val_accuracy << " best_epoch=" << rm.best_epoch
                  << " epochs=" << rm.epochs.size() << (rm.early_stopped ? " (early stop)" : "")
                  << " [" << rm.wall_seconds << "s]\n";

        if (out.is_open()) {
          nlohmann::json rec;
          rec["config"] = config_to_json(fold_cfg, ds.name);
          rec["repeat"] = rep;
          rec["fold"] = f;
          rec["test_accuracy"] = rm.test_accuracy;
          rec["test_auroc"] = rm.test_auroc;
          rec["test_ece"] = rm.test_ece;
          rec["test_loss"] = rm.test_loss;
          rec["best_val_accuracy"] = rm.best_val_accuracy;
          rec["best_epoch"] = rm.best_epoch;
          rec["iterations"] = rm.iterations;
          rec["early_stopped"] = rm.early_stopped;
          nlohmann::json curve = nlohmann::json::array();
          for (const EpochRecord& er : rm.epochs) {
            curve.push_back({{"train_loss", er.train_loss},
                             {"aug_loss", er.aug_loss},
                             {"train_acc", er.train_acc},
                             {"val_loss", er.val_loss},
                             {"val_acc", er.val_acc},
                             {"lr", er.lr}});
          }
          rec["epochs"] = std::move(curve);
          out << rec.dump() << "\n";
        }

        if (!dump_saliency_path.empty() && rep == 0 &&
            (only_fold < 0 ? f == 0 : f == only_fold)) {
          const ModelParams best = load_model((save_model_prefix.empty()
                                                   ? dump_saliency_path + ".ckpt"
                                                   : save_model_prefix + "_r0_f" +
                                                         std::to_string(f)) +
                                              "_model.json");
          dump_saliency_file(ds, splits[static_cast<std::size_t>(f)], best, dump_saliency_path);
        }
      }
    }

    const Summary acc = summarize(accs);
    const Summary auc = summarize(aurocs);
    const Summary ece = summarize(eces);
    std::cout << "summary (" << accs.size() << " runs): test_acc " << acc.mean << " +- "
              << acc.stddev << " | auroc " << auc.mean << " +- " << auc.stddev << " | ece "
              << ece.mean << " +- " << ece.stddev << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace graphmix
