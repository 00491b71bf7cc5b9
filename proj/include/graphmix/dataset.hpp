#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphmix/graph.hpp"

namespace graphmix {

// A graph-classification dataset. `num_onehot_dims` counts the leading
// feature columns that are one-hot encodings of categorical node labels;
// only the remaining continuous columns are standardized.
struct Dataset {
  std::string name;
  std::vector<GraphInstance> graphs;
  int num_classes = 0;
  int feature_dim = 0;
  int num_onehot_dims = 0;

  std::size_t size() const { return graphs.size(); }
};

enum class Part { Train, Val, Test };

// Per-graph train/val/test assignment for one fold.
struct SplitSpec {
  std::vector<Part> assignment;
  std::uint64_t seed = 0;

  std::vector<int> indices(Part p) const;
};

// Per-dimension mean and (population) standard deviation over node rows.
struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

// Reads the TU text layout from `dir`: {name}_A.txt, {name}_graph_indicator.txt,
// {name}_graph_labels.txt, plus optional {name}_node_labels.txt (one-hot
// encoded) and {name}_node_attributes.txt (continuous, appended after the
// one-hot block). Edges are deduplicated to undirected form and graph labels
// are remapped to contiguous 0-based classes.
Dataset load_tu_dataset(const std::string& dir, const std::string& name);

// Writes the dataset back in TU layout (features emitted as node attributes).
void save_tu_dataset(const Dataset& ds, const std::string& dir);

// Replaces node features with a single column holding each node's degree.
Dataset attach_degree_features(const Dataset& ds);

// Stats over the node rows of the listed graphs (typically train+val).
FeatureStats compute_feature_stats(const Dataset& ds, const std::vector<int>& graph_indices);

// x <- (x - mean) / std per continuous dimension; dimensions with zero std
// are shifted by -mean only. One-hot columns are left untouched.
Dataset standardize(const Dataset& ds, const FeatureStats& stats);

// k stratified folds; fold i uses fold i as test, fold (i+1) mod k as
// validation and the rest as train (3:1:1 for k=5). Throws if any class has
// fewer than k members.
std::vector<SplitSpec> stratified_kfold(const Dataset& ds, int k, std::uint64_t seed);

// Balanced binary dataset of random trees (10-20 nodes) with either a planted
// triangle (class 1) or a planted 4-leaf star (class 0) attached at a random
// node. Features are node degrees.
Dataset synth_motif_dataset(int n_graphs, std::uint64_t seed);

}  // namespace graphmix
