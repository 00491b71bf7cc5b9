#include "graphmix/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "graphmix/rng.hpp"

namespace graphmix {

namespace {

std::vector<std::string> read_lines(const std::string& path, bool required) {
  std::ifstream in(path);
  if (!in) {
    if (required) {
      throw std::runtime_error("cannot open " + path);
    }
    return {};
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<double> parse_reals(const std::string& line, const std::string& where) {
  std::vector<double> out;
  std::string token;
  std::stringstream ss(line);
  while (std::getline(ss, token, ',')) {
    try {
      out.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw std::runtime_error(where + ": cannot parse '" + token + "'");
    }
  }
  return out;
}

std::pair<long, long> parse_int_pair(const std::string& line, const std::string& where) {
  auto vals = parse_reals(line, where);
  if (vals.size() != 2) {
    throw std::runtime_error(where + ": expected two comma-separated integers, got '" + line + "'");
  }
  return {static_cast<long>(vals[0]), static_cast<long>(vals[1])};
}

}  // namespace

std::vector<int> SplitSpec::indices(Part p) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == p) out.push_back(static_cast<int>(i));
  }
  return out;
}

Dataset load_tu_dataset(const std::string& dir, const std::string& name) {
  const std::string prefix = dir + "/" + name + "_";
  const auto indicator_lines = read_lines(prefix + "graph_indicator.txt", true);
  const auto label_lines = read_lines(prefix + "graph_labels.txt", true);
  const auto edge_lines = read_lines(prefix + "A.txt", true);
  const auto node_label_lines = read_lines(prefix + "node_labels.txt", false);
  const auto node_attr_lines = read_lines(prefix + "node_attributes.txt", false);

  const long num_nodes_total = static_cast<long>(indicator_lines.size());
  const long num_graphs = static_cast<long>(label_lines.size());
  if (num_graphs == 0) {
    throw std::runtime_error(name + ": no graphs in label file");
  }

  // node -> graph (both 0-based after this block)
  std::vector<long> node_graph(static_cast<std::size_t>(num_nodes_total));
  for (long i = 0; i < num_nodes_total; ++i) {
    const long gid = std::lround(std::stod(indicator_lines[static_cast<std::size_t>(i)]));
    if (gid < 1 || gid > num_graphs) {
      throw std::runtime_error(name + ": graph indicator " + std::to_string(gid) +
                               " outside [1," + std::to_string(num_graphs) + "]");
    }
    node_graph[static_cast<std::size_t>(i)] = gid - 1;
  }

  std::vector<std::vector<long>> graph_nodes(static_cast<std::size_t>(num_graphs));
  for (long i = 0; i < num_nodes_total; ++i) {
    graph_nodes[static_cast<std::size_t>(node_graph[static_cast<std::size_t>(i)])].push_back(i);
  }
  std::vector<long> local_id(static_cast<std::size_t>(num_nodes_total));
  for (const auto& nodes : graph_nodes) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      local_id[static_cast<std::size_t>(nodes[j])] = static_cast<long>(j);
    }
  }
  for (long g = 0; g < num_graphs; ++g) {
    if (graph_nodes[static_cast<std::size_t>(g)].empty()) {
      throw std::runtime_error(name + ": graph " + std::to_string(g + 1) + " has no nodes");
    }
  }

  // undirected edge sets per graph
  std::vector<std::set<std::pair<long, long>>> graph_edges(static_cast<std::size_t>(num_graphs));
  for (const auto& line : edge_lines) {
    auto [a, b] = parse_int_pair(line, name + "_A.txt");
    if (a < 1 || a > num_nodes_total || b < 1 || b > num_nodes_total) {
      throw std::runtime_error(name + ": edge endpoint " + line + " out of node range");
    }
    if (a == b) continue;  // self-loops are not stored
    const long ga = node_graph[static_cast<std::size_t>(a - 1)];
    const long gb = node_graph[static_cast<std::size_t>(b - 1)];
    if (ga != gb) {
      throw std::runtime_error(name + ": edge (" + std::to_string(a) + "," + std::to_string(b) +
                               ") crosses graph boundary");
    }
    const long u = local_id[static_cast<std::size_t>(a - 1)];
    const long v = local_id[static_cast<std::size_t>(b - 1)];
    graph_edges[static_cast<std::size_t>(ga)].insert({std::min(u, v), std::max(u, v)});
  }

  // remap labels to contiguous 0-based classes
  std::vector<long> raw_labels(static_cast<std::size_t>(num_graphs));
  std::set<long> distinct_labels;
  for (long g = 0; g < num_graphs; ++g) {
    raw_labels[static_cast<std::size_t>(g)] =
        std::lround(std::stod(label_lines[static_cast<std::size_t>(g)]));
    distinct_labels.insert(raw_labels[static_cast<std::size_t>(g)]);
  }
  std::map<long, int> label_map;
  int next_class = 0;
  for (long l : distinct_labels) label_map[l] = next_class++;

  // features: one-hot node labels first, then continuous attributes
  int onehot_dim = 0;
  std::map<long, int> node_label_map;
  std::vector<long> node_labels;
  if (!node_label_lines.empty()) {
    if (static_cast<long>(node_label_lines.size()) != num_nodes_total) {
      throw std::runtime_error(name + ": node label count != node count");
    }
    std::set<long> distinct;
    node_labels.reserve(node_label_lines.size());
    for (const auto& line : node_label_lines) {
      node_labels.push_back(std::lround(std::stod(line)));
      distinct.insert(node_labels.back());
    }
    for (long l : distinct) node_label_map[l] = onehot_dim++;
  }
  int attr_dim = 0;
  std::vector<std::vector<double>> node_attrs;
  if (!node_attr_lines.empty()) {
    if (static_cast<long>(node_attr_lines.size()) != num_nodes_total) {
      throw std::runtime_error(name + ": node attribute count != node count");
    }
    node_attrs.reserve(node_attr_lines.size());
    for (const auto& line : node_attr_lines) {
      node_attrs.push_back(parse_reals(line, name + "_node_attributes.txt"));
      if (node_attrs.back().size() != node_attrs.front().size()) {
        throw std::runtime_error(name + ": ragged node attribute rows");
      }
    }
    attr_dim = static_cast<int>(node_attrs.front().size());
  }
  const int feat_dim = onehot_dim + attr_dim;

  Dataset ds;
  ds.name = name;
  ds.num_classes = next_class;
  ds.feature_dim = feat_dim;
  ds.num_onehot_dims = onehot_dim;
  ds.graphs.reserve(static_cast<std::size_t>(num_graphs));
  for (long g = 0; g < num_graphs; ++g) {
    const auto& nodes = graph_nodes[static_cast<std::size_t>(g)];
    const int n = static_cast<int>(nodes.size());
    Matrix features(n, feat_dim);
    for (int i = 0; i < n; ++i) {
      const long global = nodes[static_cast<std::size_t>(i)];
      if (onehot_dim > 0) {
        features(i, node_label_map.at(node_labels[static_cast<std::size_t>(global)])) = 1.0;
      }
      for (int a = 0; a < attr_dim; ++a) {
        features(i, onehot_dim + a) = node_attrs[static_cast<std::size_t>(global)][static_cast<std::size_t>(a)];
      }
    }
    std::vector<Edge> edges;
    edges.reserve(graph_edges[static_cast<std::size_t>(g)].size());
    for (const auto& [u, v] : graph_edges[static_cast<std::size_t>(g)]) {
      edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), 1.0});
    }
    ds.graphs.emplace_back(n, std::move(edges), std::move(features),
                           label_map.at(raw_labels[static_cast<std::size_t>(g)]));
  }
  return ds;
}

void save_tu_dataset(const Dataset& ds, const std::string& dir) {
  const std::string prefix = dir + "/" + ds.name + "_";
  std::ofstream a(prefix + "A.txt");
  std::ofstream ind(prefix + "graph_indicator.txt");
  std::ofstream lab(prefix + "graph_labels.txt");
  std::ofstream attr(prefix + "node_attributes.txt");
  if (!a || !ind || !lab || !attr) {
    throw std::runtime_error("cannot write TU files under " + dir);
  }
  long base = 1;
  long gid = 1;
  for (const auto& g : ds.graphs) {
    for (int v = 0; v < g.num_nodes(); ++v) {
      ind << gid << "\n";
      const double* row = g.features().row(v);
      for (int d = 0; d < g.feature_dim(); ++d) {
        attr << (d ? "," : "") << row[d];
      }
      attr << "\n";
    }
    for (const Edge& e : g.edges()) {
      a << (base + e.u) << ", " << (base + e.v) << "\n";
      a << (base + e.v) << ", " << (base + e.u) << "\n";
    }
    lab << g.label() << "\n";
    base += g.num_nodes();
    ++gid;
  }
}

Dataset attach_degree_features(const Dataset& ds) {
  Dataset out;
  out.name = ds.name;
  out.num_classes = ds.num_classes;
  out.feature_dim = 1;
  out.num_onehot_dims = 0;
  out.graphs.reserve(ds.graphs.size());
  for (const auto& g : ds.graphs) {
    Matrix features(g.num_nodes(), 1);
    for (int v = 0; v < g.num_nodes(); ++v) {
      features(v, 0) = degree(g, v);
    }
    out.graphs.emplace_back(g.num_nodes(), g.edges(), std::move(features), g.label());
  }
  return out;
}

FeatureStats compute_feature_stats(const Dataset& ds, const std::vector<int>& graph_indices) {
  const int d = ds.feature_dim;
  FeatureStats stats;
  stats.mean.assign(static_cast<std::size_t>(d), 0.0);
  stats.stddev.assign(static_cast<std::size_t>(d), 0.0);
  long count = 0;
  for (int gi : graph_indices) {
    const auto& g = ds.graphs[static_cast<std::size_t>(gi)];
    for (int v = 0; v < g.num_nodes(); ++v) {
      const double* row = g.features().row(v);
      for (int j = 0; j < d; ++j) stats.mean[static_cast<std::size_t>(j)] += row[j];
      ++count;
    }
  }
  if (count == 0) return stats;
  for (double& m : stats.mean) m /= static_cast<double>(count);
  for (int gi : graph_indices) {
    const auto& g = ds.graphs[static_cast<std::size_t>(gi)];
    for (int v = 0; v < g.num_nodes(); ++v) {
      const double* row = g.features().row(v);
      for (int j = 0; j < d; ++j) {
        const double diff = row[j] - stats.mean[static_cast<std::size_t>(j)];
        stats.stddev[static_cast<std::size_t>(j)] += diff * diff;
      }
    }
  }
  for (double& s : stats.stddev) s = std::sqrt(s / static_cast<double>(count));
  return stats;
}

Dataset standardize(const Dataset& ds, const FeatureStats& stats) {
  Dataset out;
  out.name = ds.name;
  out.num_classes = ds.num_classes;
  out.feature_dim = ds.feature_dim;
  out.num_onehot_dims = ds.num_onehot_dims;
  out.graphs.reserve(ds.graphs.size());
  for (const auto& g : ds.graphs) {
    Matrix features = g.features();
    for (int v = 0; v < g.num_nodes(); ++v) {
      double* row = features.row(v);
      for (int j = ds.num_onehot_dims; j < ds.feature_dim; ++j) {
        const double s = stats.stddev[static_cast<std::size_t>(j)];
        row[j] = s > 0.0 ? (row[j] - stats.mean[static_cast<std::size_t>(j)]) / s
                         : row[j] - stats.mean[static_cast<std::size_t>(j)];
      }
    }
    out.graphs.emplace_back(g.num_nodes(), g.edges(), std::move(features), g.label());
  }
  return out;
}

std::vector<SplitSpec> stratified_kfold(const Dataset& ds, int k, std::uint64_t seed) {
  if (k < 2) {
    throw std::invalid_argument("stratified_kfold: k must be at least 2");
  }
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.num_classes));
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.graphs[i].label())].push_back(static_cast<int>(i));
  }
  for (int c = 0; c < ds.num_classes; ++c) {
    if (static_cast<int>(by_class[static_cast<std::size_t>(c)].size()) < k) {
      throw std::invalid_argument("stratified_kfold: class " + std::to_string(c) + " has only " +
                                  std::to_string(by_class[static_cast<std::size_t>(c)].size()) +
                                  " members, need at least " + std::to_string(k));
    }
  }
  Rng rng(seed);
  std::vector<int> fold_of(ds.graphs.size());
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (std::size_t j = 0; j < members.size(); ++j) {
      fold_of[static_cast<std::size_t>(members[j])] = static_cast<int>(j % static_cast<std::size_t>(k));
    }
  }
  std::vector<SplitSpec> splits(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    SplitSpec& spec = splits[static_cast<std::size_t>(f)];
    spec.seed = seed;
    spec.assignment.resize(ds.graphs.size());
    if (k == 2) {
      // with two folds "val = next fold" would leave no training data; carve
      // a stratified third of the complement fold as validation instead
      for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
        spec.assignment[i] = fold_of[i] == f ? Part::Test : Part::Train;
      }
      for (const auto& members : by_class) {
        int j = 0;
        for (int gi : members) {
          if (fold_of[static_cast<std::size_t>(gi)] == f) continue;
          if (j % 3 == 1) spec.assignment[static_cast<std::size_t>(gi)] = Part::Val;
          ++j;
        }
      }
      continue;
    }
    const int val_fold = (f + 1) % k;
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
      if (fold_of[i] == f) {
        spec.assignment[i] = Part::Test;
      } else if (fold_of[i] == val_fold) {
        spec.assignment[i] = Part::Val;
      } else {
        spec.assignment[i] = Part::Train;
      }
    }
  }
  return splits;
}

Dataset synth_motif_dataset(int n_graphs, std::uint64_t seed) {
  if (n_graphs <= 0 || n_graphs % 2 != 0) {
    throw std::invalid_argument("synth_motif_dataset: n_graphs must be positive and even");
  }
  Rng rng(seed);
  Dataset ds;
  ds.name = "motif";
  ds.num_classes = 2;
  ds.feature_dim = 1;
  ds.num_onehot_dims = 0;
  ds.graphs.reserve(static_cast<std::size_t>(n_graphs));
  for (int i = 0; i < n_graphs; ++i) {
    const int label = i % 2;  // alternating keeps every prefix balanced
    const int tree_n = 10 + rng.index(11);
    std::vector<Edge> edges;
    for (NodeId v = 1; v < tree_n; ++v) {
      edges.push_back({static_cast<NodeId>(rng.index(static_cast<std::size_t>(v))), v, 1.0});
    }
    const NodeId attach = static_cast<NodeId>(rng.index(static_cast<std::size_t>(tree_n)));
    int n = tree_n;
    if (label == 1) {
      // triangle on three fresh nodes
      const NodeId t = static_cast<NodeId>(tree_n);
      edges.push_back({t, t + 1, 1.0});
      edges.push_back({t, t + 2, 1.0});
      edges.push_back({t + 1, t + 2, 1.0});
      edges.push_back({attach, t, 1.0});
      n = tree_n + 3;
    } else {
      // star: one center, four leaves
      const NodeId c = static_cast<NodeId>(tree_n);
      for (int leaf = 1; leaf <= 4; ++leaf) {
        edges.push_back({c, c + leaf, 1.0});
      }
      edges.push_back({attach, c, 1.0});
      n = tree_n + 5;
    }
    std::vector<double> deg(static_cast<std::size_t>(n), 0.0);
    for (const Edge& e : edges) {
      deg[static_cast<std::size_t>(e.u)] += 1.0;
      deg[static_cast<std::size_t>(e.v)] += 1.0;
    }
    Matrix features(n, 1, std::move(deg));
    ds.graphs.emplace_back(n, std::move(edges), std::move(features), label);
  }
  return ds;
}

}  // namespace graphmix
