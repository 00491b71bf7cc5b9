#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "graphmix/matrix.hpp"

namespace graphmix {

// Per-node saliency: s_v = l2 norm of the loss gradient row for node v at the
// last GNN layer output.
using SaliencyVector = std::vector<double>;

inline SaliencyVector node_saliency(const Matrix& grad_last_features) {
  SaliencyVector s(static_cast<std::size_t>(grad_last_features.rows));
  for (int v = 0; v < grad_last_features.rows; ++v) {
    double sq = 0.0;
    const double* row = grad_last_features.row(v);
    for (int j = 0; j < grad_last_features.cols; ++j) {
      sq += row[j] * row[j];
    }
    s[static_cast<std::size_t>(v)] = std::sqrt(sq);
  }
  return s;
}

inline double saliency_l1(const SaliencyVector& s) {
  double sum = 0.0;
  for (double v : s) sum += v;
  return sum;
}

// Debug dump: "node_id<TAB>saliency" per line.
inline std::string format_saliency(const SaliencyVector& s) {
  std::ostringstream out;
  for (std::size_t v = 0; v < s.size(); ++v) {
    out << v << "\t" << s[v] << "\n";
  }
  return out.str();
}

}  // namespace graphmix
