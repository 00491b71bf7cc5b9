#include "graphmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace graphmix {

namespace {

int argmax_lowest(const std::vector<double>& v) {
  int best = 0;
  for (int j = 1; j < static_cast<int>(v.size()); ++j) {
    if (v[static_cast<std::size_t>(j)] > v[static_cast<std::size_t>(best)]) best = j;
  }
  return best;
}

// one-vs-rest AUROC for the given positive class, -1 when degenerate
double ovr_auroc(const std::vector<int>& labels, const std::vector<std::vector<double>>& probs,
                 int positive_class) {
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double score = probs[i][static_cast<std::size_t>(positive_class)];
    (labels[i] == positive_class ? pos : neg).push_back(score);
  }
  if (pos.empty() || neg.empty()) return -1.0;
  double wins = 0.0;
  for (double p : pos) {
    for (double q : neg) {
      if (p > q) {
        wins += 1.0;
      } else if (p == q) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

}  // namespace

double accuracy_metric(const std::vector<int>& labels,
                       const std::vector<std::vector<double>>& probs) {
  if (labels.empty() || labels.size() != probs.size()) {
    throw std::invalid_argument("accuracy_metric: empty or mismatched inputs");
  }
  int correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (argmax_lowest(probs[i]) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double auroc_metric(const std::vector<int>& labels, const std::vector<std::vector<double>>& probs,
                    int num_classes) {
  if (labels.empty() || labels.size() != probs.size()) {
    throw std::invalid_argument("auroc_metric: empty or mismatched inputs");
  }
  if (num_classes == 2) {
    const double a = ovr_auroc(labels, probs, 1);
    return a < 0.0 ? 0.5 : a;
  }
  double sum = 0.0;
  int counted = 0;
  for (int c = 0; c < num_classes; ++c) {
    const double a = ovr_auroc(labels, probs, c);
    if (a >= 0.0) {
      sum += a;
      ++counted;
    }
  }
  return counted == 0 ? 0.5 : sum / static_cast<double>(counted);
}

double ece_metric(const std::vector<int>& labels, const std::vector<std::vector<double>>& probs,
                  int bins) {
  if (labels.empty() || labels.size() != probs.size() || bins < 1) {
    throw std::invalid_argument("ece_metric: bad inputs");
  }
  std::vector<long> count(static_cast<std::size_t>(bins), 0);
  std::vector<double> conf_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<long> correct(static_cast<std::size_t>(bins), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int pred = argmax_lowest(probs[i]);
    const double conf = probs[i][static_cast<std::size_t>(pred)];
    const int b = std::min(bins - 1, static_cast<int>(std::floor(conf * bins)));
    count[static_cast<std::size_t>(b)] += 1;
    conf_sum[static_cast<std::size_t>(b)] += conf;
    if (pred == labels[i]) correct[static_cast<std::size_t>(b)] += 1;
  }
  const double n = static_cast<double>(labels.size());
  double ece = 0.0;
  for (int b = 0; b < bins; ++b) {
    const auto bi = static_cast<std::size_t>(b);
    if (count[bi] == 0) continue;
    const double acc = static_cast<double>(correct[bi]) / static_cast<double>(count[bi]);
    const double conf = conf_sum[bi] / static_cast<double>(count[bi]);
    ece += (static_cast<double>(count[bi]) / n) * std::abs(acc - conf);
  }
  return ece;
}

}  // namespace graphmix
