#pragma once

#include <vector>

namespace graphmix {

// Argmax match rate; argmax ties resolve to the lowest class index.
double accuracy_metric(const std::vector<int>& labels,
                       const std::vector<std::vector<double>>& probs);

// Rank-statistic AUROC with half credit for ties. Binary problems use the
// class-1 score; multiclass is macro one-vs-rest over classes that have both
// positives and negatives (0.5 when none does).
double auroc_metric(const std::vector<int>& labels, const std::vector<std::vector<double>>& probs,
                    int num_classes);

// Expected calibration error over `bins` equal-width confidence bins on the
// max predicted probability.
double ece_metric(const std::vector<int>& labels, const std::vector<std::vector<double>>& probs,
                  int bins = 10);

}  // namespace graphmix
