#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace covrank {

struct ScoredLabel {
  std::string doc_id;
  double score = 0.0;
  int label = 0;
};

struct PrfReport {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};

// Counts and P/R/F1 when predicting 1 iff score > threshold. Precision is 0
// when nothing is predicted positive, recall 0 when there are no positives.
PrfReport prf_at(const std::vector<ScoredLabel>& items, double threshold);

// Best F1 over thresholds at -inf, +inf and every midpoint between consecutive
// distinct scores; ties go to the lowest threshold. Throws Error without
// positives or with a non-finite score.
PrfReport optimal_f1(const std::vector<ScoredLabel>& items);

// DCG@k / IDCG@k with gain rel_i / log2(i + 1), i 1-based. k = 0 means the
// whole list. Throws Error when every relevance is zero or any is negative.
double ndcg(const std::vector<double>& relevances_in_predicted_order, std::size_t k = 0);

// Sample Pearson correlation. Throws Error on length mismatch, n < 2 or zero
// variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// JSON cannot carry infinities; thresholds are clamped to +-max double.
double finite_threshold(double t);

}  // namespace covrank
