#include "covrank/eval.hpp"

#include <algorithm>
#include <cmath>

#include "covrank/error.hpp"

namespace covrank {

namespace {

PrfReport finish(PrfReport r) {
  const double tp = static_cast<double>(r.tp);
  r.precision = r.tp + r.fp > 0 ? tp / static_cast<double>(r.tp + r.fp) : 0.0;
  r.recall = r.tp + r.fn > 0 ? tp / static_cast<double>(r.tp + r.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

}  // namespace

PrfReport prf_at(const std::vector<ScoredLabel>& items, double threshold) {
  PrfReport r;
  r.threshold = threshold;
  for (const auto& it : items) {
    const bool predicted = it.score > threshold;
    if (predicted) {
      (it.label == 1 ? r.tp : r.fp) += 1;
    } else {
      (it.label == 1 ? r.fn : r.tn) += 1;
    }
  }
  return finish(r);
}

PrfReport optimal_f1(const std::vector<ScoredLabel>& items) {
  std::size_t positives = 0;
  for (const auto& it : items) {
    if (!std::isfinite(it.score)) throw Error("non-finite score for \"" + it.doc_id + "\"");
    positives += it.label == 1 ? 1 : 0;
  }
  if (positives == 0) throw Error("optimal F1 needs at least one positive label");

  // Sweep from the highest threshold down: lowering the threshold past a
  // block of equal scores moves that whole block to the positive side.
  std::vector<ScoredLabel> sorted = items;
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

  PrfReport cur;
  cur.fn = positives;
  cur.tn = items.size() - positives;
  cur.threshold = std::numeric_limits<double>::infinity();
  PrfReport best = finish(cur);

  std::size_t i = 0;
  while (i < sorted.size()) {
    const double s = sorted[i].score;
    while (i < sorted.size() && sorted[i].score == s) {
      if (sorted[i].label == 1) {
        ++cur.tp;
        --cur.fn;
      } else {
        ++cur.fp;
        --cur.tn;
      }
      ++i;
    }
    cur.threshold = i < sorted.size() ? s + (sorted[i].score - s) / 2.0
                                      : -std::numeric_limits<double>::infinity();
    const PrfReport r = finish(cur);
    // >= because thresholds decrease along the sweep and ties favour the lowest.
    if (r.f1 >= best.f1) best = r;
  }
  return best;
}

double ndcg(const std::vector<double>& rel, std::size_t k) {
  for (double r : rel) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error("relevances must be finite and non-negative");
  }
  const std::size_t cut = k == 0 ? rel.size() : std::min(k, rel.size());
  auto dcg = [cut](const std::vector<double>& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < cut; ++i) s += r[i] / std::log2(static_cast<double>(i) + 2.0);
    return s;
  };
  std::vector<double> ideal = rel;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg(ideal);
  if (idcg <= 0.0) throw Error("nDCG is undefined when every relevance is zero");
  return dcg(rel) / idcg;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("pearson: inputs differ in length");
  if (x.size() < 2) throw Error("pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw Error("pearson: zero variance");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double finite_threshold(double t) {
  constexpr double kMax = std::numeric_limits<double>::max();
  return std::clamp(t, -kMax, kMax);
}

}  // namespace covrank
