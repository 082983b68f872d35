#include "covrank/apps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "covrank/coverage.hpp"
#include "covrank/error.hpp"
#include "covrank/jsonl.hpp"
#include "covrank/rng.hpp"

namespace covrank {

std::string_view to_string(RankingMethod::Kind k) {
  switch (k) {
    case RankingMethod::Kind::kRandom: return "random";
    case RankingMethod::Kind::kIrBm25: return "ir_bm25";
    case RankingMethod::Kind::kCoveragePrediction: return "coverage_prediction";
    case RankingMethod::Kind::kOracle: return "coverage_oracle";
  }
  return "?";
}

RankingMethod::Kind parse_ranking_method(std::string_view name) {
  for (auto k : {RankingMethod::Kind::kRandom, RankingMethod::Kind::kIrBm25,
                 RankingMethod::Kind::kCoveragePrediction, RankingMethod::Kind::kOracle}) {
    if (to_string(k) == name) return k;
  }
  throw Error("unknown ranking method \"" + std::string(name) + "\"");
}

std::vector<RankedDocument> rank_documents(const std::vector<std::string>& doc_ids,
                                           const RankingMethod& method,
                                           const std::map<std::string, double>& scores) {
  std::vector<RankedDocument> out;
  out.reserve(doc_ids.size());
  if (method.kind == RankingMethod::Kind::kRandom) {
    std::vector<std::string> ids = doc_ids;
    std::sort(ids.begin(), ids.end());
    Rng rng(method.seed);
    rng.shuffle(ids);
    for (auto& id : ids) out.push_back({std::move(id), 0.0});
    return out;
  }
  for (const auto& id : doc_ids) {
    auto it = scores.find(id);
    if (it == scores.end()) {
      throw Error(std::string(to_string(method.kind)) + " ranking has no score for doc_id \"" + id +
                  "\"");
    }
    out.push_back({id, it->second});
  }
  std::sort(out.begin(), out.end(), [](const RankedDocument& a, const RankedDocument& b) {
    return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
  });
  return out;
}

YieldResult kbc_yield(const std::vector<RankedDocument>& ranked, std::size_t k,
                      const std::map<std::string, std::set<std::string>>& objects_by_doc,
                      const std::set<std::string>& gt_objects) {
  if (k == 0) throw Error("k must be >= 1");
  std::set<std::string> found;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    auto it = objects_by_doc.find(ranked[i].doc_id);
    if (it != objects_by_doc.end()) found.insert(it->second.begin(), it->second.end());
  }
  YieldResult r;
  r.yield = found.size();
  if (!found.empty()) {
    std::size_t correct = 0;
    for (const auto& o : found) correct += gt_objects.contains(o) ? 1 : 0;
    r.precision = static_cast<double>(correct) / static_cast<double>(found.size());
  }
  return r;
}

void write_ranking_csv(const std::filesystem::path& path, const std::vector<RankedDocument>& ranked,
                       RankingMethod::Kind method) {
  std::ofstream out = jsonl::open_output(path);
  out << "rank,doc_id,method,score\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    std::string id = ranked[i].doc_id;
    if (id.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : id) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      id = quoted + "\"";
    }
    out << fmt::format("{},{},{},{:.17g}\n", i + 1, id, to_string(method), ranked[i].score);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Budget

double CostModel::predictor_cost(std::size_t doc_length) const {
  return beta0 + beta1 * static_cast<double>(doc_length);
}

double CostModel::extractor_cost(std::size_t mention_count) const {
  const double m = static_cast<double>(mention_count);
  return alpha0 + alpha1 * m * m;
}

void CostModel::validate() const {
  for (double c : {beta0, beta1, alpha0, alpha1}) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw Error("cost coefficients must be finite and >= 0");
  }
}

CostModel calibrate_costs(const std::vector<std::size_t>& doc_lengths,
                          const std::vector<std::size_t>& mention_counts,
                          const CostCalibration& cal) {
  if (doc_lengths.empty() || mention_counts.empty()) throw Error("cannot calibrate on an empty corpus");
  for (double s : {cal.predictor_intercept_share, cal.extractor_intercept_share}) {
    if (!(s >= 0.0 && s <= 1.0)) throw Error("intercept shares must lie in [0, 1]");
  }
  double mean_len = 0.0;
  for (auto l : doc_lengths) mean_len += static_cast<double>(l);
  mean_len /= static_cast<double>(doc_lengths.size());
  double mean_sq = 0.0;
  for (auto m : mention_counts) mean_sq += static_cast<double>(m) * static_cast<double>(m);
  mean_sq /= static_cast<double>(mention_counts.size());

  CostModel c;
  c.beta0 = cal.predictor_intercept_share * cal.predictor_mean;
  c.beta1 = mean_len > 0.0 ? (1.0 - cal.predictor_intercept_share) * cal.predictor_mean / mean_len : 0.0;
  if (mean_len <= 0.0) c.beta0 = cal.predictor_mean;
  c.alpha0 = cal.extractor_intercept_share * cal.extractor_mean;
  c.alpha1 = mean_sq > 0.0 ? (1.0 - cal.extractor_intercept_share) * cal.extractor_mean / mean_sq : 0.0;
  if (mean_sq <= 0.0) c.alpha0 = cal.extractor_mean;
  c.validate();
  return c;
}

std::string_view to_string(BudgetPolicy::Kind k) {
  return k == BudgetPolicy::Kind::kBaselineRandom ? "baseline_random" : "prioritized";
}

BudgetResult simulate_budget(const std::vector<BudgetDocument>& docs, const CostModel& cost,
                             double budget_seconds, const BudgetPolicy& policy) {
  if (!(budget_seconds > 0.0)) throw Error("budget must be positive");
  cost.validate();

  std::vector<const BudgetDocument*> order;
  order.reserve(docs.size());
  for (const auto& d : docs) order.push_back(&d);
  std::sort(order.begin(), order.end(),
            [](const BudgetDocument* a, const BudgetDocument* b) { return a->doc_id < b->doc_id; });

  BudgetResult r;
  if (policy.kind == BudgetPolicy::Kind::kBaselineRandom) {
    Rng rng(policy.seed);
    rng.shuffle(order);
  } else {
    double overhead = 0.0;
    for (const auto* d : order) overhead += cost.predictor_cost(d->doc_length);
    if (overhead > budget_seconds) return r;
    r.seconds_used = overhead;
    std::stable_sort(order.begin(), order.end(), [](const BudgetDocument* a, const BudgetDocument* b) {
      return a->predicted > b->predicted;
    });
  }

  std::set<std::string> found;
  for (const auto* d : order) {
    const double c = cost.extractor_cost(d->mention_count);
    if (r.seconds_used + c > budget_seconds) break;
    r.seconds_used += c;
    ++r.docs_processed;
    found.insert(d->objects.begin(), d->objects.end());
  }
  r.re_count = found.size();
  return r;
}

// ---------------------------------------------------------------------------
// Refutation

std::string_view to_string(Verdict v) {
  return v == Verdict::kLikelyFalse ? "likely-false" : "insufficient-evidence";
}

std::vector<Claim> collect_claims(const Corpus& corpus, const std::string& entity_id,
                                  Relation relation, const AliasTable& aliases,
                                  std::size_t max_support) {
  const std::string subject = aliases.canonical(entity_id);
  std::map<std::string, std::set<std::string>> support;
  for (const auto& t : corpus.tuples) {
    if (t.relation != relation) continue;
    const Document* d = corpus.find(t.doc_id);
    if (d == nullptr || d->entity_id != entity_id) continue;
    if (aliases.canonical(t.subject) != subject) continue;
    support[aliases.canonical(t.object)].insert(t.doc_id);
  }
  std::vector<Claim> out;
  for (auto& [object, docs] : support) {
    if (docs.size() <= max_support) out.push_back({entity_id, relation, object, std::move(docs)});
  }
  return out;
}

std::vector<RefutationReport> refute_claims(const std::vector<Claim>& claims,
                                            const std::map<CoverageKey, double>& coverage_by_doc,
                                            double refutation_threshold) {
  std::vector<RefutationReport> out;
  out.reserve(claims.size());
  for (const Claim& c : claims) {
    RefutationReport r{c, 0.0, Verdict::kInsufficientEvidence};
    bool any = false;
    for (const auto& [key, cov] : coverage_by_doc) {
      if (key.entity_id != c.subject || key.relation != c.relation) continue;
      if (c.supporting_doc_ids.contains(key.doc_id)) continue;
      r.max_nonexpressing_coverage = any ? std::max(r.max_nonexpressing_coverage, cov) : cov;
      any = true;
    }
    if (any && r.max_nonexpressing_coverage >= refutation_threshold) r.verdict = Verdict::kLikelyFalse;
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const RefutationReport& a, const RefutationReport& b) {
    if (a.max_nonexpressing_coverage != b.max_nonexpressing_coverage) {
      return a.max_nonexpressing_coverage > b.max_nonexpressing_coverage;
    }
    return std::tie(a.claim.subject, a.claim.relation, a.claim.object, a.claim.supporting_doc_ids) <
           std::tie(b.claim.subject, b.claim.relation, b.claim.object, b.claim.supporting_doc_ids);
  });
  return out;
}

void write_refutations(const std::filesystem::path& path,
                       const std::vector<RefutationReport>& reports) {
  std::ofstream out = jsonl::open_output(path);
  for (const auto& r : reports) {
    jsonl::Json j = {{"subject", r.claim.subject},
                     {"relation", to_string(r.claim.relation)},
                     {"object", r.claim.object},
                     {"supporting_doc_ids", r.claim.supporting_doc_ids},
                     {"support_count", r.claim.support_count()},
                     {"max_nonexpressing_coverage", r.max_nonexpressing_coverage},
                     {"verdict", to_string(r.verdict)}};
    out << jsonl::dump(j) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace covrank
