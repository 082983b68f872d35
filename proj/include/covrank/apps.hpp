#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "covrank/corpus.hpp"

namespace covrank {

// ---------------------------------------------------------------------------
// Document ranking

struct RankingMethod {
  enum class Kind { kRandom, kIrBm25, kCoveragePrediction, kOracle };

  Kind kind = Kind::kRandom;
  std::uint64_t seed = 0;

  static RankingMethod random(std::uint64_t seed) { return {Kind::kRandom, seed}; }
  static RankingMethod ir_bm25() { return {Kind::kIrBm25, 0}; }
  static RankingMethod coverage_prediction() { return {Kind::kCoveragePrediction, 0}; }
  static RankingMethod oracle() { return {Kind::kOracle, 0}; }
};

std::string_view to_string(RankingMethod::Kind k);
RankingMethod::Kind parse_ranking_method(std::string_view name);

struct RankedDocument {
  std::string doc_id;
  double score = 0.0;
};

// Random: seeded shuffle of the doc_ids (scores unused, reported as 0).
// Otherwise: descending `scores` (BM25, predicted probability or gold coverage
// depending on the method), ties by ascending doc_id. Throws Error when a
// score is missing, e.g. oracle ranking without gold coverage.
std::vector<RankedDocument> rank_documents(const std::vector<std::string>& doc_ids,
                                           const RankingMethod& method,
                                           const std::map<std::string, double>& scores = {});

struct YieldResult {
  std::size_t yield = 0;
  double precision = 0.0;
};

// Distinct objects extracted from the first k ranked documents and the share
// of them in `gt_objects` (0 when nothing was extracted).
YieldResult kbc_yield(const std::vector<RankedDocument>& ranked, std::size_t k,
                      const std::map<std::string, std::set<std::string>>& objects_by_doc,
                      const std::set<std::string>& gt_objects);

void write_ranking_csv(const std::filesystem::path& path, const std::vector<RankedDocument>& ranked,
                       RankingMethod::Kind method);

// ---------------------------------------------------------------------------
// Budget-constrained extraction

struct CostModel {
  double beta0 = 1.0;   // predictor intercept, s
  double beta1 = 0.0;   // predictor s per word
  double alpha0 = 6.8;  // extractor intercept, s
  double alpha1 = 0.0;  // extractor s per squared mention count

  double predictor_cost(std::size_t doc_length) const;
  double extractor_cost(std::size_t mention_count) const;
  void validate() const;
};

struct CostCalibration {
  double predictor_mean = 2.0;
  double extractor_mean = 13.6;
  // Fraction of each mean carried by the intercept.
  double predictor_intercept_share = 0.5;
  double extractor_intercept_share = 0.75;
};

// Solves the coefficients so that the corpus-average costs equal the targets.
CostModel calibrate_costs(const std::vector<std::size_t>& doc_lengths,
                          const std::vector<std::size_t>& mention_counts,
                          const CostCalibration& calibration = {});

struct BudgetDocument {
  std::string doc_id;
  std::size_t doc_length = 0;
  std::size_t mention_count = 0;
  std::set<std::string> objects;
  double predicted = 0.0;
};

struct BudgetPolicy {
  enum class Kind { kBaselineRandom, kPrioritized };
  Kind kind = Kind::kBaselineRandom;
  std::uint64_t seed = 0;
};

std::string_view to_string(BudgetPolicy::Kind k);

struct BudgetResult {
  std::size_t re_count = 0;
  std::size_t docs_processed = 0;
  double seconds_used = 0.0;
};

// Baseline: seeded random order. Prioritized: pays the predictor for every
// document first, then goes by descending prediction (ties by doc_id). Stops at
// the first document whose extraction no longer fits. Throws Error for a
// non-positive budget.
BudgetResult simulate_budget(const std::vector<BudgetDocument>& docs, const CostModel& cost,
                             double budget_seconds, const BudgetPolicy& policy);

// ---------------------------------------------------------------------------
// Claim refutation

struct Claim {
  std::string subject;
  Relation relation = Relation::kMemberOf;
  std::string object;
  std::set<std::string> supporting_doc_ids;

  std::size_t support_count() const { return supporting_doc_ids.size(); }
};

struct CoverageKey {
  std::string doc_id;
  std::string entity_id;
  Relation relation = Relation::kMemberOf;

  friend auto operator<=>(const CoverageKey&, const CoverageKey&) = default;
};

enum class Verdict { kLikelyFalse, kInsufficientEvidence };
std::string_view to_string(Verdict v);

struct RefutationReport {
  Claim claim;
  double max_nonexpressing_coverage = 0.0;
  Verdict verdict = Verdict::kInsufficientEvidence;
};

// Claims for (entity, relation) grouped by canonical object, keeping those
// supported by at most `max_support` documents. Sorted by object.
std::vector<Claim> collect_claims(const Corpus& corpus, const std::string& entity_id,
                                  Relation relation, const AliasTable& aliases,
                                  std::size_t max_support);

// For each claim, the highest coverage among documents of the same
// (entity, relation) that do not support it. Sorted by that value, descending
// (ties by subject, relation, object).
std::vector<RefutationReport> refute_claims(const std::vector<Claim>& claims,
                                            const std::map<CoverageKey, double>& coverage_by_doc,
                                            double refutation_threshold = 0.5);

void write_refutations(const std::filesystem::path& path,
                       const std::vector<RefutationReport>& reports);

}  // namespace covrank
