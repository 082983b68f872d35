#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "covrank/apps.hpp"
#include "covrank/error.hpp"
#include "covrank/rng.hpp"
#include "test_util.hpp"

namespace covrank {
namespace {

std::vector<std::string> ids_of(const std::vector<RankedDocument>& r) {
  std::vector<std::string> out;
  for (const auto& d : r) out.push_back(d.doc_id);
  return out;
}

TEST(Rank, OracleSortsByGoldCoverage) {
  const std::map<std::string, double> gold = {{"a", 0.2}, {"b", 1.0}, {"c", 0.4}};
  EXPECT_EQ(ids_of(rank_documents({"a", "b", "c"}, RankingMethod::oracle(), gold)),
            (std::vector<std::string>{"b", "c", "a"}));
  EXPECT_EQ(ids_of(rank_documents({"a", "b", "c"}, RankingMethod::coverage_prediction(), gold)),
            ids_of(rank_documents({"a", "b", "c"}, RankingMethod::oracle(), gold)));
  EXPECT_THROW(rank_documents({"a", "b"}, RankingMethod::oracle(), {}), Error);
}

TEST(Rank, TiesByDocId) {
  EXPECT_EQ(ids_of(rank_documents({"z", "m", "a"}, RankingMethod::ir_bm25(), {{"z", 1}, {"m", 1}, {"a", 1}})),
            (std::vector<std::string>{"a", "m", "z"}));
}

TEST(Rank, RandomIsSeeded) {
  std::vector<std::string> ids;
  for (int i = 0; i < 30; ++i) ids.push_back("d" + std::to_string(i));
  const auto a = ids_of(rank_documents(ids, RankingMethod::random(5)));
  EXPECT_EQ(a, ids_of(rank_documents(ids, RankingMethod::random(5))));
  EXPECT_NE(a, ids_of(rank_documents(ids, RankingMethod::random(6))));
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  auto expected = ids;
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(sorted, expected);
}

TEST(Rank, OracleMaximizesTopKCoverageByBruteForce) {
  Rng rng(13);
  for (int round = 0; round < 50; ++round) {
    const auto n = 1 + rng.index(7);
    std::vector<std::string> ids;
    std::map<std::string, double> gold;
    for (std::uint64_t i = 0; i < n; ++i) {
      ids.push_back("d" + std::to_string(i));
      gold[ids.back()] = static_cast<double>(rng.index(5)) / 4.0;
    }
    const auto ranked = rank_documents(ids, RankingMethod::oracle(), gold);
    auto perm = ids;
    std::sort(perm.begin(), perm.end());
    do {
      for (std::size_t k = 1; k <= n; ++k) {
        double oracle_sum = 0, perm_sum = 0;
        for (std::size_t i = 0; i < k; ++i) {
          oracle_sum += gold[ranked[i].doc_id];
          perm_sum += gold[perm[i]];
        }
        ASSERT_GE(oracle_sum, perm_sum);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST(Yield, UnionAndPrecision) {
  const std::set<std::string> gt = {"g1", "g2", "g3", "g4", "g5"};
  const std::map<std::string, std::set<std::string>> objects = {
      {"top", {"g1", "g2", "g3", "junk"}}, {"next", {"g4", "g1"}}, {"empty", {}}};
  const std::vector<RankedDocument> ranked = {{"top", 1}, {"next", 0.5}, {"empty", 0}};
  const auto one = kbc_yield(ranked, 1, objects, gt);
  EXPECT_EQ(one.yield, 4u);
  EXPECT_DOUBLE_EQ(one.precision, 0.75);
  const auto all = kbc_yield(ranked, 10, objects, gt);
  EXPECT_EQ(all.yield, 5u);
  const auto none = kbc_yield({{"empty", 0}}, 1, objects, gt);
  EXPECT_EQ(none.yield, 0u);
  EXPECT_EQ(none.precision, 0.0);
}

TEST(Yield, BeyondPoolSizeIsMethodIndependent) {
  const std::map<std::string, std::set<std::string>> objects = {{"a", {"x"}}, {"b", {"y", "x"}}, {"c", {"z"}}};
  const auto forward = kbc_yield({{"a", 0}, {"b", 0}, {"c", 0}}, 3, objects, {"x"});
  const auto backward = kbc_yield({{"c", 0}, {"b", 0}, {"a", 0}}, 5, objects, {"x"});
  EXPECT_EQ(forward.yield, backward.yield);
  EXPECT_EQ(forward.precision, backward.precision);
}

TEST(Costs, CalibrationHitsTargetMeans) {
  const std::vector<std::size_t> lengths = {100, 300, 800, 50};
  const std::vector<std::size_t> mentions = {3, 10, 40, 0};
  const CostModel c = calibrate_costs(lengths, mentions);
  double p = 0, e = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    p += c.predictor_cost(lengths[i]);
    e += c.extractor_cost(mentions[i]);
  }
  EXPECT_NEAR(p / 4, 2.0, 1e-12);
  EXPECT_NEAR(e / 4, 13.6, 1e-12);
  EXPECT_NEAR(c.beta0, 1.0, 1e-12);
  EXPECT_NEAR(c.alpha0, 0.75 * 13.6, 1e-12);
  EXPECT_NEAR(c.extractor_cost(10) - c.alpha0, c.alpha1 * 100, 1e-12);
}

CostModel flat(double extractor, double predictor = 0.0) {
  CostModel c;
  c.beta0 = predictor;
  c.beta1 = 0.0;
  c.alpha0 = extractor;
  c.alpha1 = 0.0;
  return c;
}

std::vector<BudgetDocument> three_docs() {
  return {{"a", 10, 1, {"o1", "o2", "o3", "o4", "o5"}, 0.0},
          {"b", 10, 1, {"o6"}, 0.0},
          {"c", 10, 1, {}, 0.0}};
}

TEST(Budget, EnumeratesAllOrders) {
  auto docs = three_docs();
  std::vector<double> rank = {3, 2, 1};
  std::size_t best = 0, worst = 100;
  std::sort(rank.begin(), rank.end());
  do {
    for (std::size_t i = 0; i < 3; ++i) docs[i].predicted = rank[i];
    const auto r = simulate_budget(docs, flat(10), 20, {BudgetPolicy::Kind::kPrioritized, 0});
    EXPECT_EQ(r.docs_processed, 2u);
    best = std::max(best, r.re_count);
    worst = std::min(worst, r.re_count);
  } while (std::next_permutation(rank.begin(), rank.end()));
  EXPECT_EQ(best, 6u);
  EXPECT_EQ(worst, 1u);
}

TEST(Budget, SaturationAndOverhead) {
  auto docs = three_docs();
  docs[0].predicted = 0.9;
  const auto base = simulate_budget(docs, flat(10, 1), 1000, {BudgetPolicy::Kind::kBaselineRandom, 3});
  const auto prio = simulate_budget(docs, flat(10, 1), 1000, {BudgetPolicy::Kind::kPrioritized, 3});
  EXPECT_EQ(base.docs_processed, 3u);
  EXPECT_EQ(prio.docs_processed, 3u);
  EXPECT_EQ(base.re_count, prio.re_count);

  const auto starved = simulate_budget(docs, flat(10, 5), 14, {BudgetPolicy::Kind::kPrioritized, 0});
  EXPECT_EQ(starved.re_count, 0u);
  EXPECT_EQ(starved.docs_processed, 0u);
  const auto tiny = simulate_budget(docs, flat(10), 5, {BudgetPolicy::Kind::kBaselineRandom, 0});
  EXPECT_EQ(tiny.docs_processed, 0u);
  EXPECT_THROW(simulate_budget(docs, flat(10), 0, {}), Error);
}

TEST(Budget, NeverExceedsBudget) {
  Rng rng(14);
  for (int round = 0; round < 300; ++round) {
    std::vector<BudgetDocument> docs;
    for (auto n = 1 + rng.index(20); n > 0; --n) {
      BudgetDocument d{"d" + std::to_string(n), 50 + rng.index(500), rng.index(30), {}, rng.uniform()};
      for (auto k = rng.index(4); k > 0; --k) d.objects.insert("o" + std::to_string(rng.index(10)));
      docs.push_back(d);
    }
    CostModel c;
    c.beta0 = rng.uniform(0, 2);
    c.beta1 = rng.uniform(0, 0.01);
    c.alpha0 = rng.uniform(1, 10);
    c.alpha1 = rng.uniform(0, 0.05);
    const double budget = rng.uniform(1, 200);
    for (auto kind : {BudgetPolicy::Kind::kBaselineRandom, BudgetPolicy::Kind::kPrioritized}) {
      const auto r = simulate_budget(docs, c, budget, {kind, static_cast<std::uint64_t>(round)});
      EXPECT_LE(r.seconds_used, budget);
      EXPECT_LE(r.docs_processed, docs.size());
    }
  }
}

Claim claim(const std::string& object, std::set<std::string> docs) {
  return {"E", Relation::kCeo, object, std::move(docs)};
}

TEST(Refute, VerdictsAndOrder) {
  const std::map<CoverageKey, double> cov = {{{"d1", "E", Relation::kCeo}, 0.9},
                                             {{"d2", "E", Relation::kCeo}, 0.2},
                                             {{"d3", "E", Relation::kCeo}, 0.3},
                                             {{"x1", "F", Relation::kCeo}, 1.0}};
  const auto reports = refute_claims({claim("low", {"d1"}), claim("high", {"d2", "d3"})}, cov, 0.5);
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].claim.object, "high");
  EXPECT_DOUBLE_EQ(reports[0].max_nonexpressing_coverage, 0.9);
  EXPECT_EQ(reports[0].verdict, Verdict::kLikelyFalse);
  EXPECT_EQ(reports[1].claim.object, "low");
  EXPECT_DOUBLE_EQ(reports[1].max_nonexpressing_coverage, 0.3);
  EXPECT_EQ(reports[1].verdict, Verdict::kInsufficientEvidence);

  const auto lonely = refute_claims({claim("all", {"d1", "d2", "d3"})}, cov, 0.5);
  EXPECT_EQ(lonely[0].max_nonexpressing_coverage, 0.0);
  EXPECT_EQ(lonely[0].verdict, Verdict::kInsufficientEvidence);
}

TEST(Refute, InputOrderDoesNotMatter) {
  Rng rng(15);
  std::map<CoverageKey, double> cov;
  for (int i = 0; i < 8; ++i) cov[{"d" + std::to_string(i), "E", Relation::kCeo}] = rng.uniform();
  std::vector<Claim> claims;
  for (int i = 0; i < 12; ++i) claims.push_back(claim("o" + std::to_string(i), {"d" + std::to_string(rng.index(8))}));
  auto objects = [](const std::vector<RefutationReport>& rs) {
    std::vector<std::string> out;
    for (const auto& r : rs) out.push_back(r.claim.object);
    return out;
  };
  const auto reference = objects(refute_claims(claims, cov));
  for (int round = 0; round < 20; ++round) {
    rng.shuffle(claims);
    EXPECT_EQ(objects(refute_claims(claims, cov)), reference);
  }
}

TEST(Refute, CollectClaimsFromFixture) {
  const auto dir = testing::fixture("tesla");
  const Corpus c = load_corpus(dir / "documents.jsonl", dir / "tuples.jsonl", dir / "gt.jsonl");
  const AliasTable aliases = load_aliases(dir / "aliases.jsonl");
  const auto low = collect_claims(c, "Tesla", Relation::kFoundedBy, aliases, 1);
  ASSERT_EQ(low.size(), 2u);
  EXPECT_EQ(low[0].object, "Ian Wright");
  EXPECT_EQ(low[1].object, "JB Straubel");
  EXPECT_EQ(low[1].supporting_doc_ids, (std::set<std::string>{"t1"}));
  const auto all = collect_claims(c, "Tesla", Relation::kFoundedBy, aliases, 10);
  EXPECT_EQ(all.size(), 5u);
}

TEST(Output, RankingCsv) {
  testing::TempDir dir;
  write_ranking_csv(dir / "r.csv", {{"a", 0.5}, {"b", 0.25}}, RankingMethod::Kind::kOracle);
  const std::string text = testing::read_file(dir / "r.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "rank,doc_id,method,score");
  EXPECT_NE(text.find("1,a,coverage_oracle,0.5"), std::string::npos);
}

}  // namespace
}  // namespace covrank
