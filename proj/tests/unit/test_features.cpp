#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "covrank/error.hpp"
#include "covrank/features.hpp"
#include "covrank/rng.hpp"
#include "test_util.hpp"

namespace covrank {
namespace {

Document doc(const std::string& id, const std::string& body, const std::string& entity = "E") {
  return make_document(id, entity, "https://x/" + id, "x.org", body);
}

TEST(DocLength, CountsTokens) {
  EXPECT_EQ(doc_length(doc("a", "hello world")), 2u);
  EXPECT_EQ(doc_length(doc("a", "")), 0u);
  EXPECT_EQ(doc_length(doc("a", "Don't stop-believing now")), 3u);
}

TEST(NerCount, GoldMentionsCountedByTargetType) {
  const Document d = doc("g", std::string(100, 'x'));
  std::vector<Mention> m;
  for (std::size_t i = 0; i < 3; ++i) m.push_back({{i * 10, i * 10 + 5}, EntityType::kPerson});
  for (std::size_t i = 3; i < 5; ++i) m.push_back({{i * 10, i * 10 + 5}, EntityType::kOrganization});
  const auto provider = MentionProvider::from_map({{"g", m}});
  EXPECT_EQ(ner_count(d, Relation::kFamily, provider), 3u);
  EXPECT_EQ(ner_count(d, Relation::kMemberOf, provider), 2u);
  EXPECT_THROW(ner_count(doc("missing", "x"), Relation::kFamily, provider), Error);
}

TEST(NerCount, HeuristicCapitalizedRuns) {
  const auto provider = MentionProvider::heuristic();
  EXPECT_EQ(ner_count(doc("h", "Steve Jobs met Steve Wozniak."), Relation::kFamily, provider), 2u);
  const auto runs = capitalized_runs("She joined Acme Motors Inc in May. Then left.");
  std::size_t orgs = 0;
  for (const auto& r : runs) orgs += r.type == EntityType::kOrganization ? 1 : 0;
  EXPECT_EQ(orgs, 1u);
}

TEST(NerCount, GoldFileRoundTrip) {
  testing::TempDir dir;
  write_mentions(dir / "m.jsonl", {{"a", {{{0, 4}, EntityType::kPerson}, {{5, 9}, EntityType::kOrganization}}}});
  const auto provider = MentionProvider::from_file(dir / "m.jsonl");
  EXPECT_EQ(ner_count(doc("a", "Anne Acme"), Relation::kCeo, provider), 1u);
  EXPECT_EQ(ner_count(doc("a", "Anne Acme"), Relation::kEduAt, provider), 1u);
}

TEST(Saliency, LongestMatchNonOverlapping) {
  EXPECT_EQ(entity_saliency(doc("a", "Tesla, tesla and TESLA."), {"Tesla"}), 3u);
  EXPECT_EQ(entity_saliency(doc("a", "Tesla Inc is Tesla."), {"Tesla", "Tesla Inc"}), 2u);
  EXPECT_EQ(entity_saliency(doc("a", "Nothing here."), {"Tesla"}), 0u);
  EXPECT_EQ(entity_saliency(doc("a", "Teslas are not Tesla"), {"Tesla"}), 1u);
}

// Straight transcription of the scoring formula over whitespace tokens.
double naive_bm25(const std::vector<std::vector<std::string>>& corpus, const std::vector<std::string>& query,
                  std::size_t d, double k1 = 1.5, double b = 0.75) {
  const double n = static_cast<double>(corpus.size());
  double total_len = 0.0;
  for (const auto& doc_tokens : corpus) total_len += static_cast<double>(doc_tokens.size());
  const double avgdl = total_len / n;
  const double dl = static_cast<double>(corpus[d].size());
  double score = 0.0;
  for (const auto& q : query) {
    double df = 0.0;
    for (const auto& doc_tokens : corpus) {
      df += std::find(doc_tokens.begin(), doc_tokens.end(), q) != doc_tokens.end() ? 1.0 : 0.0;
    }
    const double tf = static_cast<double>(std::count(corpus[d].begin(), corpus[d].end(), q));
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
  }
  return score;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

TEST(Bm25, WorkedExample) {
  const std::vector<std::pair<std::string, std::string>> docs = {
      {"d1", "tesla founded motors"}, {"d2", "tesla tesla energy"}, {"d3", "apple fruit"}};
  const Bm25Index index(docs);
  const std::vector<std::string> q = {"tesla", "founded"};
  const double got = bm25_score(index, q, "d1");
  EXPECT_NEAR(got, 1.374, 5e-4);
  std::vector<std::vector<std::string>> tokens;
  for (const auto& [id, t] : docs) tokens.push_back(split_ws(t));
  EXPECT_NEAR(got, naive_bm25(tokens, q, 0), 1e-9);
  EXPECT_EQ(bm25_score(index, {"apple"}, "d1"), 0.0);
  EXPECT_THROW(bm25_score(index, q, "d9"), Error);
}

TEST(Bm25, SingleDocumentPool) {
  const Bm25Index index(std::vector<std::pair<std::string, std::string>>{{"only", "alpha beta beta"}});
  const std::vector<std::string> q = {"alpha", "beta", "beta"};
  const double got = bm25_score(index, q, "only");
  EXPECT_GT(got, 0.0);
  EXPECT_NEAR(got, naive_bm25({{"alpha", "beta", "beta"}}, q, 0), 1e-12);
}

TEST(Bm25, MatchesNaiveOracleOnRandomCorpora) {
  Rng rng(11);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g"};
  for (int round = 0; round < 1000; ++round) {
    const auto n = 1 + rng.index(6);
    std::vector<std::pair<std::string, std::string>> docs;
    std::vector<std::vector<std::string>> tokens;
    for (std::uint64_t i = 0; i < n; ++i) {
      std::vector<std::string> t;
      const auto len = 1 + rng.index(9);
      std::string body;
      for (std::uint64_t k = 0; k < len; ++k) {
        t.push_back(vocab[rng.index(vocab.size())]);
        body += (k ? " " : "") + t.back();
      }
      docs.emplace_back("d" + std::to_string(i), body);
      tokens.push_back(t);
    }
    std::vector<std::string> q;
    for (auto k = 1 + rng.index(3); k > 0; --k) q.push_back(vocab[rng.index(vocab.size())]);
    const Bm25Index index(docs);
    for (std::uint64_t i = 0; i < n; ++i) {
      ASSERT_NEAR(bm25_score(index, q, docs[i].first), naive_bm25(tokens, q, i), 1e-9) << "round " << round;
    }
  }
}

TEST(Bm25, TermFrequencyAndLengthMonotonicity) {
  // dl stays at 6, so only tf moves.
  const std::string others = "x y z";
  double last = -1.0;
  for (int tf = 1; tf <= 6; ++tf) {
    std::string body;
    for (int k = 0; k < tf; ++k) body += "q ";
    for (int k = tf; k < 6; ++k) body += "w ";
    const Bm25Index index({{"d", body}, {"o1", others}, {"o2", others}});
    const double s = bm25_score(index, {"q"}, "d");
    EXPECT_GT(s, last);
    last = s;
  }
  // Appending a non-query token raises dl / avgdl.
  std::vector<double> scores;
  for (int pad = 0; pad < 6; ++pad) {
    std::string body = "q q";
    for (int k = 0; k < pad; ++k) body += " w";
    const Bm25Index index({{"d", body}, {"o", "x"}, {"p", "x"}});
    scores.push_back(bm25_score(index, {"q"}, "d"));
  }
  for (std::size_t i = 1; i < scores.size(); ++i) EXPECT_LT(scores[i], scores[i - 1]);
}

TEST(Bm25, IdfNeverNegative) {
  for (int n = 1; n <= 30; ++n) {
    std::vector<std::pair<std::string, std::string>> docs;
    for (int i = 0; i < n; ++i) docs.emplace_back("d" + std::to_string(i), i % 2 ? "t u" : "t");
    const Bm25Index index(docs);
    EXPECT_GE(index.idf("t"), 0.0);
    EXPECT_GE(index.idf("u"), 0.0);
    EXPECT_LE(index.document_frequency("t"), index.size());
  }
}

TEST(Bm25, QueryUsesEntityAndRelationWords) {
  EXPECT_EQ(bm25_query("Tesla Motors", Relation::kFoundedBy),
            (std::vector<std::string>{"tesla", "motors", "founded", "by"}));
}

TEST(Popularity, InverseLogRank) {
  PopularityTable t;
  t.set("a.com", 1);
  t.set("b.com", 10);
  EXPECT_NEAR(popularity("a.com", t), 1.0 / std::log(2.0), 1e-15);
  EXPECT_NEAR(popularity("a.com", t), 1.4427, 1e-4);
  EXPECT_GT(popularity("a.com", t), popularity("b.com", t));
  EXPECT_EQ(popularity("c.com", t), 0.0);
}

TEST(Flesch, ClosedForm) {
  EXPECT_NEAR(flesch("The cat sat on the mat."), 116.145, 1e-9);
  EXPECT_NEAR(flesch("The cat sat on the mat. The cat sat on the mat."), 116.145, 1e-9);
  EXPECT_THROW(flesch(""), Error);
  EXPECT_THROW(flesch(" ... "), Error);
}

// Counters written independently of the library: words are whitespace runs of
// lowercase letters, sentences end with '.', syllables are vowel groups minus
// a trailing silent e.
int oracle_syllables(const std::string& w) {
  auto vowel = [](char c) { return std::string("aeiouy").find(c) != std::string::npos; };
  int groups = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (vowel(w[i]) && (i == 0 || !vowel(w[i - 1]))) ++groups;
  }
  if (groups > 1 && w.back() == 'e') --groups;
  return std::max(groups, 1);
}

TEST(Flesch, MatchesIndependentCounters) {
  Rng rng(5);
  const std::string letters = "abcdefghijklmnopqrstuvwxyz";
  for (int round = 0; round < 500; ++round) {
    std::string body;
    double words = 0;
    double syllables = 0;
    const auto sentences = 1 + rng.index(4);
    for (std::uint64_t s = 0; s < sentences; ++s) {
      const auto n = 1 + rng.index(8);
      for (std::uint64_t k = 0; k < n; ++k) {
        std::string w;
        for (auto len = 1 + rng.index(9); len > 0; --len) w += letters[rng.index(letters.size())];
        syllables += oracle_syllables(w);
        words += 1;
        body += w + (k + 1 == n ? ". " : " ");
      }
    }
    const double expected = 206.835 - 1.015 * (words / static_cast<double>(sentences)) - 84.6 * (syllables / words);
    ASSERT_NEAR(flesch(body), expected, 1e-9) << body;
  }
}

TEST(HeuristicClassifier, TopHalf) {
  EXPECT_EQ(heuristic_classifier({{"a", 5}, {"b", 4}, {"c", 3}, {"d", 2}}),
            (std::map<std::string, int>{{"a", 1}, {"b", 1}, {"c", 0}, {"d", 0}}));
  const auto three = heuristic_classifier({{"x", 0.1}, {"y", 0.9}, {"z", 0.5}});
  EXPECT_EQ(three, (std::map<std::string, int>{{"x", 0}, {"y", 1}, {"z", 1}}));
  EXPECT_EQ(heuristic_classifier({{"c", 1}, {"a", 1}, {"b", 1}}),
            (std::map<std::string, int>{{"a", 1}, {"b", 1}, {"c", 0}}));
}

TEST(HeuristicClassifier, CeilHalfPositiveAndOrderFree) {
  Rng rng(3);
  for (int round = 0; round < 200; ++round) {
    const auto n = 1 + rng.index(20);
    std::vector<std::pair<std::string, double>> items;
    for (std::uint64_t i = 0; i < n; ++i) items.emplace_back("d" + std::to_string(i), static_cast<double>(rng.index(4)));
    const auto forward = heuristic_classifier({items.begin(), items.end()});
    rng.shuffle(items);
    std::map<std::string, double> shuffled;
    for (const auto& [k, v] : items) shuffled.emplace(k, v);
    EXPECT_EQ(heuristic_classifier(shuffled), forward);
    std::size_t pos = 0;
    for (const auto& [k, v] : forward) pos += static_cast<std::size_t>(v);
    EXPECT_EQ(pos, (n + 1) / 2);
  }
}

Corpus small_corpus() {
  Corpus c;
  c.documents.push_back(doc("a", "Tesla was founded by Martin Eberhard. Tesla makes cars.", "Tesla"));
  c.documents.push_back(doc("b", "An unrelated story about weather and rain.", "Tesla"));
  c.documents.push_back(doc("c", "Founded by engineers, Tesla grew fast.", "Tesla"));
  c.reindex();
  return c;
}

TEST(Featurize, DeterministicAndPopulated) {
  const Corpus c = small_corpus();
  AliasTable aliases;
  aliases.add("Tesla", {"Tesla Motors"});
  PopularityTable pop;
  pop.set("x.org", 3);
  const auto mentions = MentionProvider::heuristic();
  const FeatureConfig config{&aliases, &pop, &mentions, {}};
  const auto first = featurize(c, "Tesla", Relation::kFoundedBy, config);
  EXPECT_EQ(first, featurize(c, "Tesla", Relation::kFoundedBy, config));
  ASSERT_EQ(first.size(), 3u);
  EXPECT_EQ(first.at("b").entity_saliency, 0.0);
  EXPECT_EQ(first.at("b").bm25, 0.0);
  EXPECT_GT(first.at("b").doc_length, 0.0);
  EXPECT_EQ(first.at("a").entity_saliency, 2.0);
  EXPECT_GT(first.at("a").bm25, 0.0);
  EXPECT_NEAR(first.at("a").popularity, 1.0 / std::log(4.0), 1e-12);
  for (const auto& [id, f] : first) {
    for (double v : f.values()) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Featurize, SingleDocumentPool) {
  Corpus c;
  c.documents.push_back(doc("solo", "Acme founded by Ann.", "Acme"));
  c.reindex();
  const auto mentions = MentionProvider::heuristic();
  const FeatureConfig config{nullptr, nullptr, &mentions, {}};
  const auto f = featurize(c, "Acme", Relation::kFoundedBy, config);
  const std::vector<std::string> q = {"acme", "founded", "by"};
  EXPECT_NEAR(f.at("solo").bm25, naive_bm25({{"acme", "founded", "by", "ann"}}, q, 0), 1e-12);
}

TEST(FeatureFile, RoundTrip) {
  testing::TempDir dir;
  std::vector<FeatureRow> rows = {{"a", "E", Relation::kCeo, {12, 3, 1, 0.25, 1.4426950408889634, 61.5}},
                                  {"b", "E", Relation::kCeo, {0, 0, 0, 0, 0, -12.125}}};
  write_features(dir / "f.jsonl", rows);
  const auto back = read_features(dir / "f.jsonl");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].doc_id, rows[i].doc_id);
    EXPECT_EQ(back[i].features, rows[i].features);
  }
  EXPECT_EQ(feature_index("bm25"), 3u);
  EXPECT_THROW(feature_index("nope"), Error);
}

}  // namespace
}  // namespace covrank
