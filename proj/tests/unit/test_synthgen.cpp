#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "covrank/coverage.hpp"
#include "covrank/error.hpp"
#include "covrank/eval.hpp"
#include "covrank/synthgen.hpp"
#include "covrank/text.hpp"
#include "test_util.hpp"

namespace covrank {
namespace {

SynthConfig small(std::uint64_t seed) {
  SynthConfig c;
  c.n_entities = 8;
  c.docs_per_entity = 20;
  c.embedding_dimension = 8;
  c.seed = seed;
  c.relations = {Relation::kFoundedBy, Relation::kMemberOf};
  return c;
}

TEST(Synth, PlantedCoverageEqualsComputedCoverage) {
  const auto s = generate(small(1));
  const auto gts = resolve_ground_truths(s.corpus, GtVariant::kWiki, s.aliases);
  const auto records = coverage_records(s.corpus, gts, s.aliases);
  ASSERT_EQ(records.size(), s.corpus.documents.size());
  for (const auto& r : records) {
    EXPECT_EQ(r.coverage, s.planted_coverage.at(r.doc_id)) << r.doc_id;
  }
}

TEST(Synth, DocumentsEmbedRoundedShareOfGroundTruth) {
  const auto cfg = small(2);
  const auto s = generate(cfg);
  for (const auto& d : s.corpus.documents) {
    const double c = s.planted_coverage.at(d.doc_id);
    const std::string folded = text::fold(d.text);
    std::size_t present = 0;
    for (const auto& [key, truth] : s.corpus.ground_truths) {
      if (key.entity_id != d.entity_id) continue;
      for (const auto& o : truth.objects) present += folded.find(o) != std::string::npos ? 1 : 0;
    }
    EXPECT_EQ(present, static_cast<std::size_t>(std::lround(c * static_cast<double>(cfg.gt_size)))) << d.doc_id;
  }
}

TEST(Synth, SatisfiesCorpusInvariantsAfterWriting) {
  testing::TempDir dir;
  const auto s = generate(small(3));
  write_synth(s, dir.path());
  const Corpus back = load_corpus(dir / "documents.jsonl", dir / "tuples.jsonl", dir / "gt.jsonl");
  EXPECT_EQ(back.documents, s.corpus.documents);
  EXPECT_EQ(back.tuples.size(), s.corpus.tuples.size());
  const auto emb = load_embeddings(dir / "embeddings.bin");
  EXPECT_EQ(emb.size(), s.corpus.documents.size());
  const auto mentions = MentionProvider::from_file(dir / "mentions.jsonl");
  for (const auto& d : back.documents) EXPECT_NO_THROW(mentions.mentions(d));
  const auto pop = load_popularity(dir / "popularity.tsv");
  EXPECT_GT(pop.size(), 0u);
}

TEST(Synth, SameSeedWritesIdenticalBytes) {
  testing::TempDir a, b;
  write_synth(generate(small(4)), a.path());
  write_synth(generate(small(4)), b.path());
  for (const char* name : {"documents.jsonl", "tuples.jsonl", "gt.jsonl", "aliases.jsonl", "mentions.jsonl",
                           "popularity.tsv", "embeddings.bin", "planted.jsonl", "truth.jsonl"}) {
    const std::string x = testing::read_file(a / name);
    EXPECT_FALSE(x.empty()) << name;
    EXPECT_EQ(x, testing::read_file(b / name)) << name;
  }
  EXPECT_NE(testing::read_file(a / "documents.jsonl"),
            [&] {
              testing::TempDir c;
              write_synth(generate(small(5)), c.path());
              return testing::read_file(c / "documents.jsonl");
            }());
}

TEST(Synth, ZeroSignalDecouplesFeatures) {
  SynthConfig cfg;
  cfg.n_entities = 20;
  cfg.docs_per_entity = 50;
  cfg.signal_strength = 0.0;
  cfg.embedding_signal = 0.0;
  cfg.seed = 7;
  const auto s = generate(cfg);
  std::vector<double> c, length, saliency;
  std::vector<std::vector<double>> emb(cfg.embedding_dimension);
  for (const auto& d : s.corpus.documents) {
    c.push_back(s.planted_coverage.at(d.doc_id));
    length.push_back(static_cast<double>(doc_length(d)));
    saliency.push_back(static_cast<double>(entity_saliency(d, s.aliases.aliases_of(d.entity_id))));
    const auto& v = s.embeddings.at(d.doc_id);
    for (std::size_t j = 0; j < v.size(); ++j) emb[j].push_back(v[j]);
  }
  ASSERT_EQ(c.size(), 1000u);
  EXPECT_LT(std::abs(pearson(c, length)), 0.1);
  EXPECT_LT(std::abs(pearson(c, saliency)), 0.1);
  for (const auto& column : emb) EXPECT_LT(std::abs(pearson(c, column)), 0.1);
}

TEST(Synth, SignalMakesFeaturesTrackCoverage) {
  SynthConfig cfg;
  cfg.n_entities = 20;
  cfg.docs_per_entity = 50;
  cfg.seed = 8;
  const auto s = generate(cfg);
  std::vector<double> c, length, saliency;
  for (const auto& d : s.corpus.documents) {
    c.push_back(s.planted_coverage.at(d.doc_id));
    length.push_back(static_cast<double>(doc_length(d)));
    saliency.push_back(static_cast<double>(entity_saliency(d, s.aliases.aliases_of(d.entity_id))));
  }
  EXPECT_GT(pearson(c, length), 0.1);
  EXPECT_GT(pearson(c, saliency), 0.1);
}

TEST(Synth, ClassBalanceNearConfiguredShare) {
  SynthConfig cfg;
  cfg.n_entities = 40;
  cfg.docs_per_entity = 50;
  const auto s = generate(cfg);
  double high = 0;
  for (const auto& [id, c] : s.planted_coverage) high += c > 0.5 ? 1 : 0;
  EXPECT_NEAR(high / static_cast<double>(s.planted_coverage.size()), cfg.high_share, 0.04);
}

TEST(Synth, RejectsInvalidConfig) {
  SynthConfig cfg;
  cfg.n_entities = 0;
  EXPECT_THROW(generate(cfg), Error);
  cfg = SynthConfig{};
  cfg.signal_strength = 1.5;
  EXPECT_THROW(generate(cfg), Error);
}

}  // namespace
}  // namespace covrank
