#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <map>

#include "covrank/error.hpp"
#include "covrank/rng.hpp"
#include "covrank/vectorize.hpp"
#include "test_util.hpp"

namespace covrank {
namespace {

std::vector<std::string> terms(const Vocabulary& v) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(v.term(i));
  return out;
}

TEST(Vocabulary, DocumentFrequencyFilter) {
  EXPECT_EQ(terms(fit_vocabulary({"a b", "a c"}, {1, 1, 100})), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(terms(fit_vocabulary({"a b", "a c"}, {1, 2, 100})), (std::vector<std::string>{"a"}));
  const auto bigrams = terms(fit_vocabulary({"a b"}, {2, 1, 100}));
  EXPECT_NE(std::find(bigrams.begin(), bigrams.end(), "a b"), bigrams.end());
  EXPECT_THROW(fit_vocabulary({}, {}), Error);
}

TEST(Vocabulary, CapKeepsMostFrequent) {
  const auto v = fit_vocabulary({"x y z", "x y", "x"}, {1, 1, 2});
  EXPECT_EQ(terms(v), (std::vector<std::string>{"x", "y"}));
}

TEST(Vocabulary, CaseFoldedAndJsonRoundTrip) {
  const auto v = fit_vocabulary({"Apple pie", "apple Tart"}, {1, 2, 100});
  EXPECT_EQ(terms(v), (std::vector<std::string>{"apple"}));
  const auto back = Vocabulary::from_json(v.to_json());
  EXPECT_EQ(terms(back), terms(v));
  EXPECT_EQ(back.documents(), v.documents());
  EXPECT_EQ(back.idf(0), v.idf(0));
}

TEST(Tfidf, WorkedExample) {
  const auto v = fit_vocabulary({"a b", "a c"}, {1, 1, 100});
  const SparseVector x = tfidf_vector("a b", v);
  ASSERT_EQ(x.entries.size(), 2u);
  // Independent recomputation of the smoothed idf.
  const double idf_a = std::log(3.0 / 3.0) + 1.0;
  const double idf_b = std::log(3.0 / 2.0) + 1.0;
  const double norm = std::hypot(idf_a, idf_b);
  EXPECT_NEAR(x.entries[0].second, idf_a / norm, 1e-12);
  EXPECT_NEAR(x.entries[1].second, idf_b / norm, 1e-12);
  EXPECT_NEAR(x.entries[0].second, 0.5797, 1e-4);
  EXPECT_NEAR(x.entries[1].second, 0.8148, 1e-4);
}

TEST(Tfidf, OutOfVocabularyIsZeroAndDuplicationInvariant) {
  const auto v = fit_vocabulary({"a b", "a c"}, {1, 1, 100});
  EXPECT_TRUE(tfidf_vector("zzz qqq", v).empty());
  EXPECT_EQ(tfidf_vector("a b", v).entries.size(), tfidf_vector("a b a b", v).entries.size());
  const auto once = tfidf_vector("a b c", v);
  const auto twice = tfidf_vector("a b c a b c", v);
  for (std::size_t i = 0; i < once.entries.size(); ++i) {
    EXPECT_EQ(once.entries[i].first, twice.entries[i].first);
    EXPECT_NEAR(once.entries[i].second, twice.entries[i].second, 1e-15);
  }
}

TEST(Tfidf, UnitNormSortedIndicesWithinVocabulary) {
  Rng rng(8);
  const std::vector<std::string> words = {"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"};
  std::vector<std::string> texts;
  for (int i = 0; i < 200; ++i) {
    std::string t;
    for (auto n = 1 + rng.index(12); n > 0; --n) t += words[rng.index(words.size())] + " ";
    texts.push_back(t);
  }
  const auto v = fit_vocabulary(texts, {2, 2, 100000});
  for (const auto& t : texts) {
    const auto x = tfidf_vector(t, v);
    if (x.empty()) continue;
    EXPECT_NEAR(x.norm(), 1.0, 1e-9);
    for (std::size_t i = 0; i < x.entries.size(); ++i) {
      EXPECT_LT(x.entries[i].first, v.size());
      if (i > 0) EXPECT_LT(x.entries[i - 1].first, x.entries[i].first);
    }
    EXPECT_NEAR(cosine(x, x), 1.0, 1e-12);
  }
}

TEST(Tfidf, CosineOfDisjointDocumentsIsZero) {
  const auto v = fit_vocabulary({"a b", "c d"}, {1, 1, 100});
  EXPECT_EQ(cosine(tfidf_vector("a b", v), tfidf_vector("c d", v)), 0.0);
}

TEST(Ngrams, TextOrder) {
  EXPECT_EQ(ngrams("The cat sat", 2), (std::vector<std::string>{"the", "the cat", "cat", "cat sat", "sat"}));
}

TEST(Masking, EntitiesAndNumbers) {
  const Document d = make_document("m", "E", "u", "s", "Alice Smith paid 1,200 dollars in 1999.");
  const auto provider = MentionProvider::from_map({{"m", {{{0, 11}, EntityType::kPerson}}}});
  EXPECT_EQ(masked_text(d, provider), "[ENT] paid [NUM] dollars in [NUM].");
}

EmbeddingStore random_store(std::size_t n, std::uint32_t dim, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingStore store(dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<float> v(dim);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    store.add("doc-" + std::to_string(i), v);
  }
  return store;
}

TEST(Embeddings, BitExactRoundTrip) {
  testing::TempDir dir;
  EmbeddingStore store = random_store(3, 768, 1);
  std::vector<float> edge(768, 0.0f);
  edge[0] = std::numeric_limits<float>::denorm_min();
  edge[1] = -0.0f;
  edge[2] = std::numeric_limits<float>::max();
  store.add("édge", edge);
  save_embeddings(store, dir / "e.bin");
  const auto back = load_embeddings(dir / "e.bin");
  EXPECT_EQ(back.size(), 4u);
  EXPECT_EQ(back.dimension(), 768u);
  EXPECT_EQ(back.ids(), store.ids());
  for (const auto& id : store.ids()) {
    EXPECT_EQ(std::memcmp(back.at(id).data(), store.at(id).data(), 768 * sizeof(float)), 0) << id;
  }
}

TEST(Embeddings, HeaderLayout) {
  testing::TempDir dir;
  EmbeddingStore store(2);
  store.add("ab", {1.0f, -2.0f});
  save_embeddings(store, dir / "e.bin");
  const std::string bytes = testing::read_file(dir / "e.bin");
  ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 8 + 2 + 2 + 8);
  EXPECT_EQ(bytes.substr(0, 4), "CVEM");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 2);
  EXPECT_EQ(bytes[12], 1);
  EXPECT_EQ(bytes[20], 2);
  EXPECT_EQ(bytes.substr(22, 2), "ab");
  float first;
  std::memcpy(&first, bytes.data() + 24, 4);
  EXPECT_EQ(first, 1.0f);
}

TEST(Embeddings, FormatErrors) {
  testing::TempDir dir;
  save_embeddings(random_store(2, 4, 2), dir / "ok.bin");
  std::string bytes = testing::read_file(dir / "ok.bin");

  std::string bad = bytes;
  bad[0] = 'X';
  testing::write_file(dir / "magic.bin", bad);
  EXPECT_THROW(load_embeddings(dir / "magic.bin"), IoError);

  testing::write_file(dir / "short.bin", bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_embeddings(dir / "short.bin"), IoError);

  std::string zero = bytes;
  zero[8] = 0;
  testing::write_file(dir / "dim0.bin", zero);
  EXPECT_THROW(load_embeddings(dir / "dim0.bin"), IoError);

  std::string version = bytes;
  version[4] = 9;
  testing::write_file(dir / "version.bin", version);
  EXPECT_THROW(load_embeddings(dir / "version.bin"), IoError);

  EXPECT_THROW(load_embeddings(dir / "absent.bin"), IoError);
}

TEST(Embeddings, EmptyStoreLoadsAndLookupsFail) {
  testing::TempDir dir;
  save_embeddings(EmbeddingStore(16), dir / "empty.bin");
  const auto store = load_embeddings(dir / "empty.bin");
  EXPECT_EQ(store.size(), 0u);
  EXPECT_EQ(store.dimension(), 16u);
  EXPECT_THROW(store.at("x"), Error);
}

TEST(Embeddings, StoreValidation) {
  EmbeddingStore store(2);
  EXPECT_THROW(store.add("a", {1.0f}), Error);
  EXPECT_THROW(store.add("a", {1.0f, std::numeric_limits<float>::quiet_NaN()}), Error);
  store.add("a", {1.0f, 2.0f});
  EXPECT_THROW(store.add("a", {1.0f, 2.0f}), Error);
  EXPECT_EQ(store.as_double("a"), (std::vector<double>{1.0, 2.0}));
}

}  // namespace
}  // namespace covrank
