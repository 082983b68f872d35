#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "covrank/corpus.hpp"
#include "covrank/text.hpp"

namespace covrank {

// The six cheap per-document signals, in canonical column order.
struct FeatureVector {
  double doc_length = 0.0;
  double ner_count = 0.0;
  double entity_saliency = 0.0;
  double bm25 = 0.0;
  double popularity = 0.0;
  double flesch = 0.0;

  static constexpr std::size_t kSize = 6;
  static constexpr std::array<std::string_view, kSize> kNames = {
      "doc_length", "ner_count", "entity_saliency", "bm25", "popularity", "flesch"};

  std::array<double, kSize> values() const {
    return {doc_length, ner_count, entity_saliency, bm25, popularity, flesch};
  }
  double operator[](std::size_t i) const { return values()[i]; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Column index for a feature name; throws Error for unknown names.
std::size_t feature_index(std::string_view name);

struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;
};

// Okapi BM25 over a fixed document pool.
//   idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
//   score  = sum_t idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))
class Bm25Index {
 public:
  Bm25Index() = default;
  // `documents` maps doc_id -> text; tokens are case-folded.
  Bm25Index(const std::vector<std::pair<std::string, std::string>>& documents,
            Bm25Params params = {});

  // Query terms are summed as given, so a repeated term counts twice.
  double score(const std::vector<std::string>& query, std::string_view doc_id) const;
  double idf(const std::string& term) const;

  std::size_t size() const { return lengths_.size(); }
  double average_length() const { return avgdl_; }
  std::size_t document_frequency(const std::string& term) const;
  const Bm25Params& params() const { return params_; }

 private:
  Bm25Params params_;
  std::unordered_map<std::string, std::size_t> slot_;
  std::vector<std::size_t> lengths_;
  std::vector<std::unordered_map<std::string, std::size_t>> tf_;
  std::unordered_map<std::string, std::size_t> df_;
  double avgdl_ = 0.0;
};

// Query text for (entity, relation): the entity name followed by the relation
// name with hyphens read as spaces ("founded-by" -> "founded by").
std::vector<std::string> bm25_query(std::string_view entity, Relation relation);

// Site ranks, 1 = most popular.
class PopularityTable {
 public:
  void set(std::string site_domain, long rank);
  // 1 / ln(rank + 1); 0 for unknown domains.
  double score(std::string_view site_domain) const;
  std::size_t size() const { return ranks_.size(); }

 private:
  std::unordered_map<std::string, long> ranks_;
};

PopularityTable load_popularity(const std::filesystem::path& path);

struct Mention {
  text::Span span;
  EntityType type = EntityType::kPerson;
};

// Named-entity mentions per document, from a gold file or from the
// capitalized-run fallback.
class MentionProvider {
 public:
  enum class Mode { kGoldFile, kHeuristic };

  static MentionProvider heuristic() { return MentionProvider(Mode::kHeuristic); }
  static MentionProvider from_file(const std::filesystem::path& path);
  static MentionProvider from_map(std::unordered_map<std::string, std::vector<Mention>> gold);

  Mode mode() const { return mode_; }

  // Throws Error in gold-file mode when the document has no entry.
  std::vector<Mention> mentions(const Document& doc) const;

 private:
  explicit MentionProvider(Mode mode) : mode_(mode) {}

  Mode mode_;
  std::unordered_map<std::string, std::vector<Mention>> gold_;
};

// Maximal runs of tokens starting with an uppercase ASCII letter. Runs with an
// organization cue word ("Inc", "University", ...) are typed ORG, others PER.
std::vector<Mention> capitalized_runs(std::string_view text);

void write_mentions(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::vector<Mention>>>& rows);

std::size_t doc_length(const Document& doc);
std::size_t ner_count(const Document& doc, Relation relation, const MentionProvider& provider);
// Non-overlapping, longest-match, case-insensitive alias occurrences on token
// boundaries.
std::size_t entity_saliency(const Document& doc, const std::vector<std::string>& aliases);
double bm25_score(const Bm25Index& index, const std::vector<std::string>& query,
                  std::string_view doc_id);
double popularity(std::string_view site_domain, const PopularityTable& table);
// Flesch reading ease. Throws Error when the text has no words or sentences.
double flesch(std::string_view text);
inline double flesch(const Document& doc) { return flesch(doc.text); }

struct FeatureConfig {
  const AliasTable* aliases = nullptr;
  const PopularityTable* popularity = nullptr;
  const MentionProvider* mentions = nullptr;
  Bm25Params bm25;
};

// Heuristics for every document of `entity_id`; the BM25 pool is the entity's
// documents.
std::map<std::string, FeatureVector> featurize(const Corpus& corpus, const std::string& entity_id,
                                               Relation relation, const FeatureConfig& config);

// Ranks by score (descending, ties by ascending doc_id) and labels the first
// ceil(n / 2) documents 1.
std::map<std::string, int> heuristic_classifier(const std::map<std::string, double>& scores);

struct FeatureRow {
  std::string doc_id;
  std::string entity_id;
  Relation relation = Relation::kMemberOf;
  FeatureVector features;
};

void write_features(const std::filesystem::path& path, const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> read_features(const std::filesystem::path& path);

}  // namespace covrank
