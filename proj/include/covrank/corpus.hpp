#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "covrank/text.hpp"

namespace covrank {

enum class Relation {
  kMemberOf,
  kFamily,
  kEduAt,
  kPositionHeld,
  kPartnerOrg,
  kFoundedBy,
  kCeo,
  kBoardMember,
};

inline constexpr std::array<Relation, 8> kAllRelations = {
    Relation::kMemberOf,   Relation::kFamily,    Relation::kEduAt, Relation::kPositionHeld,
    Relation::kPartnerOrg, Relation::kFoundedBy, Relation::kCeo,   Relation::kBoardMember,
};

enum class EntityType { kPerson, kOrganization };

std::string_view to_string(Relation r);
// Throws Error for names outside the closed vocabulary.
Relation parse_relation(std::string_view name);
std::optional<Relation> try_parse_relation(std::string_view name);

// Type of the objects a relation points to ("family" -> persons).
EntityType target_type(Relation r);
// Type of the subject entity.
EntityType subject_type(Relation r);

enum class GtVariant { kWiki, kWeb, kWikiWeb };

std::string_view to_string(GtVariant v);
GtVariant parse_variant(std::string_view name);

struct Document {
  std::string doc_id;
  std::string entity_id;
  std::string url;
  std::string site_domain;
  // Entity category ("politician", "automobile", ...). Optional in the file.
  std::string sub_domain;
  std::string text;
  std::size_t word_count = 0;

  friend bool operator==(const Document&, const Document&) = default;
};

Document make_document(std::string doc_id, std::string entity_id, std::string url,
                       std::string site_domain, std::string text, std::string sub_domain = {});

struct ExtractionTuple {
  std::string doc_id;
  std::string subject;
  Relation relation = Relation::kMemberOf;
  std::string object;
  double confidence = 1.0;

  friend bool operator==(const ExtractionTuple&, const ExtractionTuple&) = default;
};

// Surface form -> canonical identifier. Lookups are case-folded and
// whitespace-collapsed; unknown forms canonicalize to that normalized text.
class AliasTable {
 public:
  // Registers `canonical` (as its own alias) and `aliases`. Throws Error when a
  // surface form is already bound to a different canonical identifier.
  void add(const std::string& canonical, const std::vector<std::string>& aliases);

  std::string canonical(std::string_view surface) const;

  // Canonical form plus every registered alias; {canonical(e)} when unknown.
  std::vector<std::string> aliases_of(std::string_view entity) const;

  bool empty() const { return by_surface_.empty(); }

 private:
  std::unordered_map<std::string, std::string> by_surface_;
  std::map<std::string, std::vector<std::string>> by_canonical_;
};

AliasTable load_aliases(const std::filesystem::path& path);

struct GroundTruth {
  std::string entity_id;
  Relation relation = Relation::kMemberOf;
  GtVariant variant = GtVariant::kWiki;
  std::set<std::string> objects;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct GtKey {
  std::string entity_id;
  Relation relation;
  GtVariant variant;

  friend auto operator<=>(const GtKey&, const GtKey&) = default;
};

class Corpus {
 public:
  std::vector<Document> documents;
  std::vector<ExtractionTuple> tuples;
  std::map<GtKey, GroundTruth> ground_truths;

  // Rebuilds the doc_id index and validates the invariants. Throws Error on
  // duplicate doc_ids or tuples referencing unknown documents.
  void reindex();

  const Document* find(std::string_view doc_id) const;
  const Document& at(std::string_view doc_id) const;

  // Document indices for `entity_id`, in corpus order.
  std::vector<std::size_t> documents_for(std::string_view entity_id) const;

  // Distinct entity ids in first-appearance order.
  std::vector<std::string> entities() const;

  const GroundTruth* ground_truth(const std::string& entity_id, Relation r, GtVariant v) const;

 private:
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Empty paths are skipped, leaving that part of the corpus empty.
Corpus load_corpus(const std::filesystem::path& documents_path,
                   const std::filesystem::path& tuples_path,
                   const std::filesystem::path& gt_path);

void save_documents(const Corpus& corpus, const std::filesystem::path& path);
void save_tuples(const Corpus& corpus, const std::filesystem::path& path);
void save_ground_truths(const Corpus& corpus, const std::filesystem::path& path);

// Canonicalizes subject and object and collapses rows that agree on
// (doc_id, subject, relation, object), keeping the highest confidence.
// Output preserves first-occurrence order.
std::vector<ExtractionTuple> dedup_tuples(const std::vector<ExtractionTuple>& tuples,
                                          const AliasTable& aliases);

// Frequency filter for web-aggregated ground truth. An object is kept when it
// occurs in at least `min_doc_fraction` of the entity's documents, or when its
// document frequency is at least the top object's frequency / `top_ratio`.
struct GtWebRule {
  double min_doc_fraction = 0.05;
  double top_ratio = 5.0;
};

GroundTruth build_gt_web(const Corpus& corpus, const std::string& entity_id, Relation relation,
                         const AliasTable& aliases = {}, const GtWebRule& rule = {});

// Union that identifies two objects when their normalized phrases are equal or
// their token sets (case-folded, punctuation stripped) have Jaccard similarity
// >= `similarity_threshold`. Each cluster keeps its lexicographically smallest
// member.
GroundTruth merge_gt(const GroundTruth& a, const GroundTruth& b, double similarity_threshold = 0.5);

// Token-set Jaccard used by merge_gt.
double token_jaccard(std::string_view a, std::string_view b);

// Replaces entity spans with "[ENT]" and number spans with "[NUM]". Spans
// nested inside a longer span are dropped (longest match wins; an entity span
// wins over an identical number span). Throws Error on out-of-range spans or
// partial overlaps.
std::string mask_text(std::string_view text, const std::vector<text::Span>& entity_spans,
                      const std::vector<text::Span>& number_spans);

}  // namespace covrank
