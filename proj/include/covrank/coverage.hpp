#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "covrank/corpus.hpp"

namespace covrank {

struct CoverageRecord {
  std::string doc_id;
  std::string entity_id;
  Relation relation = Relation::kMemberOf;
  double coverage = 0.0;
  std::size_t gt_size = 0;
  std::size_t extracted_hits = 0;
  // Set when the ground truth is empty; coverage is then 0.
  bool degenerate = false;
};

// |extracted ∩ gt| / |gt|. Both sets must use the same canonical forms.
CoverageRecord compute_coverage(const std::set<std::string>& extracted, const GroundTruth& gt,
                                std::string doc_id = {});

// Canonical objects extracted from `doc_id` for (entity, relation). Tuples
// about other subjects are ignored.
std::set<std::string> extracted_objects(const Corpus& corpus, const std::string& doc_id,
                                        const std::string& entity_id, Relation relation,
                                        const AliasTable& aliases);

struct GroundTruthOptions {
  GtWebRule web_rule;
  double merge_similarity = 0.5;
};

// Ground truth of `variant` for every (entity, relation) the corpus can
// support. Sets present in the corpus are used as-is; a missing web set is
// built from the tuples, and a missing wikiweb set is merged from wiki + web.
// Objects are canonicalized with `aliases`.
std::map<std::pair<std::string, Relation>, GroundTruth> resolve_ground_truths(
    const Corpus& corpus, GtVariant variant, const AliasTable& aliases,
    const GroundTruthOptions& options = {});

// One record per (document, relation) for which the document's entity has
// ground truth, in corpus order then relation order.
std::vector<CoverageRecord> coverage_records(
    const Corpus& corpus, const std::map<std::pair<std::string, Relation>, GroundTruth>& gts,
    const AliasTable& aliases);

struct LabeledDocument {
  std::string doc_id;
  std::string entity_id;
  Relation relation = Relation::kMemberOf;
  int label = 0;  // 1 = informative
  double coverage = 0.0;

  friend bool operator==(const LabeledDocument&, const LabeledDocument&) = default;
};

struct BinarizeOptions {
  double percentile = 0.85;
  double absolute = 0.5;
};

// Labels one (entity, relation) group: informative iff coverage > absolute, or
// coverage is strictly greater than that of at least
// max(1, ceil(percentile * (n - 1))) of the other records. Output order follows
// input order. Throws Error when `records` is empty or mixes groups.
std::vector<LabeledDocument> binarize(const std::vector<CoverageRecord>& records,
                                      const BinarizeOptions& options = {});

// Groups records by (entity, relation), drops degenerate ones unless asked,
// and binarizes each group. Output keeps the input order.
std::vector<LabeledDocument> label_all(const std::vector<CoverageRecord>& records,
                                       const BinarizeOptions& options = {},
                                       bool keep_degenerate = false);

enum class Split { kTrain, kValidation, kTest };
enum class GroupKey { kEntity, kSiteDomain, kSubDomain };

std::string_view to_string(Split s);
Split parse_split(std::string_view name);
std::string_view to_string(GroupKey k);
GroupKey parse_group_key(std::string_view name);

struct SplitAssignment {
  std::map<std::string, Split> by_doc;
  GroupKey group_key = GroupKey::kEntity;
  std::uint64_t seed = 0;

  Split at(const std::string& doc_id) const;
};

// Shuffles the distinct group-key values of the labeled documents with a seeded
// generator and cuts them into splits sized by largest-remainder rounding of
// `ratios`. Every split with a nonzero ratio receives at least one group.
SplitAssignment split(const Corpus& corpus, const std::vector<LabeledDocument>& labels,
                      std::array<double, 3> ratios, GroupKey group_key, std::uint64_t seed);

// Group counts per split; exposed for tests.
std::array<std::size_t, 3> split_sizes(std::size_t groups, std::array<double, 3> ratios);

// Keeps the minority class and a seeded uniform sample of the majority class of
// the same size, then shuffles. Throws Error when a class is empty.
std::vector<LabeledDocument> undersample(const std::vector<LabeledDocument>& train,
                                         std::uint64_t seed);

struct LabelRow {
  LabeledDocument label;
  Split split = Split::kTrain;
};

void write_labels(const std::filesystem::path& path, const std::vector<LabelRow>& rows);
std::vector<LabelRow> read_labels(const std::filesystem::path& path);

}  // namespace covrank
