#include "covrank/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "covrank/error.hpp"
#include "covrank/jsonl.hpp"
#include "covrank/rng.hpp"

namespace covrank {

CoverageRecord compute_coverage(const std::set<std::string>& extracted, const GroundTruth& gt,
                                std::string doc_id) {
  CoverageRecord rec;
  rec.doc_id = std::move(doc_id);
  rec.entity_id = gt.entity_id;
  rec.relation = gt.relation;
  rec.gt_size = gt.objects.size();
  for (const std::string& o : extracted) rec.extracted_hits += gt.objects.count(o);
  if (rec.gt_size == 0) {
    rec.degenerate = true;
    rec.coverage = 0.0;
  } else {
    rec.coverage = static_cast<double>(rec.extracted_hits) / static_cast<double>(rec.gt_size);
  }
  return rec;
}

std::set<std::string> extracted_objects(const Corpus& corpus, const std::string& doc_id,
                                        const std::string& entity_id, Relation relation,
                                        const AliasTable& aliases) {
  const std::string subject = aliases.canonical(entity_id);
  std::set<std::string> out;
  for (const ExtractionTuple& t : corpus.tuples) {
    if (t.doc_id != doc_id || t.relation != relation) continue;
    if (aliases.canonical(t.subject) != subject) continue;
    out.insert(aliases.canonical(t.object));
  }
  return out;
}

namespace {

GroundTruth canonicalized(const GroundTruth& gt, const AliasTable& aliases) {
  GroundTruth out = gt;
  out.objects.clear();
  for (const std::string& o : gt.objects) out.objects.insert(aliases.canonical(o));
  return out;
}

}  // namespace

std::map<std::pair<std::string, Relation>, GroundTruth> resolve_ground_truths(
    const Corpus& corpus, GtVariant variant, const AliasTable& aliases,
    const GroundTruthOptions& options) {
  std::map<std::pair<std::string, Relation>, GroundTruth> out;

  // (entity, relation) pairs with any evidence: a stored set or a tuple about
  // the entity from one of its own documents.
  std::set<std::pair<std::string, Relation>> pairs;
  for (const auto& [key, gt] : corpus.ground_truths) pairs.emplace(key.entity_id, key.relation);
  if (variant != GtVariant::kWiki) {
    for (const ExtractionTuple& t : corpus.tuples) {
      const Document& d = corpus.at(t.doc_id);
      if (aliases.canonical(t.subject) == aliases.canonical(d.entity_id)) {
        pairs.emplace(d.entity_id, t.relation);
      }
    }
  }

  auto web_for = [&](const std::string& e, Relation r) -> std::optional<GroundTruth> {
    if (const GroundTruth* gt = corpus.ground_truth(e, r, GtVariant::kWeb)) {
      return canonicalized(*gt, aliases);
    }
    if (corpus.documents_for(e).empty()) return std::nullopt;
    return build_gt_web(corpus, e, r, aliases, options.web_rule);
  };

  for (const auto& [e, r] : pairs) {
    std::optional<GroundTruth> gt;
    switch (variant) {
      case GtVariant::kWiki:
        if (const GroundTruth* w = corpus.ground_truth(e, r, GtVariant::kWiki)) {
          gt = canonicalized(*w, aliases);
        }
        break;
      case GtVariant::kWeb:
        gt = web_for(e, r);
        break;
      case GtVariant::kWikiWeb:
        if (const GroundTruth* ww = corpus.ground_truth(e, r, GtVariant::kWikiWeb)) {
          gt = canonicalized(*ww, aliases);
          break;
        }
        {
          const GroundTruth* wiki = corpus.ground_truth(e, r, GtVariant::kWiki);
          std::optional<GroundTruth> web = web_for(e, r);
          if (wiki != nullptr && web) {
            gt = merge_gt(canonicalized(*wiki, aliases), *web, options.merge_similarity);
          } else if (wiki != nullptr) {
            gt = canonicalized(*wiki, aliases);
            gt->variant = GtVariant::kWikiWeb;
          } else if (web) {
            gt = *web;
            gt->variant = GtVariant::kWikiWeb;
          }
        }
        break;
    }
    if (gt) out.emplace(std::make_pair(e, r), std::move(*gt));
  }
  return out;
}

std::vector<CoverageRecord> coverage_records(
    const Corpus& corpus, const std::map<std::pair<std::string, Relation>, GroundTruth>& gts,
    const AliasTable& aliases) {
  // Index the tuples once: (doc, relation) -> canonical objects about the
  // document's own entity.
  std::map<std::pair<std::string, Relation>, std::set<std::string>> extracted;
  for (const ExtractionTuple& t : corpus.tuples) {
    const Document& d = corpus.at(t.doc_id);
    if (aliases.canonical(t.subject) != aliases.canonical(d.entity_id)) continue;
    extracted[{t.doc_id, t.relation}].insert(aliases.canonical(t.object));
  }

  static const std::set<std::string> kNone;
  std::vector<CoverageRecord> out;
  for (const Document& d : corpus.documents) {
    for (Relation r : kAllRelations) {
      auto gt = gts.find({d.entity_id, r});
      if (gt == gts.end()) continue;
      auto ex = extracted.find({d.doc_id, r});
      out.push_back(compute_coverage(ex == extracted.end() ? kNone : ex->second, gt->second,
                                     d.doc_id));
    }
  }
  return out;
}

std::vector<LabeledDocument> binarize(const std::vector<CoverageRecord>& records,
                                      const BinarizeOptions& options) {
  if (records.empty()) throw Error("binarize: empty record list");
  for (const CoverageRecord& r : records) {
    if (r.entity_id != records.front().entity_id || r.relation != records.front().relation) {
      throw Error("binarize: records span more than one (entity, relation) group");
    }
  }
  const std::size_t n = records.size();
  std::vector<double> sorted;
  sorted.reserve(n);
  for (const CoverageRecord& r : records) sorted.push_back(r.coverage);
  std::sort(sorted.begin(), sorted.end());

  // The relative rule needs at least one strictly smaller peer; the epsilon
  // keeps ceil() from rounding exact products up.
  const double raw = options.percentile * static_cast<double>(n - 1);
  const auto needed = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw - 1e-9)));

  std::vector<LabeledDocument> out;
  out.reserve(n);
  for (const CoverageRecord& r : records) {
    // Records with strictly smaller coverage; self is never counted.
    const auto below = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), r.coverage) - sorted.begin());
    const bool informative = r.coverage > options.absolute || below >= needed;
    out.push_back({r.doc_id, r.entity_id, r.relation, informative ? 1 : 0, r.coverage});
  }
  return out;
}

std::vector<LabeledDocument> label_all(const std::vector<CoverageRecord>& records,
                                       const BinarizeOptions& options, bool keep_degenerate) {
  std::map<std::pair<std::string, Relation>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].degenerate && !keep_degenerate) continue;
    groups[{records[i].entity_id, records[i].relation}].push_back(i);
  }
  std::vector<std::optional<LabeledDocument>> slots(records.size());
  for (const auto& [key, idx] : groups) {
    std::vector<CoverageRecord> group;
    group.reserve(idx.size());
    for (std::size_t i : idx) group.push_back(records[i]);
    std::vector<LabeledDocument> labeled = binarize(group, options);
    for (std::size_t k = 0; k < idx.size(); ++k) slots[idx[k]] = std::move(labeled[k]);
  }
  std::vector<LabeledDocument> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw Error("unknown split \"" + std::string(name) + "\"");
}

std::string_view to_string(GroupKey k) {
  switch (k) {
    case GroupKey::kEntity:
      return "entity";
    case GroupKey::kSiteDomain:
      return "site_domain";
    case GroupKey::kSubDomain:
      return "sub_domain";
  }
  return "entity";
}

GroupKey parse_group_key(std::string_view name) {
  if (name == "entity") return GroupKey::kEntity;
  if (name == "site_domain") return GroupKey::kSiteDomain;
  if (name == "sub_domain") return GroupKey::kSubDomain;
  throw Error("unknown split key \"" + std::string(name) + "\"");
}

Split SplitAssignment::at(const std::string& doc_id) const {
  auto it = by_doc.find(doc_id);
  if (it == by_doc.end()) throw Error("document \"" + doc_id + "\" has no split assignment");
  return it->second;
}

std::array<std::size_t, 3> split_sizes(std::size_t groups, std::array<double, 3> ratios) {
  double total = 0.0;
  for (double r : ratios) {
    if (r < 0.0) throw Error("split ratios must be nonnegative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("split ratios must sum to 1");
  std::size_t nonzero = 0;
  for (double r : ratios) nonzero += r > 0.0 ? 1 : 0;
  if (groups < nonzero) {
    throw Error("cannot split " + std::to_string(groups) + " groups into " +
                std::to_string(nonzero) + " nonempty splits");
  }

  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = ratios[i] * static_cast<double>(groups);
    sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < groups; k = (k + 1) % 3) {
    ++sizes[order[k]];
    ++assigned;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (ratios[i] > 0.0 && sizes[i] == 0) {
      auto donor = std::max_element(sizes.begin(), sizes.end());
      --*donor;
      ++sizes[i];
    }
  }
  return sizes;
}

SplitAssignment split(const Corpus& corpus, const std::vector<LabeledDocument>& labels,
                      std::array<double, 3> ratios, GroupKey group_key, std::uint64_t seed) {
  std::map<std::string, std::string> key_of_doc;
  for (const LabeledDocument& l : labels) {
    const Document& d = corpus.at(l.doc_id);
    std::string key;
    switch (group_key) {
      case GroupKey::kEntity:
        key = d.entity_id;
        break;
      case GroupKey::kSiteDomain:
        key = d.site_domain;
        break;
      case GroupKey::kSubDomain:
        key = d.sub_domain;
        if (key.empty()) throw Error("document \"" + d.doc_id + "\" has no sub_domain");
        break;
    }
    key_of_doc.emplace(d.doc_id, std::move(key));
  }

  std::set<std::string> distinct;
  for (const auto& [doc, key] : key_of_doc) distinct.insert(key);
  std::vector<std::string> groups(distinct.begin(), distinct.end());
  Rng rng(seed);
  rng.shuffle(groups);

  const std::array<std::size_t, 3> sizes = split_sizes(groups.size(), ratios);
  std::unordered_map<std::string, Split> split_of_group;
  std::size_t g = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t k = 0; k < sizes[s]; ++k) split_of_group[groups[g++]] = static_cast<Split>(s);
  }

  SplitAssignment out;
  out.group_key = group_key;
  out.seed = seed;
  for (const auto& [doc, key] : key_of_doc) out.by_doc[doc] = split_of_group.at(key);
  return out;
}

std::vector<LabeledDocument> undersample(const std::vector<LabeledDocument>& train,
                                         std::uint64_t seed) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < train.size(); ++i) (train[i].label == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) {
    throw Error("undersample: training data has " + std::to_string(pos.size()) + " positive and " +
                std::to_string(neg.size()) + " negative records; both classes are required");
  }
  Rng rng(seed);
  std::vector<std::size_t>& majority = pos.size() > neg.size() ? pos : neg;
  const std::vector<std::size_t>& minority = pos.size() > neg.size() ? neg : pos;
  // Partial Fisher-Yates: the first |minority| slots become the sample.
  for (std::size_t i = 0; i < minority.size(); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(majority.size() - i));
    std::swap(majority[i], majority[j]);
  }
  majority.resize(minority.size());

  std::vector<std::size_t> chosen(minority);
  chosen.insert(chosen.end(), majority.begin(), majority.end());
  std::sort(chosen.begin(), chosen.end());
  rng.shuffle(chosen);

  std::vector<LabeledDocument> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(train[i]);
  return out;
}

void write_labels(const std::filesystem::path& path, const std::vector<LabelRow>& rows) {
  std::ofstream out = jsonl::open_output(path);
  for (const LabelRow& row : rows) {
    jsonl::Json j = {{"doc_id", row.label.doc_id},
                     {"entity_id", row.label.entity_id},
                     {"relation", to_string(row.label.relation)},
                     {"coverage", row.label.coverage},
                     {"label", row.label.label},
                     {"split", to_string(row.split)}};
    out << jsonl::dump(j) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<LabelRow> read_labels(const std::filesystem::path& path) {
  std::vector<LabelRow> rows;
  jsonl::for_each(path, [&](const jsonl::Json& j, std::size_t line) {
    LabelRow row;
    row.label.doc_id = jsonl::get_string(j, "doc_id");
    row.label.entity_id = jsonl::get_string(j, "entity_id");
    try {
      row.label.relation = parse_relation(jsonl::get_string(j, "relation"));
      row.split = parse_split(jsonl::get_string(j, "split"));
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path.string(), line, e.what());
    }
    row.label.coverage = jsonl::get_number(j, "coverage");
    const auto label = jsonl::get_integer(j, "label");
    if (label != 0 && label != 1) throw ParseError(path.string(), line, "label must be 0 or 1");
    row.label.label = static_cast<int>(label);
    rows.push_back(std::move(row));
  });
  return rows;
}

}  // namespace covrank
