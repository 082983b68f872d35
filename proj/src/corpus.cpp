#include "covrank/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "covrank/error.hpp"
#include "covrank/jsonl.hpp"

namespace covrank {
namespace {

using jsonl::Json;

constexpr std::array<std::string_view, 8> kRelationNames = {
    "member-of", "family", "edu-at", "position-held",
    "partner-org", "founded-by", "ceo", "board-member",
};

std::vector<std::string> string_array(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array()) {
    throw IoError(std::string("field \"") + key + "\" must be an array of strings");
  }
  std::vector<std::string> out;
  for (const Json& v : *it) {
    if (!v.is_string()) {
      throw IoError(std::string("field \"") + key + "\" must be an array of strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::set<std::string> token_set(std::string_view phrase) {
  std::set<std::string> out;
  for (std::string& t : text::folded_tokens(phrase)) {
    // Drop internal punctuation as well so "Management," == "Management".
    std::string cleaned;
    for (char c : t) {
      const auto u = static_cast<unsigned char>(c);
      if (u >= 0x80 || std::isalnum(u)) cleaned.push_back(c);
    }
    if (!cleaned.empty()) out.insert(std::move(cleaned));
  }
  return out;
}

}  // namespace

std::string_view to_string(Relation r) { return kRelationNames[static_cast<std::size_t>(r)]; }

std::optional<Relation> try_parse_relation(std::string_view name) {
  for (std::size_t i = 0; i < kRelationNames.size(); ++i) {
    if (kRelationNames[i] == name) return static_cast<Relation>(i);
  }
  return std::nullopt;
}

Relation parse_relation(std::string_view name) {
  if (auto r = try_parse_relation(name)) return *r;
  throw Error("unknown relation \"" + std::string(name) + "\"");
}

EntityType target_type(Relation r) {
  switch (r) {
    case Relation::kMemberOf:
    case Relation::kEduAt:
    case Relation::kPartnerOrg:
      return EntityType::kOrganization;
    default:
      return EntityType::kPerson;
  }
}

EntityType subject_type(Relation r) {
  switch (r) {
    case Relation::kMemberOf:
    case Relation::kFamily:
    case Relation::kEduAt:
    case Relation::kPositionHeld:
      return EntityType::kPerson;
    default:
      return EntityType::kOrganization;
  }
}

std::string_view to_string(GtVariant v) {
  switch (v) {
    case GtVariant::kWiki:
      return "wiki";
    case GtVariant::kWeb:
      return "web";
    case GtVariant::kWikiWeb:
      return "wikiweb";
  }
  return "wiki";
}

GtVariant parse_variant(std::string_view name) {
  if (name == "wiki") return GtVariant::kWiki;
  if (name == "web") return GtVariant::kWeb;
  if (name == "wikiweb") return GtVariant::kWikiWeb;
  throw Error("unknown ground-truth variant \"" + std::string(name) + "\"");
}

Document make_document(std::string doc_id, std::string entity_id, std::string url,
                       std::string site_domain, std::string text, std::string sub_domain) {
  Document d;
  d.doc_id = std::move(doc_id);
  d.entity_id = std::move(entity_id);
  d.url = std::move(url);
  d.site_domain = std::move(site_domain);
  d.sub_domain = std::move(sub_domain);
  d.text = std::move(text);
  d.word_count = text::word_count(d.text);
  return d;
}

// ---------------------------------------------------------------------------
// AliasTable

void AliasTable::add(const std::string& canonical, const std::vector<std::string>& aliases) {
  auto bind = [&](const std::string& surface) {
    std::string key = text::normalize_phrase(surface);
    auto [it, inserted] = by_surface_.emplace(key, canonical);
    if (!inserted && it->second != canonical) {
      throw Error("alias \"" + surface + "\" maps to both \"" + it->second + "\" and \"" +
                  canonical + "\"");
    }
  };
  bind(canonical);
  auto& list = by_canonical_[canonical];
  for (const std::string& a : aliases) {
    bind(a);
    if (std::find(list.begin(), list.end(), a) == list.end()) list.push_back(a);
  }
}

std::string AliasTable::canonical(std::string_view surface) const {
  std::string key = text::normalize_phrase(surface);
  auto it = by_surface_.find(key);
  return it == by_surface_.end() ? key : it->second;
}

std::vector<std::string> AliasTable::aliases_of(std::string_view entity) const {
  const std::string canon = canonical(entity);
  std::vector<std::string> out{canon};
  auto it = by_canonical_.find(canon);
  if (it != by_canonical_.end()) {
    for (const std::string& a : it->second) {
      if (a != canon) out.push_back(a);
    }
  }
  return out;
}

AliasTable load_aliases(const std::filesystem::path& path) {
  AliasTable table;
  jsonl::for_each(path, [&](const Json& j, std::size_t line) {
    try {
      table.add(jsonl::get_string(j, "canonical"), string_array(j, "aliases"));
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path.string(), line, e.what());
    }
  });
  return table;
}

// ---------------------------------------------------------------------------
// Corpus

void Corpus::reindex() {
  by_id_.clear();
  by_id_.reserve(documents.size());
  for (std::size_t i = 0; i < documents.size(); ++i) {
    auto [it, inserted] = by_id_.emplace(documents[i].doc_id, i);
    if (!inserted) throw Error("duplicate doc_id \"" + documents[i].doc_id + "\"");
  }
  for (const ExtractionTuple& t : tuples) {
    if (!by_id_.contains(t.doc_id)) {
      throw Error("tuple references unknown doc_id \"" + t.doc_id + "\"");
    }
  }
}

const Document* Corpus::find(std::string_view doc_id) const {
  auto it = by_id_.find(std::string(doc_id));
  return it == by_id_.end() ? nullptr : &documents[it->second];
}

const Document& Corpus::at(std::string_view doc_id) const {
  const Document* d = find(doc_id);
  if (d == nullptr) throw Error("unknown doc_id \"" + std::string(doc_id) + "\"");
  return *d;
}

std::vector<std::size_t> Corpus::documents_for(std::string_view entity_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (documents[i].entity_id == entity_id) out.push_back(i);
  }
  return out;
}

std::vector<std::string> Corpus::entities() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const Document& d : documents) {
    if (seen.insert(d.entity_id).second) out.push_back(d.entity_id);
  }
  return out;
}

const GroundTruth* Corpus::ground_truth(const std::string& entity_id, Relation r,
                                        GtVariant v) const {
  auto it = ground_truths.find(GtKey{entity_id, r, v});
  return it == ground_truths.end() ? nullptr : &it->second;
}

Corpus load_corpus(const std::filesystem::path& documents_path,
                   const std::filesystem::path& tuples_path,
                   const std::filesystem::path& gt_path) {
  Corpus corpus;
  std::unordered_map<std::string, std::size_t> seen;
  jsonl::for_each(documents_path, [&](const Json& j, std::size_t line) {
    std::string sub_domain;
    if (auto it = j.find("sub_domain"); it != j.end() && it->is_string()) {
      sub_domain = it->get<std::string>();
    }
    Document d = make_document(jsonl::get_string(j, "doc_id"), jsonl::get_string(j, "entity_id"),
                               jsonl::get_string(j, "url"), jsonl::get_string(j, "site_domain"),
                               jsonl::get_string(j, "text"), std::move(sub_domain));
    auto [it, inserted] = seen.emplace(d.doc_id, line);
    if (!inserted) {
      throw ParseError(documents_path.string(), line,
                       "duplicate doc_id \"" + d.doc_id + "\" (first seen on line " +
                           std::to_string(it->second) + ")");
    }
    corpus.documents.push_back(std::move(d));
  });

  if (!tuples_path.empty()) {
    jsonl::for_each(tuples_path, [&](const Json& j, std::size_t line) {
      ExtractionTuple t;
      t.doc_id = jsonl::get_string(j, "doc_id");
      t.subject = jsonl::get_string(j, "subject");
      const std::string rel = jsonl::get_string(j, "relation");
      auto r = try_parse_relation(rel);
      if (!r) throw ParseError(tuples_path.string(), line, "unknown relation \"" + rel + "\"");
      t.relation = *r;
      t.object = jsonl::get_string(j, "object");
      if (j.contains("confidence")) t.confidence = jsonl::get_number(j, "confidence");
      if (t.confidence < 0.0 || t.confidence > 1.0) {
        throw ParseError(tuples_path.string(), line, "confidence outside [0, 1]");
      }
      if (!seen.contains(t.doc_id)) {
        throw ParseError(tuples_path.string(), line,
                         "dangling reference to unknown doc_id \"" + t.doc_id + "\"");
      }
      if (text::normalize_phrase(t.subject).empty() || text::normalize_phrase(t.object).empty()) {
        throw ParseError(tuples_path.string(), line, "empty subject or object");
      }
      corpus.tuples.push_back(std::move(t));
    });
  }

  if (!gt_path.empty()) {
    jsonl::for_each(gt_path, [&](const Json& j, std::size_t line) {
      GroundTruth gt;
      gt.entity_id = jsonl::get_string(j, "entity_id");
      const std::string rel = jsonl::get_string(j, "relation");
      auto r = try_parse_relation(rel);
      if (!r) throw ParseError(gt_path.string(), line, "unknown relation \"" + rel + "\"");
      gt.relation = *r;
      const std::string variant = jsonl::get_string(j, "variant");
      if (variant != "wiki" && variant != "web" && variant != "wikiweb") {
        throw ParseError(gt_path.string(), line, "unknown variant \"" + variant + "\"");
      }
      gt.variant = parse_variant(variant);
      for (std::string& o : string_array(j, "objects")) gt.objects.insert(std::move(o));
      GtKey key{gt.entity_id, gt.relation, gt.variant};
      if (!corpus.ground_truths.emplace(key, std::move(gt)).second) {
        throw ParseError(gt_path.string(), line, "duplicate ground truth for (" + key.entity_id +
                                                     ", " + rel + ", " + variant + ")");
      }
    });
  }

  corpus.reindex();
  return corpus;
}

void save_documents(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out = jsonl::open_output(path);
  for (const Document& d : corpus.documents) {
    Json j = {{"doc_id", d.doc_id},
              {"entity_id", d.entity_id},
              {"url", d.url},
              {"site_domain", d.site_domain}};
    if (!d.sub_domain.empty()) j["sub_domain"] = d.sub_domain;
    j["text"] = d.text;
    out << jsonl::dump(j) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void save_tuples(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out = jsonl::open_output(path);
  for (const ExtractionTuple& t : corpus.tuples) {
    Json j = {{"doc_id", t.doc_id},
              {"subject", t.subject},
              {"relation", to_string(t.relation)},
              {"object", t.object},
              {"confidence", t.confidence}};
    out << jsonl::dump(j) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void save_ground_truths(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out = jsonl::open_output(path);
  for (const auto& [key, gt] : corpus.ground_truths) {
    Json objects = Json::array();
    for (const std::string& o : gt.objects) objects.push_back(o);
    Json j = {{"entity_id", gt.entity_id},
              {"relation", to_string(gt.relation)},
              {"variant", to_string(gt.variant)},
              {"objects", objects}};
    out << jsonl::dump(j) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Ground-truth construction

std::vector<ExtractionTuple> dedup_tuples(const std::vector<ExtractionTuple>& tuples,
                                          const AliasTable& aliases) {
  struct Key {
    std::string doc_id, subject, object;
    Relation relation;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::hash<std::string> h;
      std::size_t seed = h(k.doc_id);
      seed ^= h(k.subject) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
      seed ^= h(k.object) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
      seed ^= static_cast<std::size_t>(k.relation) + (seed << 6) + (seed >> 2);
      return seed;
    }
  };

  std::vector<ExtractionTuple> out;
  std::unordered_map<Key, std::size_t, KeyHash> index;
  for (const ExtractionTuple& t : tuples) {
    ExtractionTuple c = t;
    c.subject = aliases.canonical(t.subject);
    c.object = aliases.canonical(t.object);
    Key key{c.doc_id, c.subject, c.object, c.relation};
    auto [it, inserted] = index.emplace(std::move(key), out.size());
    if (inserted) {
      out.push_back(std::move(c));
    } else {
      out[it->second].confidence = std::max(out[it->second].confidence, c.confidence);
    }
  }
  return out;
}

GroundTruth build_gt_web(const Corpus& corpus, const std::string& entity_id, Relation relation,
                         const AliasTable& aliases, const GtWebRule& rule) {
  const std::vector<std::size_t> docs = corpus.documents_for(entity_id);
  if (docs.empty()) throw Error("no documents for entity \"" + entity_id + "\"");

  std::unordered_set<std::string> doc_ids;
  for (std::size_t i : docs) doc_ids.insert(corpus.documents[i].doc_id);

  const std::string subject = aliases.canonical(entity_id);
  std::map<std::string, std::set<std::string>> docs_by_object;
  for (const ExtractionTuple& t : corpus.tuples) {
    if (t.relation != relation || !doc_ids.contains(t.doc_id)) continue;
    if (aliases.canonical(t.subject) != subject) continue;
    docs_by_object[aliases.canonical(t.object)].insert(t.doc_id);
  }

  std::size_t top = 0;
  for (const auto& [object, ds] : docs_by_object) top = std::max(top, ds.size());

  // Small slack so that e.g. 5 of 100 documents meets a 5% rule despite 0.05
  // not being exactly representable.
  constexpr double kSlack = 1e-9;
  const double by_fraction = rule.min_doc_fraction * static_cast<double>(docs.size());
  const double by_top = static_cast<double>(top) / rule.top_ratio;

  GroundTruth gt;
  gt.entity_id = entity_id;
  gt.relation = relation;
  gt.variant = GtVariant::kWeb;
  for (const auto& [object, ds] : docs_by_object) {
    const double df = static_cast<double>(ds.size());
    if (df + kSlack >= by_fraction || df + kSlack >= by_top) gt.objects.insert(object);
  }
  return gt;
}

double token_jaccard(std::string_view a, std::string_view b) {
  const std::set<std::string> sa = token_set(a);
  const std::set<std::string> sb = token_set(b);
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (const std::string& t : sa) common += sb.count(t);
  return static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
}

GroundTruth merge_gt(const GroundTruth& a, const GroundTruth& b, double similarity_threshold) {
  if (a.entity_id != b.entity_id || a.relation != b.relation) {
    throw Error("merge_gt: ground truths disagree on (entity, relation): (" + a.entity_id + ", " +
                std::string(to_string(a.relation)) + ") vs (" + b.entity_id + ", " +
                std::string(to_string(b.relation)) + ")");
  }
  std::vector<std::string> items(a.objects.begin(), a.objects.end());
  for (const std::string& o : b.objects) {
    if (!a.objects.contains(o)) items.push_back(o);
  }
  std::sort(items.begin(), items.end());

  std::vector<std::size_t> parent(items.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };

  std::vector<std::string> normalized;
  normalized.reserve(items.size());
  for (const std::string& s : items) normalized.push_back(text::normalize_phrase(s));

  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      const bool same = normalized[i] == normalized[j] ||
                        token_jaccard(items[i], items[j]) >= similarity_threshold;
      if (!same) continue;
      const std::size_t ri = root(i);
      const std::size_t rj = root(j);
      // Items are sorted, so the smaller index is the smaller string.
      if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
    }
  }

  GroundTruth merged;
  merged.entity_id = a.entity_id;
  merged.relation = a.relation;
  merged.variant = GtVariant::kWikiWeb;
  for (std::size_t i = 0; i < items.size(); ++i) merged.objects.insert(items[root(i)]);
  return merged;
}

// ---------------------------------------------------------------------------
// Masking

std::string mask_text(std::string_view text, const std::vector<text::Span>& entity_spans,
                      const std::vector<text::Span>& number_spans) {
  struct Tagged {
    text::Span span;
    bool entity;
  };
  std::vector<Tagged> spans;
  for (const text::Span& s : entity_spans) spans.push_back({s, true});
  for (const text::Span& s : number_spans) spans.push_back({s, false});
  for (const Tagged& t : spans) {
    if (t.span.begin >= t.span.end || t.span.end > text.size()) {
      throw Error("mask span [" + std::to_string(t.span.begin) + ", " +
                  std::to_string(t.span.end) + ") out of bounds for text of length " +
                  std::to_string(text.size()));
    }
  }
  // Longest first, then entities before numbers, so containment drops the
  // shorter span.
  std::sort(spans.begin(), spans.end(), [](const Tagged& x, const Tagged& y) {
    if (x.span.size() != y.span.size()) return x.span.size() > y.span.size();
    if (x.entity != y.entity) return x.entity;
    return x.span.begin < y.span.begin;
  });
  std::vector<Tagged> kept;
  for (const Tagged& t : spans) {
    bool contained = false;
    for (const Tagged& k : kept) {
      const bool inside = t.span.begin >= k.span.begin && t.span.end <= k.span.end;
      const bool disjoint = t.span.end <= k.span.begin || t.span.begin >= k.span.end;
      if (inside) {
        contained = true;
        break;
      }
      if (!disjoint) {
        throw Error("mask spans [" + std::to_string(t.span.begin) + ", " +
                    std::to_string(t.span.end) + ") and [" + std::to_string(k.span.begin) + ", " +
                    std::to_string(k.span.end) + ") overlap");
      }
    }
    if (!contained) kept.push_back(t);
  }
  std::sort(kept.begin(), kept.end(),
            [](const Tagged& x, const Tagged& y) { return x.span.begin < y.span.begin; });

  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  for (const Tagged& k : kept) {
    out.append(text.substr(pos, k.span.begin - pos));
    out.append(k.entity ? text::kEntityMask : text::kNumberMask);
    pos = k.span.end;
  }
  out.append(text.substr(pos));
  return out;
}

}  // namespace covrank
