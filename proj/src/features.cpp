#include "covrank/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "covrank/error.hpp"
#include "covrank/jsonl.hpp"

namespace covrank {

std::size_t feature_index(std::string_view name) {
  for (std::size_t i = 0; i < FeatureVector::kSize; ++i) {
    if (FeatureVector::kNames[i] == name) return i;
  }
  throw Error("unknown heuristic \"" + std::string(name) + "\"");
}

// ---------------------------------------------------------------------------
// BM25

Bm25Index::Bm25Index(const std::vector<std::pair<std::string, std::string>>& documents,
                     Bm25Params params)
    : params_(params) {
  std::size_t total = 0;
  for (const auto& [doc_id, body] : documents) {
    if (!slot_.emplace(doc_id, lengths_.size()).second) {
      throw Error("duplicate doc_id \"" + doc_id + "\" in BM25 pool");
    }
    std::unordered_map<std::string, std::size_t> counts;
    const std::vector<std::string> tokens = text::folded_tokens(body);
    for (const std::string& t : tokens) ++counts[t];
    for (const auto& [term, c] : counts) ++df_[term];
    lengths_.push_back(tokens.size());
    total += tokens.size();
    tf_.push_back(std::move(counts));
  }
  avgdl_ = lengths_.empty() ? 0.0
                            : static_cast<double>(total) / static_cast<double>(lengths_.size());
}

std::size_t Bm25Index::document_frequency(const std::string& term) const {
  auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

double Bm25Index::idf(const std::string& term) const {
  const double n = static_cast<double>(lengths_.size());
  const double df = static_cast<double>(document_frequency(term));
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::score(const std::vector<std::string>& query, std::string_view doc_id) const {
  auto it = slot_.find(std::string(doc_id));
  if (it == slot_.end()) throw Error("doc_id \"" + std::string(doc_id) + "\" is not indexed");
  const std::size_t slot = it->second;
  const auto& counts = tf_[slot];
  // An all-empty pool has avgdl 0; every tf is 0 then and the score is 0.
  const double norm = avgdl_ > 0.0 ? static_cast<double>(lengths_[slot]) / avgdl_ : 0.0;
  const double k1 = params_.k1;
  const double b = params_.b;
  double total = 0.0;
  for (const std::string& raw : query) {
    const std::string term = text::fold(raw);
    auto c = counts.find(term);
    if (c == counts.end()) continue;
    const double tf = static_cast<double>(c->second);
    total += idf(term) * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm));
  }
  return total;
}

std::vector<std::string> bm25_query(std::string_view entity, Relation relation) {
  std::string rel(to_string(relation));
  std::replace(rel.begin(), rel.end(), '-', ' ');
  std::vector<std::string> q = text::folded_tokens(entity);
  for (std::string& t : text::folded_tokens(rel)) q.push_back(std::move(t));
  return q;
}

double bm25_score(const Bm25Index& index, const std::vector<std::string>& query,
                  std::string_view doc_id) {
  return index.score(query, doc_id);
}

// ---------------------------------------------------------------------------
// Popularity

void PopularityTable::set(std::string site_domain, long rank) {
  if (rank < 1) throw Error("popularity rank must be >= 1 for \"" + site_domain + "\"");
  ranks_[std::move(site_domain)] = rank;
}

double PopularityTable::score(std::string_view site_domain) const {
  auto it = ranks_.find(std::string(site_domain));
  if (it == ranks_.end()) return 0.0;
  return 1.0 / std::log(static_cast<double>(it->second) + 1.0);
}

double popularity(std::string_view site_domain, const PopularityTable& table) {
  return table.score(site_domain);
}

PopularityTable load_popularity(const std::filesystem::path& path) {
  std::ifstream in = jsonl::open_input(path);
  PopularityTable table;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path.string(), number, "expected domain<TAB>rank");
    const std::string domain = line.substr(0, tab);
    long rank = 0;
    try {
      std::size_t used = 0;
      rank = std::stol(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError(path.string(), number, "rank is not an integer");
    }
    if (rank < 1) throw ParseError(path.string(), number, "rank must be >= 1");
    table.set(domain, rank);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Mentions

namespace {

const std::unordered_set<std::string>& org_cues() {
  static const std::unordered_set<std::string> cues = {
      "inc",     "corp",       "corporation", "company", "co",      "ltd",     "llc",
      "plc",     "group",      "holdings",    "bank",    "university", "college", "institute",
      "school",  "academy",    "foundation",  "association", "party", "club",    "council",
      "agency",  "motors",     "records",     "systems", "labs",    "partners", "ag",
  };
  return cues;
}

bool starts_upper(std::string_view token) {
  return !token.empty() && token.front() >= 'A' && token.front() <= 'Z';
}

}  // namespace

std::vector<Mention> capitalized_runs(std::string_view body) {
  std::vector<Mention> out;
  const std::vector<text::Span> spans = text::token_spans(body);
  std::size_t i = 0;
  while (i < spans.size()) {
    if (!starts_upper(body.substr(spans[i].begin, spans[i].size()))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool org = false;
    // A run stops after a token that ends a sentence or clause.
    while (j < spans.size() && starts_upper(body.substr(spans[j].begin, spans[j].size()))) {
      org = org || org_cues().contains(text::fold(body.substr(spans[j].begin, spans[j].size())));
      const std::size_t end = spans[j].end;
      ++j;
      if (end < body.size() && !std::isspace(static_cast<unsigned char>(body[end]))) break;
    }
    out.push_back({{spans[i].begin, spans[j - 1].end},
                   org ? EntityType::kOrganization : EntityType::kPerson});
    i = j;
  }
  return out;
}

MentionProvider MentionProvider::from_map(std::unordered_map<std::string, std::vector<Mention>> gold) {
  MentionProvider p(Mode::kGoldFile);
  p.gold_ = std::move(gold);
  return p;
}

MentionProvider MentionProvider::from_file(const std::filesystem::path& path) {
  std::unordered_map<std::string, std::vector<Mention>> gold;
  jsonl::for_each(path, [&](const jsonl::Json& j, std::size_t line) {
    const std::string doc_id = jsonl::get_string(j, "doc_id");
    auto it = j.find("mentions");
    if (it == j.end() || !it->is_array()) {
      throw ParseError(path.string(), line, "field \"mentions\" must be an array");
    }
    std::vector<Mention> mentions;
    for (const jsonl::Json& m : *it) {
      const auto start = jsonl::get_integer(m, "start");
      const auto end = jsonl::get_integer(m, "end");
      const std::string type = jsonl::get_string(m, "type");
      if (start < 0 || end <= start) throw ParseError(path.string(), line, "invalid mention span");
      if (type != "PER" && type != "ORG") {
        throw ParseError(path.string(), line, "mention type must be PER or ORG");
      }
      mentions.push_back({{static_cast<std::size_t>(start), static_cast<std::size_t>(end)},
                          type == "PER" ? EntityType::kPerson : EntityType::kOrganization});
    }
    if (!gold.emplace(doc_id, std::move(mentions)).second) {
      throw ParseError(path.string(), line, "duplicate doc_id \"" + doc_id + "\"");
    }
  });
  return from_map(std::move(gold));
}

std::vector<Mention> MentionProvider::mentions(const Document& doc) const {
  if (mode_ == Mode::kHeuristic) return capitalized_runs(doc.text);
  auto it = gold_.find(doc.doc_id);
  if (it == gold_.end()) throw Error("no gold mentions for doc_id \"" + doc.doc_id + "\"");
  for (const Mention& m : it->second) {
    if (m.span.end > doc.text.size()) {
      throw Error("mention span out of bounds in doc_id \"" + doc.doc_id + "\"");
    }
  }
  return it->second;
}

void write_mentions(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::vector<Mention>>>& rows) {
  std::ofstream out = jsonl::open_output(path);
  for (const auto& [doc_id, mentions] : rows) {
    jsonl::Json list = jsonl::Json::array();
    for (const Mention& m : mentions) {
      list.push_back({{"start", m.span.begin},
                      {"end", m.span.end},
                      {"type", m.type == EntityType::kPerson ? "PER" : "ORG"}});
    }
    out << jsonl::dump({{"doc_id", doc_id}, {"mentions", list}}) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Heuristics

std::size_t doc_length(const Document& doc) { return text::word_count(doc.text); }

std::size_t ner_count(const Document& doc, Relation relation, const MentionProvider& provider) {
  const EntityType wanted = target_type(relation);
  std::size_t n = 0;
  for (const Mention& m : provider.mentions(doc)) n += m.type == wanted ? 1 : 0;
  return n;
}

std::size_t entity_saliency(const Document& doc, const std::vector<std::string>& aliases) {
  std::vector<std::vector<std::string>> patterns;
  for (const std::string& a : aliases) {
    std::vector<std::string> p = text::folded_tokens(a);
    if (!p.empty()) patterns.push_back(std::move(p));
  }
  std::sort(patterns.begin(), patterns.end(),
            [](const auto& x, const auto& y) { return x.size() > y.size(); });

  const std::vector<std::string> tokens = text::folded_tokens(doc.text);
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t matched = 0;
    for (const auto& p : patterns) {
      if (i + p.size() <= tokens.size() && std::equal(p.begin(), p.end(), tokens.begin() + i)) {
        matched = p.size();
        break;
      }
    }
    if (matched > 0) {
      ++count;
      i += matched;
    } else {
      ++i;
    }
  }
  return count;
}

double flesch(std::string_view body) {
  const std::vector<std::string> words = text::tokenize(body);
  const std::size_t sentences = text::split_sentences(body).size();
  if (words.empty() || sentences == 0) {
    throw Error("flesch: text needs at least one word and one sentence");
  }
  double syllables = 0.0;
  for (const std::string& w : words) syllables += text::count_syllables(w);
  const double n_words = static_cast<double>(words.size());
  return 206.835 - 1.015 * (n_words / static_cast<double>(sentences)) -
         84.6 * (syllables / n_words);
}

std::map<std::string, FeatureVector> featurize(const Corpus& corpus, const std::string& entity_id,
                                               Relation relation, const FeatureConfig& config) {
  const std::vector<std::size_t> pool = corpus.documents_for(entity_id);
  std::vector<std::pair<std::string, std::string>> texts;
  texts.reserve(pool.size());
  for (std::size_t i : pool) texts.emplace_back(corpus.documents[i].doc_id, corpus.documents[i].text);
  const Bm25Index index(texts, config.bm25);
  const std::vector<std::string> query = bm25_query(entity_id, relation);

  const std::vector<std::string> aliases =
      config.aliases != nullptr ? config.aliases->aliases_of(entity_id)
                                : std::vector<std::string>{entity_id};
  const MentionProvider fallback = MentionProvider::heuristic();
  const MentionProvider& mentions = config.mentions != nullptr ? *config.mentions : fallback;

  std::map<std::string, FeatureVector> out;
  for (std::size_t i : pool) {
    const Document& d = corpus.documents[i];
    FeatureVector f;
    f.doc_length = static_cast<double>(doc_length(d));
    f.ner_count = static_cast<double>(ner_count(d, relation, mentions));
    f.entity_saliency = static_cast<double>(entity_saliency(d, aliases));
    f.bm25 = bm25_score(index, query, d.doc_id);
    f.popularity = config.popularity != nullptr ? popularity(d.site_domain, *config.popularity) : 0.0;
    f.flesch = flesch(d);
    out.emplace(d.doc_id, f);
  }
  return out;
}

std::map<std::string, int> heuristic_classifier(const std::map<std::string, double>& scores) {
  std::vector<std::pair<std::string, double>> ranked(scores.begin(), scores.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t positives = (ranked.size() + 1) / 2;
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < ranked.size(); ++i) out[ranked[i].first] = i < positives ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// features.jsonl

void write_features(const std::filesystem::path& path, const std::vector<FeatureRow>& rows) {
  std::ofstream out = jsonl::open_output(path);
  for (const FeatureRow& r : rows) {
    jsonl::Json j = {{"doc_id", r.doc_id},
                     {"entity_id", r.entity_id},
                     {"relation", to_string(r.relation)},
                     {"doc_length", static_cast<std::int64_t>(r.features.doc_length)},
                     {"ner_count", static_cast<std::int64_t>(r.features.ner_count)},
                     {"entity_saliency", static_cast<std::int64_t>(r.features.entity_saliency)},
                     {"bm25", r.features.bm25},
                     {"popularity", r.features.popularity},
                     {"flesch", r.features.flesch}};
    out << jsonl::dump(j) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<FeatureRow> read_features(const std::filesystem::path& path) {
  std::vector<FeatureRow> rows;
  jsonl::for_each(path, [&](const jsonl::Json& j, std::size_t line) {
    FeatureRow r;
    r.doc_id = jsonl::get_string(j, "doc_id");
    r.entity_id = jsonl::get_string(j, "entity_id");
    auto rel = try_parse_relation(jsonl::get_string(j, "relation"));
    if (!rel) throw ParseError(path.string(), line, "unknown relation");
    r.relation = *rel;
    r.features.doc_length = static_cast<double>(jsonl::get_integer(j, "doc_length"));
    r.features.ner_count = static_cast<double>(jsonl::get_integer(j, "ner_count"));
    r.features.entity_saliency = static_cast<double>(jsonl::get_integer(j, "entity_saliency"));
    r.features.bm25 = jsonl::get_number(j, "bm25");
    r.features.popularity = jsonl::get_number(j, "popularity");
    r.features.flesch = jsonl::get_number(j, "flesch");
    for (double v : r.features.values()) {
      if (!std::isfinite(v)) throw ParseError(path.string(), line, "non-finite feature value");
    }
    rows.push_back(std::move(r));
  });
  return rows;
}

}  // namespace covrank
