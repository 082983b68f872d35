#include "covrank/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <fmt/format.h>

#include "covrank/error.hpp"
#include "covrank/jsonl.hpp"
#include "covrank/rng.hpp"

namespace covrank {

void SynthConfig::validate() const {
  if (n_entities == 0 || docs_per_entity == 0 || gt_size == 0 || embedding_dimension == 0) {
    throw Error("synth counts must be positive");
  }
  for (double s : {signal_strength, embedding_signal, high_share}) {
    if (!(s >= 0.0 && s <= 1.0)) throw Error("synth strengths and shares must lie in [0, 1]");
  }
  if (relations.empty()) throw Error("synth needs at least one relation");
  if (tail_objects < 0.0 || spurious_objects < 0.0 || distractor_mentions < 0.0) {
    throw Error("synth rates must be >= 0");
  }
  if (tail_pool == 0 && tail_objects > 0.0) throw Error("tail_pool must be positive");
}

namespace {

const std::vector<std::string> kSubDomains = {
    "politician", "automobile", "software", "bank",   "university", "football_club",
    "airline",    "pharma",     "media",    "retail", "energy",     "telecom"};

const std::vector<std::string> kOrgSuffixes = {"Group",   "Labs",     "Holdings", "Systems",
                                               "Partners", "Institute", "Foundation", "Corp"};

const std::vector<std::string> kFactCues = {"alongside", "joined", "beside",  "helped",
                                            "backed",    "teamed", "assisted", "worked"};

const std::vector<std::string> kTopicHigh = {"history", "profile",    "biography", "overview",
                                             "origins", "timeline",   "leadership", "archive",
                                             "background", "chronicle"};

const std::vector<std::string> kTopicLow = {"rumor",  "opinion", "review",   "gossip", "deal",
                                            "stock",  "price",   "forecast", "outlook", "update"};

const std::vector<std::string> kFunctionWords = {
    "the", "of", "and", "a",  "in",  "to",   "was",     "is",     "by",   "for",
    "on",  "at", "as",  "it", "its", "with", "founded", "member", "ceo",  "board",
    "held", "position", "family", "partner", "from", "that", "this", "were", "has", "had"};

const std::vector<std::string> kOnsets = {"b", "d", "f", "g", "k",  "l",  "m",  "n",  "p",
                                          "r", "s", "t", "v", "z",  "br", "dr", "kl", "st",
                                          "tr", "h", "j", "sh", "th", "gr"};
const std::vector<std::string> kVowels = {"a", "e", "i", "o", "u", "ai", "ea", "io", "ou"};
const std::vector<std::string> kCodas = {"", "", "", "n", "r", "l", "s", "m", "th", "x"};

std::string syllable(Rng& rng) {
  return kOnsets[rng.index(kOnsets.size())] + kVowels[rng.index(kVowels.size())] +
         kCodas[rng.index(kCodas.size())];
}

std::string word(Rng& rng, std::size_t min_syll, std::size_t max_syll) {
  const std::size_t n = min_syll + rng.index(max_syll - min_syll + 1);
  std::string w;
  for (std::size_t i = 0; i < n; ++i) w += syllable(rng);
  return w;
}

std::string capitalize(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

// Filler vocabulary: function words followed by pseudo-words, sampled with a
// Zipf-like law. Built from a fixed seed so every corpus shares it.
class Filler {
 public:
  Filler() {
    Rng rng(0x5eed);
    std::unordered_set<std::string> seen;
    auto reserved = [](const std::string& w) {
      auto in = [&](const std::vector<std::string>& v) {
        return std::find(v.begin(), v.end(), w) != v.end();
      };
      return in(kFactCues) || in(kTopicHigh) || in(kTopicLow);
    };
    for (const auto& w : kFunctionWords) {
      words_.push_back(w);
      seen.insert(w);
    }
    while (words_.size() < 600) {
      std::string w = word(rng, 1, 3);
      if (seen.insert(w).second && !reserved(w)) words_.push_back(w);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      total += 1.0 / (static_cast<double>(i) + 2.0);
      cdf_.push_back(total);
    }
    for (double& c : cdf_) c /= total;
  }

  const std::string& sample(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return words_[std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), words_.size() - 1)];
  }

  bool contains(const std::string& w) const {
    return std::find(words_.begin(), words_.end(), w) != words_.end();
  }

 private:
  std::vector<std::string> words_;
  std::vector<double> cdf_;
};

// Unique capitalized names. Tokens never coincide with filler words, so names
// do not leak into the BM25 or TF-IDF statistics of ordinary vocabulary.
class NameFactory {
 public:
  NameFactory(Rng& rng, const Filler& filler) : rng_(rng), filler_(filler) {}

  std::string person() {
    return fresh([&] { return capitalize(word(rng_, 1, 2)) + " " + capitalize(word(rng_, 2, 3)); });
  }

  std::string organization() {
    return fresh([&] {
      return capitalize(word(rng_, 2, 3)) + " " + kOrgSuffixes[rng_.index(kOrgSuffixes.size())];
    });
  }

  std::string of_type(EntityType t) { return t == EntityType::kPerson ? person() : organization(); }

  // Reserves a single-token alias.
  bool reserve(const std::string& token) { return used_.insert(text::fold(token)).second; }

 private:
  template <typename F>
  std::string fresh(F make) {
    for (;;) {
      std::string n = make();
      bool clash = false;
      for (const auto& t : text::tokenize(n)) clash = clash || filler_.contains(text::fold(t));
      if (!clash && used_.insert(text::fold(n)).second) return n;
    }
  }

  Rng& rng_;
  const Filler& filler_;
  std::unordered_set<std::string> used_;
};

struct Piece {
  std::vector<std::string> tokens;
  // Set when the first `mention_tokens` tokens form a named-entity mention.
  std::size_t mention_tokens = 0;
  EntityType type = EntityType::kPerson;
};

Piece name_piece(const std::string& name, EntityType type) {
  Piece p;
  p.tokens = text::tokenize(name);
  p.mention_tokens = p.tokens.size();
  p.type = type;
  return p;
}

Piece word_piece(std::string w) {
  Piece p;
  p.tokens.push_back(std::move(w));
  return p;
}

// Joins pieces into sentences of 8-18 tokens and records mention spans.
std::string render(const std::vector<Piece>& pieces, Rng& rng, std::vector<Mention>& mentions) {
  std::string out;
  std::size_t in_sentence = 0;
  std::size_t target = 8 + rng.index(11);
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Piece& p = pieces[i];
    std::size_t mention_begin = 0;
    for (std::size_t t = 0; t < p.tokens.size(); ++t) {
      if (!out.empty()) out += ' ';
      if (t == 0) mention_begin = out.size();
      out += p.tokens[t];
      if (p.mention_tokens > 0 && t + 1 == p.mention_tokens) {
        mentions.push_back({{mention_begin, out.size()}, p.type});
      }
      ++in_sentence;
    }
    if (in_sentence >= target || i + 1 == pieces.size()) {
      out += '.';
      in_sentence = 0;
      target = 8 + rng.index(11);
    }
  }
  return out;
}

std::size_t poisson(Rng& rng, double mean) {
  // Knuth's method underflows for large means; split the mean into chunks.
  std::size_t n = 0;
  while (mean > 30.0) {
    n += static_cast<std::size_t>(rng.poisson(30.0));
    mean -= 30.0;
  }
  return n + static_cast<std::size_t>(rng.poisson(mean));
}

}  // namespace

SynthCorpus generate(const SynthConfig& config) {
  config.validate();
  static const Filler filler;
  Rng rng(config.seed);
  NameFactory names(rng, filler);
  const double s = config.signal_strength;

  SynthCorpus out;
  out.embeddings = EmbeddingStore(static_cast<std::uint32_t>(config.embedding_dimension));

  // Site domains; the last sixth has no popularity rank.
  std::vector<std::string> domains;
  {
    std::unordered_set<std::string> seen;
    static const std::vector<std::string> tlds = {".com", ".org", ".net", ".io"};
    while (domains.size() < 300) {
      std::string d = word(rng, 2, 3) + tlds[rng.index(tlds.size())];
      if (seen.insert(d).second) domains.push_back(d);
    }
    for (std::size_t i = 0; i < 250; ++i) out.popularity_rows.emplace_back(domains[i], static_cast<long>(i + 1));
  }

  std::vector<std::pair<std::string, EntityType>> distractors;
  for (std::size_t i = 0; i < 600; ++i) {
    const EntityType t = i % 2 == 0 ? EntityType::kPerson : EntityType::kOrganization;
    distractors.emplace_back(names.of_type(t), t);
  }

  // Embedding signal direction.
  std::vector<double> direction(config.embedding_dimension);
  {
    double n2 = 0.0;
    for (double& x : direction) {
      x = rng.normal();
      n2 += x * x;
    }
    for (double& x : direction) x /= std::sqrt(n2);
  }
  constexpr double kEmbeddingGain = 5.0;
  constexpr double kCoverageCentre = 0.35;
  constexpr double kCoverageScale = 0.3;

  for (std::size_t e = 0; e < config.n_entities; ++e) {
    const Relation relation = config.relations[e % config.relations.size()];
    const EntityType subject = subject_type(relation);
    const EntityType target = target_type(relation);

    std::string entity;
    std::string alias;
    for (;;) {
      entity = names.of_type(subject);
      const auto toks = text::tokenize(entity);
      alias = subject == EntityType::kOrganization ? toks.front() : toks.back();
      if (names.reserve(alias)) break;
    }
    out.aliases.add(entity, {alias});
    out.alias_rows.push_back({entity, {alias}});
    const std::string sub_domain = kSubDomains[rng.index(kSubDomains.size())];

    GroundTruth gt{entity, relation, GtVariant::kWiki, {}};
    std::vector<std::string> head;
    for (std::size_t i = 0; i < config.gt_size; ++i) head.push_back(names.of_type(target));
    std::set<std::string>& truth = out.true_objects[entity];
    for (const auto& h : head) {
      gt.objects.insert(out.aliases.canonical(h));
      truth.insert(out.aliases.canonical(h));
    }
    out.corpus.ground_truths.emplace(GtKey{entity, relation, GtVariant::kWiki}, gt);

    std::unordered_map<std::size_t, std::string> tail;  // pool index -> name, created lazily

    for (std::size_t d = 0; d < config.docs_per_entity; ++d) {
      const std::string doc_id = fmt::format("e{:04}-d{:04}", e, d);
      const bool high = rng.bernoulli(config.high_share);
      const double c_raw = high ? rng.uniform(0.55, 1.0) : rng.uniform(0.0, 0.35);
      const auto k = static_cast<std::size_t>(std::lround(c_raw * static_cast<double>(config.gt_size)));
      const double c = static_cast<double>(k) / static_cast<double>(config.gt_size);

      std::vector<std::string> objects;
      {
        std::vector<std::string> pick = head;
        rng.shuffle(pick);
        objects.assign(pick.begin(), pick.begin() + static_cast<long>(k));
      }
      const std::size_t n_tail =
          std::min(config.tail_pool, poisson(rng, c * config.tail_objects));
      std::set<std::size_t> chosen;
      while (chosen.size() < n_tail) chosen.insert(static_cast<std::size_t>(rng.index(config.tail_pool)));
      for (std::size_t idx : chosen) {
        auto it = tail.find(idx);
        if (it == tail.end()) {
          it = tail.emplace(idx, names.of_type(target)).first;
          truth.insert(out.aliases.canonical(it->second));
        }
        objects.push_back(it->second);
      }
      const std::size_t n_spurious = poisson(rng, config.spurious_objects);
      for (std::size_t i = 0; i < n_spurious; ++i) objects.push_back(names.of_type(target));

      std::vector<Piece> pieces;
      for (const auto& o : objects) {
        Piece p = name_piece(o, target);
        p.tokens.push_back(kFactCues[rng.index(kFactCues.size())]);
        pieces.push_back(std::move(p));
      }
      const std::size_t n_entity = 1 + poisson(rng, 2.0 + s * 8.0 * c);
      for (std::size_t i = 0; i < n_entity; ++i) {
        pieces.push_back(name_piece(rng.bernoulli(0.7) ? entity : alias, subject));
      }
      const std::size_t n_distract =
          poisson(rng, config.distractor_mentions * rng.uniform(0.6, 1.4));
      for (std::size_t i = 0; i < n_distract; ++i) {
        const auto& [n, t] = distractors[rng.index(distractors.size())];
        pieces.push_back(name_piece(n, t));
      }
      const std::size_t n_high = poisson(rng, s * 8.0 * c);
      for (std::size_t i = 0; i < n_high; ++i) pieces.push_back(word_piece(kTopicHigh[rng.index(kTopicHigh.size())]));
      const std::size_t n_low = poisson(rng, s * 4.0 * (1.0 - c));
      for (std::size_t i = 0; i < n_low; ++i) pieces.push_back(word_piece(kTopicLow[rng.index(kTopicLow.size())]));
      const std::size_t n_numbers = poisson(rng, 3.0);
      for (std::size_t i = 0; i < n_numbers; ++i) {
        pieces.push_back(word_piece(std::to_string(1900 + rng.index(125))));
      }

      std::size_t used = 0;
      for (const auto& p : pieces) used += p.tokens.size();
      const double length_factor = 1.0 + s * 0.7 * (c - kCoverageCentre);
      const auto target_len =
          static_cast<std::size_t>(std::lround(rng.uniform(400.0, 800.0) * length_factor));
      for (std::size_t i = used; i < target_len; ++i) pieces.push_back(word_piece(filler.sample(rng)));
      rng.shuffle(pieces);

      std::vector<Mention> mentions;
      std::string body = render(pieces, rng, mentions);

      const bool popular = rng.bernoulli(s * 0.6 * c);
      const std::string& domain = popular ? domains[rng.index(25)] : domains[rng.index(domains.size())];
      const std::string url = fmt::format("https://{}/{}/{}", domain, text::fold(alias), d);
      out.corpus.documents.push_back(
          make_document(doc_id, entity, url, domain, std::move(body), sub_domain));
      out.mentions.emplace(doc_id, std::move(mentions));

      for (const auto& o : objects) {
        const double confidence = std::round(rng.uniform(0.5, 1.0) * 1000.0) / 1000.0;
        out.corpus.tuples.push_back({doc_id, entity, relation, o, confidence});
      }
      out.planted_coverage.emplace(doc_id, c);

      const double z = (c - kCoverageCentre) / kCoverageScale;
      std::vector<float> v(config.embedding_dimension);
      for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] = static_cast<float>(kEmbeddingGain * config.embedding_signal * z * direction[j] +
                                  rng.normal());
      }
      out.embeddings.add(doc_id, std::move(v));
    }
  }
  out.corpus.reindex();
  return out;
}

void write_synth(const SynthCorpus& synth, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  save_documents(synth.corpus, dir / "documents.jsonl");
  save_tuples(synth.corpus, dir / "tuples.jsonl");
  save_ground_truths(synth.corpus, dir / "gt.jsonl");

  {
    std::ofstream out = jsonl::open_output(dir / "aliases.jsonl");
    for (const auto& [canonical, aliases] : synth.alias_rows) {
      out << jsonl::dump({{"canonical", canonical}, {"aliases", aliases}}) << '\n';
    }
  }
  {
    std::vector<std::pair<std::string, std::vector<Mention>>> rows;
    for (const auto& d : synth.corpus.documents) rows.emplace_back(d.doc_id, synth.mentions.at(d.doc_id));
    write_mentions(dir / "mentions.jsonl", rows);
  }
  {
    std::ofstream out = jsonl::open_output(dir / "popularity.tsv");
    for (const auto& [domain, rank] : synth.popularity_rows) out << domain << '\t' << rank << '\n';
  }
  save_embeddings(synth.embeddings, dir / "embeddings.bin");
  {
    std::ofstream out = jsonl::open_output(dir / "planted.jsonl");
    for (const auto& d : synth.corpus.documents) {
      out << jsonl::dump({{"doc_id", d.doc_id}, {"coverage", synth.planted_coverage.at(d.doc_id)}})
          << '\n';
    }
  }
  {
    std::ofstream out = jsonl::open_output(dir / "truth.jsonl");
    for (const auto& [entity, objects] : synth.true_objects) {
      out << jsonl::dump({{"entity_id", entity}, {"objects", objects}}) << '\n';
    }
  }
}

}  // namespace covrank
