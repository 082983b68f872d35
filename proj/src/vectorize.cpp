#include "covrank/vectorize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "covrank/error.hpp"
#include "covrank/jsonl.hpp"

namespace covrank {

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto& [i, w] : entries) s += w * w;
  return std::sqrt(s);
}

double SparseVector::dot(const SparseVector& other) const {
  double s = 0.0;
  auto a = entries.begin();
  auto b = other.entries.begin();
  while (a != entries.end() && b != other.entries.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      s += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return s;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

// ---------------------------------------------------------------------------
// Vocabulary

long Vocabulary::index(const std::string& ngram) const {
  auto it = index_.find(ngram);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

double Vocabulary::idf(std::size_t i) const {
  return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(df_.at(i)))) +
         1.0;
}

nlohmann::json Vocabulary::to_json() const {
  return {{"documents", n_docs_},
          {"max_n", max_n_},
          {"min_df", min_df_},
          {"terms", terms_},
          {"df", df_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v;
  try {
    v.n_docs_ = j.at("documents").get<std::size_t>();
    v.max_n_ = j.at("max_n").get<std::size_t>();
    v.min_df_ = j.at("min_df").get<std::size_t>();
    v.terms_ = j.at("terms").get<std::vector<std::string>>();
    v.df_ = j.at("df").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed vocabulary: ") + e.what());
  }
  if (v.terms_.size() != v.df_.size()) throw IoError("malformed vocabulary: terms/df length mismatch");
  for (std::size_t i = 0; i < v.terms_.size(); ++i) {
    if (!v.index_.emplace(v.terms_[i], i).second) {
      throw IoError("malformed vocabulary: duplicate term \"" + v.terms_[i] + "\"");
    }
  }
  return v;
}

std::vector<std::string> ngrams(std::string_view body, std::size_t max_n) {
  const std::vector<std::string> tokens = text::folded_tokens(body);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string gram;
    for (std::size_t n = 1; n <= max_n && i + n <= tokens.size(); ++n) {
      if (n > 1) gram += ' ';
      gram += tokens[i + n - 1];
      out.push_back(gram);
    }
  }
  return out;
}

Vocabulary fit_vocabulary(const std::vector<std::string>& train_texts,
                          const VocabularyOptions& options) {
  if (train_texts.empty()) throw Error("cannot fit a vocabulary on an empty training set");
  if (options.max_n == 0) throw Error("max_n must be >= 1");

  std::unordered_map<std::string, std::size_t> df;
  for (const std::string& t : train_texts) {
    std::vector<std::string> grams = ngrams(t, options.max_n);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (std::string& g : grams) ++df[std::move(g)];
  }

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [g, c] : df) {
    if (c >= options.min_df) kept.emplace_back(g, c);
  }
  if (kept.size() > options.max_features) {
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    kept.resize(options.max_features);
  }
  std::sort(kept.begin(), kept.end());

  Vocabulary v;
  v.n_docs_ = train_texts.size();
  v.max_n_ = options.max_n;
  v.min_df_ = options.min_df;
  for (auto& [g, c] : kept) {
    v.index_.emplace(g, v.terms_.size());
    v.terms_.push_back(std::move(g));
    v.df_.push_back(c);
  }
  return v;
}

SparseVector tfidf_vector(std::string_view body, const Vocabulary& vocab) {
  std::map<std::uint32_t, double> tf;
  for (const std::string& g : ngrams(body, vocab.max_n())) {
    const long i = vocab.index(g);
    if (i >= 0) tf[static_cast<std::uint32_t>(i)] += 1.0;
  }
  SparseVector v;
  v.entries.reserve(tf.size());
  double sq = 0.0;
  for (const auto& [i, count] : tf) {
    const double w = count * vocab.idf(i);
    v.entries.emplace_back(i, w);
    sq += w * w;
  }
  if (sq > 0.0) {
    const double n = std::sqrt(sq);
    for (auto& e : v.entries) e.second /= n;
  }
  return v;
}

std::string masked_text(const Document& doc, const MentionProvider& mentions) {
  std::vector<text::Span> entities;
  for (const Mention& m : mentions.mentions(doc)) entities.push_back(m.span);
  std::vector<text::Span> numbers;
  for (const text::Span& n : text::number_spans(doc.text)) {
    const bool partial = std::any_of(entities.begin(), entities.end(), [&](const text::Span& e) {
      const bool overlap = n.begin < e.end && e.begin < n.end;
      const bool nested = (e.begin <= n.begin && n.end <= e.end) ||
                          (n.begin <= e.begin && e.end <= n.end);
      return overlap && !nested;
    });
    if (!partial) numbers.push_back(n);
  }
  return mask_text(doc.text, entities, numbers);
}

// ---------------------------------------------------------------------------
// Embeddings

void EmbeddingStore::add(const std::string& doc_id, std::vector<float> vector) {
  if (vector.size() != dimension_) {
    throw Error("embedding for \"" + doc_id + "\" has length " + std::to_string(vector.size()) +
                ", expected " + std::to_string(dimension_));
  }
  for (float x : vector) {
    if (!std::isfinite(x)) throw Error("embedding for \"" + doc_id + "\" has a non-finite entry");
  }
  if (!index_.emplace(doc_id, ids_.size()).second) {
    throw Error("duplicate embedding for \"" + doc_id + "\"");
  }
  ids_.push_back(doc_id);
  vectors_.push_back(std::move(vector));
}

const std::vector<float>& EmbeddingStore::at(const std::string& doc_id) const {
  auto it = index_.find(doc_id);
  if (it == index_.end()) throw Error("no embedding for doc_id \"" + doc_id + "\"");
  return vectors_[it->second];
}

std::vector<double> EmbeddingStore::as_double(const std::string& doc_id) const {
  const std::vector<float>& v = at(doc_id);
  return {v.begin(), v.end()};
}

namespace {

constexpr char kMagic[4] = {'C', 'V', 'E', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
  const U bits = std::bit_cast<U>(value);
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

class Reader {
 public:
  Reader(std::istream& in, const std::filesystem::path& path) : in_(in), path_(path) {}

  template <typename T>
  T get(const char* what) {
    using U = std::conditional_t<sizeof(T) == 2, std::uint16_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
    unsigned char buf[sizeof(T)];
    read(buf, sizeof(T), what);
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(buf[i]) << (8 * i);
    return std::bit_cast<T>(bits);
  }

  void read(void* dst, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw IoError(path_.string() + ": truncated embedding file while reading " + what);
    }
  }

 private:
  std::istream& in_;
  const std::filesystem::path& path_;
};

}  // namespace

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Reader r(in, path);
  char magic[4];
  r.read(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError(path.string() + ": bad magic, not a CVEM file");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVersion) {
    throw IoError(path.string() + ": unsupported embedding format version " + std::to_string(version));
  }
  const auto dim = r.get<std::uint32_t>("dimension");
  if (dim == 0) throw IoError(path.string() + ": embedding dimension is 0");
  const auto count = r.get<std::uint64_t>("record count");

  EmbeddingStore store(dim);
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto len = r.get<std::uint16_t>("doc_id length");
    std::string id(len, '\0');
    r.read(id.data(), len, "doc_id");
    std::vector<float> v(dim);
    for (float& x : v) x = r.get<float>("vector");
    try {
      store.add(id, std::move(v));
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      throw IoError(path.string() + ": record " + std::to_string(k) + ": " + e.what());
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError(path.string() + ": trailing bytes after " + std::to_string(count) + " records");
  }
  return store;
}

void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path) {
  if (store.dimension() == 0) throw Error("cannot save embeddings with dimension 0");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, store.dimension());
  put(out, static_cast<std::uint64_t>(store.size()));
  for (const std::string& id : store.ids()) {
    if (id.size() > 0xFFFF) throw Error("doc_id too long for the embedding format: " + id);
    put(out, static_cast<std::uint16_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (float x : store.at(id)) put(out, x);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace covrank
