#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "covrank/corpus.hpp"
#include "covrank/features.hpp"

namespace covrank {

// Sorted (column, weight) pairs.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool empty() const { return entries.empty(); }
  double norm() const;
  double dot(const SparseVector& other) const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

double cosine(const SparseVector& a, const SparseVector& b);

struct VocabularyOptions {
  std::size_t max_n = 1;
  std::size_t min_df = 2;
  std::size_t max_features = 100000;
};

class Vocabulary {
 public:
  std::size_t size() const { return terms_.size(); }
  std::size_t documents() const { return n_docs_; }
  std::size_t max_n() const { return max_n_; }
  std::size_t min_df() const { return min_df_; }

  // -1 when the n-gram is not in the vocabulary.
  long index(const std::string& ngram) const;
  const std::string& term(std::size_t i) const { return terms_.at(i); }
  std::size_t document_frequency(std::size_t i) const { return df_.at(i); }
  // ln((1 + N) / (1 + df)) + 1
  double idf(std::size_t i) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  friend Vocabulary fit_vocabulary(const std::vector<std::string>&, const VocabularyOptions&);

  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t n_docs_ = 0;
  std::size_t max_n_ = 1;
  std::size_t min_df_ = 1;
};

// Space-joined n-grams (1..max_n) of the case-folded tokens, ordered by start
// position and then by length.
std::vector<std::string> ngrams(std::string_view text, std::size_t max_n);

// Keeps n-grams with df >= min_df, then the max_features most frequent (ties
// lexicographic); columns are assigned in lexicographic order. Throws Error on
// an empty training set.
Vocabulary fit_vocabulary(const std::vector<std::string>& train_texts,
                          const VocabularyOptions& options = {});

// tf * idf per in-vocabulary n-gram, L2-normalized.
SparseVector tfidf_vector(std::string_view text, const Vocabulary& vocab);

// Document text with entity mentions replaced by "[ENT]" and numbers by "[NUM]".
// Number spans that partially overlap a mention are dropped.
std::string masked_text(const Document& doc, const MentionProvider& mentions);

class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::uint32_t dimension = 0) : dimension_(dimension) {}

  std::uint32_t dimension() const { return dimension_; }
  std::size_t size() const { return ids_.size(); }
  bool contains(const std::string& doc_id) const { return index_.contains(doc_id); }

  // Throws Error for a wrong length, a non-finite entry, or a duplicate id.
  void add(const std::string& doc_id, std::vector<float> vector);
  // Throws Error when the id is missing.
  const std::vector<float>& at(const std::string& doc_id) const;
  std::vector<double> as_double(const std::string& doc_id) const;

  // Insertion order.
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::uint32_t dimension_;
  std::vector<std::string> ids_;
  std::vector<std::vector<float>> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Little-endian "CVEM" file, version 1. Throws IoError on a bad magic, an
// unsupported version, a zero dimension or a truncated record.
EmbeddingStore load_embeddings(const std::filesystem::path& path);
void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path);

}  // namespace covrank
