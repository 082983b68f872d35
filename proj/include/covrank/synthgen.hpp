#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "covrank/corpus.hpp"
#include "covrank/features.hpp"
#include "covrank/vectorize.hpp"

namespace covrank {

struct SynthConfig {
  std::size_t n_entities = 100;
  std::size_t docs_per_entity = 50;
  std::size_t gt_size = 10;
  // How strongly length, saliency, popularity and topical vocabulary follow
  // the planted coverage.
  double signal_strength = 0.8;
  std::size_t embedding_dimension = 32;
  double embedding_signal = 0.8;
  std::uint64_t seed = 0;
  // Relations are assigned to entities round-robin.
  std::vector<Relation> relations = {Relation::kFoundedBy};

  // Share of documents drawn from the high-coverage component.
  double high_share = 0.226;
  // Expected number of true long-tail objects in a coverage-1 document, and the
  // size of the long-tail pool per entity.
  double tail_objects = 20.0;
  std::size_t tail_pool = 2000;
  // Expected number of false objects per document.
  double spurious_objects = 0.5;
  // Mean number of unrelated named-entity mentions per document.
  double distractor_mentions = 60.0;

  void validate() const;
};

struct SynthCorpus {
  Corpus corpus;
  AliasTable aliases;
  std::vector<std::pair<std::string, std::vector<std::string>>> alias_rows;
  std::unordered_map<std::string, std::vector<Mention>> mentions;
  std::vector<std::pair<std::string, long>> popularity_rows;
  EmbeddingStore embeddings;
  // Planted coverage per doc_id; equals the coverage computed from the files.
  std::map<std::string, double> planted_coverage;
  // Every true object (head ground truth plus long tail) per entity.
  std::map<std::string, std::set<std::string>> true_objects;
};

SynthCorpus generate(const SynthConfig& config);

// documents.jsonl, tuples.jsonl, gt.jsonl, aliases.jsonl, mentions.jsonl,
// popularity.tsv, embeddings.bin, planted.jsonl and truth.jsonl.
void write_synth(const SynthCorpus& synth, const std::filesystem::path& dir);

}  // namespace covrank
