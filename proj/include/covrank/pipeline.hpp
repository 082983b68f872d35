#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "covrank/coverage.hpp"
#include "covrank/eval.hpp"
#include "covrank/features.hpp"
#include "covrank/model.hpp"
#include "covrank/vectorize.hpp"

// Glue between the modules: labels -> features -> models -> scores, shared by
// the command line and the acceptance suite.
namespace covrank {

struct LabelingOptions {
  GtVariant variant = GtVariant::kWiki;
  GroundTruthOptions ground_truth;
  BinarizeOptions binarize;
  bool keep_degenerate = false;
  std::array<double, 3> ratios = {0.7, 0.1, 0.2};
  GroupKey group_key = GroupKey::kEntity;
  std::uint64_t seed = 0;
};

// Coverage, binary labels and split for every document with ground truth.
std::vector<LabelRow> build_labels(const Corpus& corpus, const AliasTable& aliases,
                                   const LabelingOptions& options);

using FeatureKey = std::pair<std::string, Relation>;  // (doc_id, relation)
using FeatureTable = std::map<FeatureKey, FeatureVector>;

// Heuristics for every labeled (document, relation), one BM25 pool per
// (entity, relation). Rows follow the label order.
std::vector<FeatureRow> featurize_labels(const Corpus& corpus, const std::vector<LabelRow>& labels,
                                         const FeatureConfig& config);
FeatureTable feature_table(const std::vector<FeatureRow>& rows);

enum class ModelKind { kLr, kTfidf, kNgrams, kStacked, kHerb, kHeuristic };

struct ModelSpec {
  ModelKind kind = ModelKind::kLr;
  std::string heuristic;  // for kHeuristic

  std::string name() const;
};

// "lr", "tfidf", "ngrams", "stacked", "herb" or "heuristic:<feature>".
ModelSpec parse_model_spec(std::string_view text);

struct Example {
  std::string doc_id;
  Relation relation = Relation::kMemberOf;
  int label = 0;
};

std::vector<Example> examples(const std::vector<LabelRow>& rows, Split split);
std::vector<Example> examples(const std::vector<LabeledDocument>& docs);

struct ScoringContext {
  const Corpus* corpus = nullptr;
  const MentionProvider* mentions = nullptr;
  const FeatureTable* features = nullptr;
  const EmbeddingStore* embeddings = nullptr;
};

struct TrainedModel {
  ModelSpec spec;
  std::optional<Vocabulary> vocabulary;
  LogisticModel lr;
  StackedModel stacked;
  HerbModel herb;
  double threshold = 0.5;
  TrainConfig config;

  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static TrainedModel load(const std::filesystem::path& path);
};

struct ModelOptions {
  TrainConfig train;
  VocabularyOptions vocabulary;  // max_n is overridden to 3 for "ngrams"
};

// Trains `spec` on `train` (already rebalanced). The vocabulary, when needed,
// is fitted on the masked text of `vocabulary_docs`. The decision threshold is
// the optimal-F1 threshold on `validation` (0.5 when it has no positives).
TrainedModel train_model(const ModelSpec& spec, const std::vector<Example>& train,
                         const std::vector<Example>& validation,
                         const std::vector<std::string>& vocabulary_docs,
                         const ScoringContext& context, const ModelOptions& options);

std::vector<double> score_examples(const TrainedModel& model, const std::vector<Example>& items,
                                   const ScoringContext& context);

struct ReportRow {
  std::string relation;
  std::string method;
  PrfReport prf;
  double ndcg = 0.0;
  std::size_t n_test = 0;
};

// One row per relation present in `test`. nDCG is averaged over the
// (entity, relation) pools whose gold coverages are not all zero; relevance is
// the gold coverage.
std::vector<ReportRow> evaluate_scores(const std::string& method, const std::vector<Example>& test,
                                       const std::vector<double>& scores, const Corpus& corpus,
                                       const std::map<FeatureKey, double>& gold_coverage);

nlohmann::json report_json(const std::vector<ReportRow>& rows);

}  // namespace covrank
