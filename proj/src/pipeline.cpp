#include "covrank/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "covrank/error.hpp"
#include "covrank/jsonl.hpp"

namespace covrank {

std::vector<LabelRow> build_labels(const Corpus& corpus, const AliasTable& aliases,
                                   const LabelingOptions& options) {
  const auto gts = resolve_ground_truths(corpus, options.variant, aliases, options.ground_truth);
  const auto records = coverage_records(corpus, gts, aliases);
  const auto labeled = label_all(records, options.binarize, options.keep_degenerate);
  if (labeled.empty()) throw Error("no document has usable ground truth");
  const SplitAssignment assignment =
      split(corpus, labeled, options.ratios, options.group_key, options.seed);
  std::vector<LabelRow> rows;
  rows.reserve(labeled.size());
  for (const auto& l : labeled) rows.push_back({l, assignment.at(l.doc_id)});
  return rows;
}

std::vector<FeatureRow> featurize_labels(const Corpus& corpus, const std::vector<LabelRow>& labels,
                                         const FeatureConfig& config) {
  std::map<std::pair<std::string, Relation>, std::map<std::string, FeatureVector>> pools;
  for (const auto& row : labels) pools[{row.label.entity_id, row.label.relation}];
  for (auto& [key, table] : pools) table = featurize(corpus, key.first, key.second, config);

  std::vector<FeatureRow> out;
  out.reserve(labels.size());
  for (const auto& row : labels) {
    const auto& table = pools.at({row.label.entity_id, row.label.relation});
    auto it = table.find(row.label.doc_id);
    if (it == table.end()) {
      throw Error("document \"" + row.label.doc_id + "\" does not belong to entity \"" +
                  row.label.entity_id + "\"");
    }
    out.push_back({row.label.doc_id, row.label.entity_id, row.label.relation, it->second});
  }
  return out;
}

FeatureTable feature_table(const std::vector<FeatureRow>& rows) {
  FeatureTable t;
  for (const auto& r : rows) {
    if (!t.emplace(FeatureKey{r.doc_id, r.relation}, r.features).second) {
      throw Error("duplicate feature row for \"" + r.doc_id + "\" / " +
                  std::string(to_string(r.relation)));
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Model specs

namespace {

constexpr std::array<std::pair<ModelKind, std::string_view>, 5> kKindNames = {{
    {ModelKind::kLr, "lr"},
    {ModelKind::kTfidf, "tfidf"},
    {ModelKind::kNgrams, "ngrams"},
    {ModelKind::kStacked, "stacked"},
    {ModelKind::kHerb, "herb"},
}};

}  // namespace

std::string ModelSpec::name() const {
  if (kind == ModelKind::kHeuristic) return "heuristic:" + heuristic;
  for (const auto& [k, n] : kKindNames) {
    if (k == kind) return std::string(n);
  }
  return "?";
}

ModelSpec parse_model_spec(std::string_view text) {
  constexpr std::string_view kPrefix = "heuristic:";
  if (text.substr(0, kPrefix.size()) == kPrefix) {
    ModelSpec s{ModelKind::kHeuristic, std::string(text.substr(kPrefix.size()))};
    feature_index(s.heuristic);
    return s;
  }
  for (const auto& [k, n] : kKindNames) {
    if (n == text) return {k, {}};
  }
  throw Error("unknown model \"" + std::string(text) +
              "\" (expected lr, tfidf, ngrams, stacked, herb or heuristic:<name>)");
}

std::vector<Example> examples(const std::vector<LabelRow>& rows, Split split) {
  std::vector<Example> out;
  for (const auto& r : rows) {
    if (r.split == split) out.push_back({r.label.doc_id, r.label.relation, r.label.label});
  }
  return out;
}

std::vector<Example> examples(const std::vector<LabeledDocument>& docs) {
  std::vector<Example> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back({d.doc_id, d.relation, d.label});
  return out;
}

// ---------------------------------------------------------------------------
// Inputs

namespace {

const FeatureVector& heuristics_of(const ScoringContext& ctx, const Example& e) {
  if (ctx.features == nullptr) throw Error("this model needs heuristic features");
  auto it = ctx.features->find({e.doc_id, e.relation});
  if (it == ctx.features->end()) {
    throw Error("no features for \"" + e.doc_id + "\" / " + std::string(to_string(e.relation)));
  }
  return it->second;
}

std::string masked_of(const ScoringContext& ctx, const std::string& doc_id) {
  if (ctx.corpus == nullptr || ctx.mentions == nullptr) {
    throw Error("this model needs document text and mentions");
  }
  return masked_text(ctx.corpus->at(doc_id), *ctx.mentions);
}

std::vector<double> heuristic_row(const FeatureVector& f) {
  const auto v = f.values();
  return {v.begin(), v.end()};
}

const EmbeddingStore& embeddings_of(const ScoringContext& ctx) {
  if (ctx.embeddings == nullptr) throw Error("this model needs embeddings");
  return *ctx.embeddings;
}

std::vector<int> labels_of(const std::vector<Example>& xs) {
  std::vector<int> ys;
  ys.reserve(xs.size());
  for (const auto& x : xs) ys.push_back(x.label);
  return ys;
}

}  // namespace

TrainedModel train_model(const ModelSpec& spec, const std::vector<Example>& train,
                         const std::vector<Example>& validation,
                         const std::vector<std::string>& vocabulary_docs,
                         const ScoringContext& ctx, const ModelOptions& options) {
  if (train.empty()) throw Error("empty training set");
  TrainedModel m;
  m.spec = spec;
  m.config = options.train;
  const std::vector<int> ys = labels_of(train);

  auto fit_vocab = [&](std::size_t max_n) {
    std::vector<std::string> texts;
    texts.reserve(vocabulary_docs.size());
    for (const auto& id : vocabulary_docs) texts.push_back(masked_of(ctx, id));
    VocabularyOptions vo = options.vocabulary;
    vo.max_n = max_n;
    m.vocabulary = fit_vocabulary(texts, vo);
  };

  switch (spec.kind) {
    case ModelKind::kHeuristic:
      feature_index(spec.heuristic);
      break;
    case ModelKind::kLr: {
      std::vector<std::vector<double>> xs;
      for (const auto& e : train) xs.push_back(heuristic_row(heuristics_of(ctx, e)));
      m.lr = train_lr(xs, ys, options.train);
      break;
    }
    case ModelKind::kTfidf:
    case ModelKind::kNgrams: {
      fit_vocab(spec.kind == ModelKind::kNgrams ? 3 : options.vocabulary.max_n);
      std::vector<SparseVector> xs;
      for (const auto& e : train) xs.push_back(tfidf_vector(masked_of(ctx, e.doc_id), *m.vocabulary));
      m.lr = train_lr(xs, ys, m.vocabulary->size(), options.train);
      break;
    }
    case ModelKind::kStacked: {
      fit_vocab(options.vocabulary.max_n);
      std::vector<StackedInput> xs;
      for (const auto& e : train) {
        xs.push_back({tfidf_vector(masked_of(ctx, e.doc_id), *m.vocabulary), heuristics_of(ctx, e)});
      }
      m.stacked = train_stacked(xs, ys, m.vocabulary->size(), options.train);
      break;
    }
    case ModelKind::kHerb: {
      std::vector<std::string> ids;
      std::vector<FeatureVector> hs;
      for (const auto& e : train) {
        ids.push_back(e.doc_id);
        hs.push_back(heuristics_of(ctx, e));
      }
      m.herb = train_herb(embeddings_of(ctx), ids, hs, ys, options.train);
      break;
    }
  }

  bool has_positive = false;
  for (const auto& e : validation) has_positive = has_positive || e.label == 1;
  if (has_positive) {
    const std::vector<double> scores = score_examples(m, validation, ctx);
    std::vector<ScoredLabel> items;
    for (std::size_t i = 0; i < validation.size(); ++i) {
      items.push_back({validation[i].doc_id, scores[i], validation[i].label});
    }
    m.threshold = optimal_f1(items).threshold;
  }
  return m;
}

std::vector<double> score_examples(const TrainedModel& m, const std::vector<Example>& items,
                                   const ScoringContext& ctx) {
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& e : items) {
    switch (m.spec.kind) {
      case ModelKind::kHeuristic:
        out.push_back(heuristics_of(ctx, e)[feature_index(m.spec.heuristic)]);
        break;
      case ModelKind::kLr:
        out.push_back(predict_lr(m.lr, heuristic_row(heuristics_of(ctx, e))));
        break;
      case ModelKind::kTfidf:
      case ModelKind::kNgrams:
        out.push_back(predict_lr(m.lr, tfidf_vector(masked_of(ctx, e.doc_id), *m.vocabulary)));
        break;
      case ModelKind::kStacked:
        out.push_back(m.stacked.predict(
            {tfidf_vector(masked_of(ctx, e.doc_id), *m.vocabulary), heuristics_of(ctx, e)}));
        break;
      case ModelKind::kHerb:
        out.push_back(m.herb.predict(embeddings_of(ctx).as_double(e.doc_id), heuristics_of(ctx, e)));
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json TrainedModel::to_json() const {
  nlohmann::json j;
  j["threshold"] = finite_threshold(threshold);
  j["config"] = config.to_json();
  switch (spec.kind) {
    case ModelKind::kHeuristic:
      j["kind"] = "heuristic";
      j["feature"] = spec.heuristic;
      break;
    case ModelKind::kLr:
    case ModelKind::kTfidf:
    case ModelKind::kNgrams:
      j["kind"] = "lr";
      j["input"] = spec.kind == ModelKind::kLr ? "heuristics" : spec.name();
      j.update(lr.to_json());
      break;
    case ModelKind::kStacked:
      j["kind"] = "stacked";
      j["dimension"] = StackedModel::kLevel1;
      j.update(stacked.to_json());
      break;
    case ModelKind::kHerb:
      j["kind"] = "herb";
      j["dimension"] = HerbModel::kFusionDimension;
      j.update(herb.to_json());
      break;
  }
  if (vocabulary) j["vocabulary"] = vocabulary->to_json();
  return j;
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
  TrainedModel m;
  try {
    m.threshold = j.at("threshold").get<double>();
    m.config = TrainConfig::from_json(j.at("config"));
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "heuristic") {
      m.spec = {ModelKind::kHeuristic, j.at("feature").get<std::string>()};
      feature_index(m.spec.heuristic);
    } else if (kind == "lr") {
      const std::string input = j.at("input").get<std::string>();
      m.spec = input == "heuristics" ? ModelSpec{ModelKind::kLr, {}} : parse_model_spec(input);
      m.lr = LogisticModel::from_json(j);
    } else if (kind == "stacked") {
      m.spec = {ModelKind::kStacked, {}};
      m.stacked = StackedModel::from_json(j);
    } else if (kind == "herb") {
      m.spec = {ModelKind::kHerb, {}};
      m.herb = HerbModel::from_json(j);
    } else {
      throw IoError("unknown model kind \"" + kind + "\"");
    }
    if (j.contains("vocabulary")) m.vocabulary = Vocabulary::from_json(j.at("vocabulary"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed model file: ") + e.what());
  }
  const bool needs_vocab = m.spec.kind == ModelKind::kTfidf || m.spec.kind == ModelKind::kNgrams ||
                           m.spec.kind == ModelKind::kStacked;
  if (needs_vocab && !m.vocabulary) throw IoError("malformed model file: missing vocabulary");
  return m;
}

void TrainedModel::save(const std::filesystem::path& path) const {
  std::ofstream out = jsonl::open_output(path);
  out << to_json().dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
  std::ifstream in = jsonl::open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  try {
    return from_json(j);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

std::vector<ReportRow> evaluate_scores(const std::string& method, const std::vector<Example>& test,
                                       const std::vector<double>& scores, const Corpus& corpus,
                                       const std::map<FeatureKey, double>& gold_coverage) {
  if (scores.size() != test.size()) throw Error("scores and examples differ in length");
  std::map<Relation, std::vector<std::size_t>> by_relation;
  for (std::size_t i = 0; i < test.size(); ++i) by_relation[test[i].relation].push_back(i);

  std::vector<ReportRow> rows;
  for (const auto& [relation, idx] : by_relation) {
    ReportRow row;
    row.relation = std::string(to_string(relation));
    row.method = method;
    row.n_test = idx.size();

    std::vector<ScoredLabel> items;
    bool positive = false;
    for (std::size_t i : idx) {
      items.push_back({test[i].doc_id, scores[i], test[i].label});
      positive = positive || test[i].label == 1;
    }
    if (positive) {
      row.prf = optimal_f1(items);
    } else {
      row.prf = prf_at(items, std::numeric_limits<double>::infinity());
    }

    // Pools: (entity) within this relation, ranked by score, ties by doc_id.
    std::map<std::string, std::vector<std::pair<double, std::string>>> pools;
    for (std::size_t i : idx) {
      pools[corpus.at(test[i].doc_id).entity_id].emplace_back(scores[i], test[i].doc_id);
    }
    double total = 0.0;
    std::size_t counted = 0;
    for (auto& [entity, ranked] : pools) {
      std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
      std::vector<double> rel;
      bool any = false;
      for (const auto& [s, id] : ranked) {
        auto it = gold_coverage.find({id, relation});
        rel.push_back(it == gold_coverage.end() ? 0.0 : it->second);
        any = any || rel.back() > 0.0;
      }
      if (!any) continue;
      total += ndcg(rel);
      ++counted;
    }
    row.ndcg = counted > 0 ? total / static_cast<double>(counted) : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json report_json(const std::vector<ReportRow>& rows) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rows) {
    a.push_back({{"relation", r.relation},
                 {"method", r.method},
                 {"optimal_f1", r.prf.f1},
                 {"threshold", finite_threshold(r.prf.threshold)},
                 {"precision", r.prf.precision},
                 {"recall", r.prf.recall},
                 {"ndcg", r.ndcg},
                 {"n_test", r.n_test}});
  }
  return a;
}

}  // namespace covrank
