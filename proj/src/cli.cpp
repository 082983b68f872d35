#include "covrank/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "covrank/apps.hpp"
#include "covrank/corpus.hpp"
#include "covrank/coverage.hpp"
#include "covrank/error.hpp"
#include "covrank/features.hpp"
#include "covrank/jsonl.hpp"
#include "covrank/pipeline.hpp"
#include "covrank/synthgen.hpp"
#include "covrank/vectorize.hpp"

namespace covrank::cli {
namespace {

// A flag combination the parser cannot express, e.g. --model herb without
// --embeddings. Reported like any other usage error.
class UsageError : public IoError {
 public:
  using IoError::IoError;
};

std::shared_ptr<spdlog::logger> logger() {
  if (auto l = spdlog::get("covrank")) return l;
  auto l = spdlog::stderr_logger_mt("covrank");
  l->set_pattern("[%l] %v");
  return l;
}

void configure_logging() {
  auto log = logger();
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("COVRANK_LOG")) {
    const std::string v = env;
    if (v == "error") level = spdlog::level::err;
    else if (v == "debug") level = spdlog::level::debug;
    else if (v != "info") log->warn("ignoring COVRANK_LOG={} (expected error, info or debug)", v);
  }
  log->set_level(level);
}

void require(const std::string& value, const char* flag, const std::string& why) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required " + why);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out = jsonl::open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

AliasTable aliases_or_empty(const std::string& path) {
  return path.empty() ? AliasTable{} : load_aliases(path);
}

MentionProvider mentions_or_heuristic(const std::string& path) {
  return path.empty() ? MentionProvider::heuristic() : MentionProvider::from_file(path);
}

// Inputs a trained model may need to score documents.
struct ModelInputs {
  std::string docs;
  std::string features;
  std::string mentions;
  std::string embeddings;

  void add_to(CLI::App* app) {
    app->add_option("--docs", docs, "documents.jsonl");
    app->add_option("--features", features, "features.jsonl");
    app->add_option("--mentions", mentions, "mentions.jsonl (default: capitalized-run heuristic)");
    app->add_option("--embeddings", embeddings, "embedding file");
  }
};

// Owns whatever a ScoringContext points at.
struct LoadedInputs {
  Corpus corpus;
  MentionProvider mentions = MentionProvider::heuristic();
  FeatureTable features;
  EmbeddingStore embeddings;
  ScoringContext context;
};

bool needs_text(ModelKind k) {
  return k == ModelKind::kTfidf || k == ModelKind::kNgrams || k == ModelKind::kStacked;
}
bool needs_features(ModelKind k) {
  return k == ModelKind::kLr || k == ModelKind::kStacked || k == ModelKind::kHerb ||
         k == ModelKind::kHeuristic;
}

void load_inputs(const ModelInputs& in, ModelKind kind, LoadedInputs& out, bool corpus_needed) {
  const std::string why = "for --model " + ModelSpec{kind, {}}.name();
  if (needs_text(kind)) require(in.docs, "--docs", why);
  if (needs_features(kind)) require(in.features, "--features", why);
  if (kind == ModelKind::kHerb) require(in.embeddings, "--embeddings", why);
  if (corpus_needed) require(in.docs, "--docs", "");

  if (!in.docs.empty()) {
    out.corpus = load_corpus(in.docs, {}, {});
    out.context.corpus = &out.corpus;
  }
  out.mentions = mentions_or_heuristic(in.mentions);
  out.context.mentions = &out.mentions;
  if (!in.features.empty()) {
    out.features = feature_table(read_features(in.features));
    out.context.features = &out.features;
  }
  if (!in.embeddings.empty()) {
    out.embeddings = load_embeddings(in.embeddings);
    out.context.embeddings = &out.embeddings;
  }
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  SynthConfig config;
  std::vector<std::string> relations;
};

void cmd_synth(SynthArgs& a, std::uint64_t seed) {
  a.config.seed = seed;
  if (!a.relations.empty()) {
    a.config.relations.clear();
    for (const auto& r : a.relations) a.config.relations.push_back(parse_relation(r));
  }
  a.config.validate();
  const SynthCorpus synth = generate(a.config);
  write_synth(synth, a.out);
  logger()->info("wrote {} documents and {} tuples to {}", synth.corpus.documents.size(),
                 synth.corpus.tuples.size(), a.out);
}

struct CoverageArgs {
  std::string docs, tuples, gt, aliases, out;
  std::string variant = "wiki";
  std::string split_key = "entity";
  std::string relation;
  double percentile = 0.85;
  double absolute = 0.5;
  bool keep_degenerate = false;
};

void cmd_coverage(const CoverageArgs& a, std::uint64_t seed) {
  Corpus corpus = load_corpus(a.docs, a.tuples, a.gt);
  if (!a.relation.empty()) {
    const Relation r = parse_relation(a.relation);
    std::erase_if(corpus.tuples, [&](const ExtractionTuple& t) { return t.relation != r; });
    std::erase_if(corpus.ground_truths, [&](const auto& kv) { return kv.first.relation != r; });
  }
  const AliasTable aliases = aliases_or_empty(a.aliases);
  LabelingOptions opts;
  opts.variant = parse_variant(a.variant);
  opts.binarize = {a.percentile, a.absolute};
  opts.keep_degenerate = a.keep_degenerate;
  opts.group_key = parse_group_key(a.split_key);
  opts.seed = seed;
  const auto rows = build_labels(corpus, aliases, opts);
  write_labels(a.out, rows);
  std::size_t positives = 0;
  for (const auto& r : rows) positives += static_cast<std::size_t>(r.label.label);
  logger()->info("labeled {} documents ({} informative)", rows.size(), positives);
}

struct FeaturizeArgs {
  std::string docs, labels, aliases, popularity, mentions, out;
};

void cmd_featurize(const FeaturizeArgs& a) {
  const Corpus corpus = load_corpus(a.docs, {}, {});
  const auto labels = read_labels(a.labels);
  const AliasTable aliases = aliases_or_empty(a.aliases);
  const PopularityTable popularity = a.popularity.empty() ? PopularityTable{} : load_popularity(a.popularity);
  const MentionProvider mentions = mentions_or_heuristic(a.mentions);
  FeatureConfig config;
  config.aliases = &aliases;
  config.popularity = &popularity;
  config.mentions = &mentions;
  const auto rows = featurize_labels(corpus, labels, config);
  write_features(a.out, rows);
  logger()->info("wrote {} feature rows", rows.size());
}

struct TrainArgs {
  std::string model, labels, out;
  ModelInputs inputs;
  ModelOptions options;
};

void cmd_train(TrainArgs& a, std::uint64_t seed) {
  const ModelSpec spec = parse_model_spec(a.model);
  LoadedInputs in;
  load_inputs(a.inputs, spec.kind, in, false);
  const auto rows = read_labels(a.labels);

  std::vector<LabeledDocument> train_docs;
  std::vector<std::string> vocabulary_docs;
  for (const auto& r : rows) {
    if (r.split != Split::kTrain) continue;
    train_docs.push_back(r.label);
    vocabulary_docs.push_back(r.label.doc_id);
  }
  std::sort(vocabulary_docs.begin(), vocabulary_docs.end());
  vocabulary_docs.erase(std::unique(vocabulary_docs.begin(), vocabulary_docs.end()), vocabulary_docs.end());

  a.options.train.seed = seed;
  a.options.train.validate();
  const auto train = examples(undersample(train_docs, seed));
  const auto validation = examples(rows, Split::kValidation);
  logger()->info("training {} on {} balanced examples", spec.name(), train.size());
  const TrainedModel m = train_model(spec, train, validation, vocabulary_docs, in.context, a.options);
  m.save(a.out);
  logger()->info("decision threshold {:.6g}", m.threshold);
}

struct EvaluateArgs {
  std::string model, labels, out;
  std::string split = "test";
  ModelInputs inputs;
};

void cmd_evaluate(const EvaluateArgs& a) {
  const TrainedModel m = TrainedModel::load(a.model);
  LoadedInputs in;
  load_inputs(a.inputs, m.spec.kind, in, true);
  const auto rows = read_labels(a.labels);
  const auto items = examples(rows, parse_split(a.split));
  if (items.empty()) throw Error("no labeled documents in the " + a.split + " split");
  std::map<FeatureKey, double> gold;
  for (const auto& r : rows) gold[{r.label.doc_id, r.label.relation}] = r.label.coverage;
  const auto scores = score_examples(m, items, in.context);
  const auto report = evaluate_scores(m.spec.name(), items, scores, in.corpus, gold);
  write_json(a.out, report_json(report));
  for (const auto& r : report) {
    logger()->info("{} {}: F1 {:.4f}, nDCG {:.4f}, n={}", r.method, r.relation, r.prf.f1, r.ndcg,
                   r.n_test);
  }
}

// Gold coverage per doc for (entity, relation), taken from a labels file.
std::map<std::string, double> gold_from_labels(const std::string& path, const std::string& entity,
                                               Relation relation) {
  std::map<std::string, double> out;
  if (path.empty()) return out;
  for (const auto& r : read_labels(path)) {
    if (r.label.entity_id == entity && r.label.relation == relation) out[r.label.doc_id] = r.label.coverage;
  }
  return out;
}

std::map<std::string, double> predictions(const std::string& model_path, const ModelInputs& inputs,
                                          const std::vector<std::string>& doc_ids, Relation relation) {
  const TrainedModel m = TrainedModel::load(model_path);
  LoadedInputs in;
  load_inputs(inputs, m.spec.kind, in, false);
  std::vector<Example> items;
  for (const auto& id : doc_ids) items.push_back({id, relation, 0});
  const auto scores = score_examples(m, items, in.context);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < items.size(); ++i) out[items[i].doc_id] = scores[i];
  return out;
}

std::vector<std::string> entity_doc_ids(const Corpus& corpus, const std::string& entity) {
  std::vector<std::string> ids;
  for (auto i : corpus.documents_for(entity)) ids.push_back(corpus.documents[i].doc_id);
  if (ids.empty()) throw Error("no documents for entity \"" + entity + "\"");
  return ids;
}

struct RankArgs {
  std::string entity, relation, method, labels, model, out;
  ModelInputs inputs;
};

void cmd_rank(const RankArgs& a, std::uint64_t seed) {
  require(a.inputs.docs, "--docs", "");
  const Relation relation = parse_relation(a.relation);
  RankingMethod method{parse_ranking_method(a.method), seed};
  const Corpus corpus = load_corpus(a.inputs.docs, {}, {});
  const auto ids = entity_doc_ids(corpus, a.entity);

  std::map<std::string, double> scores;
  switch (method.kind) {
    case RankingMethod::Kind::kRandom: break;
    case RankingMethod::Kind::kIrBm25: {
      std::vector<std::pair<std::string, std::string>> pool;
      for (const auto& id : ids) pool.emplace_back(id, corpus.at(id).text);
      const Bm25Index index(pool);
      const auto query = bm25_query(a.entity, relation);
      for (const auto& id : ids) scores[id] = index.score(query, id);
      break;
    }
    case RankingMethod::Kind::kCoveragePrediction:
      require(a.model, "--model", "for --method coverage_prediction");
      scores = predictions(a.model, a.inputs, ids, relation);
      break;
    case RankingMethod::Kind::kOracle:
      scores = gold_from_labels(a.labels, a.entity, relation);
      break;
  }
  const auto ranked = rank_documents(ids, method, scores);
  write_ranking_csv(a.out, ranked, method.kind);
  logger()->info("ranked {} documents by {}", ranked.size(), to_string(method.kind));
}

struct BudgetArgs {
  std::string entity, relation, tuples, aliases, model, out;
  std::string policy = "baseline_random";
  double budget = 600.0;
  CostCalibration calibration;
  ModelInputs inputs;
};

void cmd_budget(const BudgetArgs& a, std::uint64_t seed) {
  require(a.inputs.docs, "--docs", "");
  const Relation relation = parse_relation(a.relation);
  BudgetPolicy policy{BudgetPolicy::Kind::kBaselineRandom, seed};
  if (a.policy == "prioritized") policy.kind = BudgetPolicy::Kind::kPrioritized;
  else if (a.policy != "baseline_random") throw UsageError("--policy must be baseline_random or prioritized");

  const Corpus corpus = load_corpus(a.inputs.docs, a.tuples, {});
  const AliasTable aliases = aliases_or_empty(a.aliases);
  const MentionProvider mentions = mentions_or_heuristic(a.inputs.mentions);

  std::vector<std::size_t> lengths;
  std::vector<std::size_t> mention_counts;
  std::map<std::string, std::size_t> mention_count_of;
  for (const auto& d : corpus.documents) {
    lengths.push_back(doc_length(d));
    mention_counts.push_back(mentions.mentions(d).size());
    mention_count_of[d.doc_id] = mention_counts.back();
  }
  const CostModel cost = calibrate_costs(lengths, mention_counts, a.calibration);

  const auto ids = entity_doc_ids(corpus, a.entity);
  std::map<std::string, double> predicted;
  if (policy.kind == BudgetPolicy::Kind::kPrioritized) {
    require(a.model, "--model", "for --policy prioritized");
    predicted = predictions(a.model, a.inputs, ids, relation);
  }
  std::vector<BudgetDocument> docs;
  for (const auto& id : ids) {
    docs.push_back({id, doc_length(corpus.at(id)), mention_count_of.at(id),
                    extracted_objects(corpus, id, a.entity, relation, aliases),
                    predicted.contains(id) ? predicted.at(id) : 0.0});
  }
  const BudgetResult r = simulate_budget(docs, cost, a.budget, policy);
  write_json(a.out, {{"policy", to_string(policy.kind)},
                     {"budget_s", a.budget},
                     {"re_count", r.re_count},
                     {"docs_processed", r.docs_processed},
                     {"seconds_used", r.seconds_used}});
  logger()->info("{}: {} tuples from {} documents in {:.1f} s", to_string(policy.kind), r.re_count,
                 r.docs_processed, r.seconds_used);
}

struct RefuteArgs {
  std::string tuples, aliases, entity, relation, labels, model, out;
  std::size_t max_support = 1;
  double threshold = 0.5;
  ModelInputs inputs;
};

void cmd_refute(const RefuteArgs& a) {
  require(a.inputs.docs, "--docs", "");
  if (a.labels.empty() == a.model.empty()) {
    throw UsageError("exactly one of --labels (gold coverage) or --model (predicted coverage) is required");
  }
  const Corpus corpus = load_corpus(a.inputs.docs, a.tuples, {});
  const AliasTable aliases = aliases_or_empty(a.aliases);

  std::set<std::pair<std::string, Relation>> pools;
  for (const auto& t : corpus.tuples) {
    const std::string& e = corpus.at(t.doc_id).entity_id;
    if (!a.entity.empty() && e != a.entity) continue;
    if (!a.relation.empty() && t.relation != parse_relation(a.relation)) continue;
    pools.insert({e, t.relation});
  }

  std::vector<Claim> claims;
  std::map<CoverageKey, double> coverage;
  for (const auto& [entity, relation] : pools) {
    auto found = collect_claims(corpus, entity, relation, aliases, a.max_support);
    if (found.empty()) continue;
    claims.insert(claims.end(), found.begin(), found.end());
    const auto scores = a.model.empty() ? gold_from_labels(a.labels, entity, relation)
                                        : predictions(a.model, a.inputs, entity_doc_ids(corpus, entity), relation);
    for (const auto& [doc_id, c] : scores) coverage[{doc_id, entity, relation}] = c;
  }
  const auto reports = refute_claims(claims, coverage, a.threshold);
  write_refutations(a.out, reports);
  const auto flagged = std::count_if(reports.begin(), reports.end(),
                                     [](const RefutationReport& r) { return r.verdict == Verdict::kLikelyFalse; });
  logger()->info("{} low-support claims, {} likely false", reports.size(), flagged);
}

struct EmbedCheckArgs {
  std::string embeddings, docs, out;
};

// Returns false when the embedding ids differ from the corpus ids.
bool cmd_embed_check(const EmbedCheckArgs& a) {
  const EmbeddingStore store = load_embeddings(a.embeddings);
  nlohmann::json report = {{"count", store.size()}, {"dimension", store.dimension()}};
  bool ok = true;
  if (!a.docs.empty()) {
    const Corpus corpus = load_corpus(a.docs, {}, {});
    std::set<std::string> doc_ids;
    for (const auto& d : corpus.documents) doc_ids.insert(d.doc_id);
    const std::set<std::string> stored(store.ids().begin(), store.ids().end());
    std::vector<std::string> missing;
    std::vector<std::string> extra;
    std::set_difference(doc_ids.begin(), doc_ids.end(), stored.begin(), stored.end(), std::back_inserter(missing));
    std::set_difference(stored.begin(), stored.end(), doc_ids.begin(), doc_ids.end(), std::back_inserter(extra));
    ok = missing.empty() && extra.empty();
    report["corpus_documents"] = doc_ids.size();
    report["missing"] = missing;
    report["extra"] = extra;
  }
  report["ok"] = ok;
  write_json(a.out, report);
  if (!ok) logger()->error("embedding ids do not match the corpus");
  return ok;
}

}  // namespace

int run(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Document coverage prediction for relation extraction", "covrank"};
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for every random choice")->capture_default_str();

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic corpus with planted coverage");
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--entities", synth.config.n_entities)->capture_default_str();
  s->add_option("--docs-per-entity", synth.config.docs_per_entity)->capture_default_str();
  s->add_option("--gt-size", synth.config.gt_size)->capture_default_str();
  s->add_option("--signal", synth.config.signal_strength)->capture_default_str();
  s->add_option("--embedding-signal", synth.config.embedding_signal)->capture_default_str();
  s->add_option("--dimension", synth.config.embedding_dimension)->capture_default_str();
  s->add_option("--relations", synth.relations, "relations, assigned to entities round-robin");

  CoverageArgs cov;
  auto* c = app.add_subcommand("coverage", "compute coverage, binary labels and splits");
  c->add_option("--docs", cov.docs)->required();
  c->add_option("--tuples", cov.tuples)->required();
  c->add_option("--gt", cov.gt)->required();
  c->add_option("--aliases", cov.aliases);
  c->add_option("--variant", cov.variant, "wiki, web or wikiweb")->capture_default_str();
  c->add_option("--relation", cov.relation, "only this relation");
  c->add_option("--percentile", cov.percentile)->capture_default_str();
  c->add_option("--absolute", cov.absolute)->capture_default_str();
  c->add_option("--split-key", cov.split_key, "entity, site_domain or sub_domain")->capture_default_str();
  c->add_flag("--keep-degenerate", cov.keep_degenerate, "keep documents whose ground truth is empty");
  c->add_option("--out", cov.out, "labels.jsonl")->required();

  FeaturizeArgs feat;
  auto* f = app.add_subcommand("featurize", "compute heuristic features for labeled documents");
  f->add_option("--docs", feat.docs)->required();
  f->add_option("--labels", feat.labels)->required();
  f->add_option("--aliases", feat.aliases);
  f->add_option("--popularity", feat.popularity, "popularity.tsv");
  f->add_option("--mentions", feat.mentions, "mentions.jsonl (default: capitalized-run heuristic)");
  f->add_option("--out", feat.out, "features.jsonl")->required();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train a coverage classifier");
  t->add_option("--model", train.model, "lr, tfidf, ngrams, stacked, herb or heuristic:<feature>")->required();
  t->add_option("--labels", train.labels)->required();
  train.inputs.add_to(t);
  t->add_option("--epochs", train.options.train.epochs)->capture_default_str();
  t->add_option("--learning-rate", train.options.train.learning_rate)->capture_default_str();
  t->add_option("--batch-size", train.options.train.batch_size)->capture_default_str();
  t->add_option("--l2", train.options.train.l2_penalty)->capture_default_str();
  t->add_option("--min-df", train.options.vocabulary.min_df)->capture_default_str();
  t->add_option("--max-features", train.options.vocabulary.max_features)->capture_default_str();
  t->add_option("--out", train.out, "model.json")->required();

  EvaluateArgs eval;
  auto* e = app.add_subcommand("evaluate", "score a split and write report.json");
  e->add_option("--model", eval.model, "model.json")->required();
  e->add_option("--labels", eval.labels)->required();
  e->add_option("--split", eval.split)->capture_default_str();
  eval.inputs.add_to(e);
  e->add_option("--out", eval.out, "report.json")->required();

  RankArgs rank;
  auto* r = app.add_subcommand("rank", "rank one entity's documents");
  r->add_option("--entity", rank.entity)->required();
  r->add_option("--relation", rank.relation)->required();
  r->add_option("--method", rank.method, "random, ir_bm25, coverage_prediction or coverage_oracle")->required();
  r->add_option("--labels", rank.labels, "gold coverage for coverage_oracle");
  r->add_option("--model", rank.model, "model.json for coverage_prediction");
  rank.inputs.add_to(r);
  r->add_option("--out", rank.out, "ranking.csv")->required();

  BudgetArgs budget;
  auto* b = app.add_subcommand("budget", "simulate extraction under a time budget");
  b->add_option("--entity", budget.entity)->required();
  b->add_option("--relation", budget.relation)->required();
  b->add_option("--tuples", budget.tuples)->required();
  b->add_option("--aliases", budget.aliases);
  b->add_option("--policy", budget.policy, "baseline_random or prioritized")->capture_default_str();
  b->add_option("--model", budget.model, "model.json for prioritized");
  b->add_option("--budget", budget.budget, "seconds")->capture_default_str();
  b->add_option("--predictor-mean", budget.calibration.predictor_mean)->capture_default_str();
  b->add_option("--extractor-mean", budget.calibration.extractor_mean)->capture_default_str();
  budget.inputs.add_to(b);
  b->add_option("--out", budget.out, "budget_report.json")->required();

  RefuteArgs refute;
  auto* rf = app.add_subcommand("refute", "rank low-support claims by counter-evidence");
  rf->add_option("--tuples", refute.tuples)->required();
  rf->add_option("--aliases", refute.aliases);
  rf->add_option("--entity", refute.entity, "only this entity");
  rf->add_option("--relation", refute.relation, "only this relation");
  rf->add_option("--labels", refute.labels, "gold coverage");
  rf->add_option("--model", refute.model, "model.json for predicted coverage");
  rf->add_option("--max-support", refute.max_support)->capture_default_str();
  rf->add_option("--threshold", refute.threshold)->capture_default_str();
  refute.inputs.add_to(rf);
  rf->add_option("--out", refute.out, "refutation.jsonl")->required();

  EmbedCheckArgs check;
  auto* ec = app.add_subcommand("embed-check", "validate an embedding file against a corpus");
  ec->add_option("--embeddings", check.embeddings)->required();
  ec->add_option("--docs", check.docs);
  ec->add_option("--out", check.out, "report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*s) cmd_synth(synth, seed);
    else if (*c) cmd_coverage(cov, seed);
    else if (*f) cmd_featurize(feat);
    else if (*t) cmd_train(train, seed);
    else if (*e) cmd_evaluate(eval);
    else if (*r) cmd_rank(rank, seed);
    else if (*b) cmd_budget(budget, seed);
    else if (*rf) cmd_refute(refute);
    else if (*ec && !cmd_embed_check(check)) return 1;
  } catch (const IoError& err) {
    logger()->error("{}", err.what());
    return 2;
  } catch (const Error& err) {
    logger()->error("{}", err.what());
    return 1;
  } catch (const std::exception& err) {
    logger()->error("{}", err.what());
    return 1;
  }
  return 0;
}

}  // namespace covrank::cli
