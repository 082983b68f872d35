#include <gtest/gtest.h>

#include <json.hpp>

#include "covrank/cli.hpp"
#include "covrank/corpus.hpp"
#include "covrank/vectorize.hpp"
#include "test_util.hpp"

namespace covrank {
namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "covrank");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

// One synthetic corpus with labels and features, shared by the tests below.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir();
    const std::string d = dir_->path().string();
    ASSERT_EQ(run({"--seed", "2", "synth", "--out", d, "--entities", "12", "--docs-per-entity", "15",
                   "--dimension", "8"}),
              0);
    ASSERT_EQ(run({"--seed", "2", "coverage", "--docs", d + "/documents.jsonl", "--tuples", d + "/tuples.jsonl",
                   "--gt", d + "/gt.jsonl", "--aliases", d + "/aliases.jsonl", "--out", d + "/labels.jsonl"}),
              0);
    ASSERT_EQ(run({"featurize", "--docs", d + "/documents.jsonl", "--labels", d + "/labels.jsonl", "--aliases",
                   d + "/aliases.jsonl", "--popularity", d + "/popularity.tsv", "--mentions",
                   d + "/mentions.jsonl", "--out", d + "/features.jsonl"}),
              0);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  static std::string p(const std::string& name) { return (dir_->path() / name).string(); }

  static std::vector<std::string> inputs() {
    return {"--docs", p("documents.jsonl"), "--features", p("features.jsonl"), "--mentions", p("mentions.jsonl"),
            "--embeddings", p("embeddings.bin")};
  }

  static std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  }

  static std::string first_entity() {
    const Corpus c = load_corpus(p("documents.jsonl"), {}, {});
    return c.documents.front().entity_id;
  }

  static testing::TempDir* dir_;
};

testing::TempDir* CliTest::dir_ = nullptr;

TEST_F(CliTest, PipelineFilesExist) {
  for (const char* name : {"documents.jsonl", "labels.jsonl", "features.jsonl", "embeddings.bin"}) {
    EXPECT_FALSE(testing::read_file(p(name)).empty()) << name;
  }
}

TEST_F(CliTest, TrainEvaluateEveryModel) {
  for (const char* model : {"lr", "tfidf", "stacked", "herb", "heuristic:bm25"}) {
    const std::string out = p(std::string("model-") + model + ".json");
    ASSERT_EQ(run(with({"train", "--model", model, "--labels", p("labels.jsonl"), "--epochs", "5", "--out", out},
                       inputs())),
              0)
        << model;
    const std::string report = p(std::string("report-") + model + ".json");
    ASSERT_EQ(run(with({"evaluate", "--model", out, "--labels", p("labels.jsonl"), "--out", report}, inputs())), 0)
        << model;
    const auto j = nlohmann::json::parse(testing::read_file(report));
    ASSERT_TRUE(j.is_array());
    EXPECT_EQ(j[0].at("relation"), "founded-by");
    for (const char* key : {"method", "optimal_f1", "threshold", "precision", "recall", "ndcg", "n_test"}) {
      EXPECT_TRUE(j[0].contains(key)) << key;
    }
  }
}

TEST_F(CliTest, RankBudgetRefute) {
  const std::string e = first_entity();
  ASSERT_EQ(run(with({"train", "--model", "lr", "--labels", p("labels.jsonl"), "--epochs", "5", "--out",
                      p("lr.json")},
                     inputs())),
            0);
  for (const char* method : {"random", "ir_bm25", "coverage_oracle", "coverage_prediction"}) {
    EXPECT_EQ(run(with({"rank", "--entity", e, "--relation", "founded-by", "--method", method, "--labels",
                        p("labels.jsonl"), "--model", p("lr.json"), "--out", p("rank.csv")},
                       inputs())),
              0)
        << method;
    EXPECT_EQ(testing::read_file(p("rank.csv")).substr(0, 24), "rank,doc_id,method,score");
  }
  EXPECT_EQ(run(with({"rank", "--entity", e, "--relation", "founded-by", "--method", "coverage_oracle", "--out",
                      p("rank.csv")},
                     inputs())),
            1);

  EXPECT_EQ(run(with({"budget", "--entity", e, "--relation", "founded-by", "--tuples", p("tuples.jsonl"),
                      "--aliases", p("aliases.jsonl"), "--policy", "prioritized", "--model", p("lr.json"), "--out",
                      p("budget.json")},
                     inputs())),
            0);
  const auto budget = nlohmann::json::parse(testing::read_file(p("budget.json")));
  EXPECT_EQ(budget.at("policy"), "prioritized");
  EXPECT_LE(budget.at("seconds_used").get<double>(), 600.0);

  EXPECT_EQ(run(with({"refute", "--tuples", p("tuples.jsonl"), "--aliases", p("aliases.jsonl"), "--labels",
                      p("labels.jsonl"), "--out", p("refute.jsonl")},
                     inputs())),
            0);
  EXPECT_EQ(run(with({"refute", "--tuples", p("tuples.jsonl"), "--out", p("refute.jsonl")}, inputs())), 2);
}

TEST_F(CliTest, EmbedCheck) {
  EXPECT_EQ(run({"embed-check", "--embeddings", p("embeddings.bin"), "--docs", p("documents.jsonl"), "--out",
                 p("check.json")}),
            0);
  auto j = nlohmann::json::parse(testing::read_file(p("check.json")));
  EXPECT_TRUE(j.at("ok").get<bool>());
  EXPECT_EQ(j.at("dimension"), 8);

  EmbeddingStore partial = load_embeddings(p("embeddings.bin"));
  EmbeddingStore smaller(partial.dimension());
  for (std::size_t i = 1; i < partial.size(); ++i) smaller.add(partial.ids()[i], partial.at(partial.ids()[i]));
  smaller.add("stranger", std::vector<float>(partial.dimension(), 0.5f));
  save_embeddings(smaller, p("partial.bin"));
  EXPECT_EQ(run({"embed-check", "--embeddings", p("partial.bin"), "--docs", p("documents.jsonl"), "--out",
                 p("check2.json")}),
            1);
  j = nlohmann::json::parse(testing::read_file(p("check2.json")));
  EXPECT_FALSE(j.at("ok").get<bool>());
  EXPECT_EQ(j.at("missing").size(), 1u);
  EXPECT_EQ(j.at("extra")[0], "stranger");

  testing::write_file(p("garbage.bin"), "NOPE");
  EXPECT_EQ(run({"embed-check", "--embeddings", p("garbage.bin"), "--out", p("check3.json")}), 2);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"coverage", "--docs", p("nope.jsonl"), "--tuples", p("tuples.jsonl"), "--gt", p("gt.jsonl"),
                 "--out", p("x.jsonl")}),
            2);
  EXPECT_EQ(run({"train", "--model", "herb", "--labels", p("labels.jsonl"), "--features", p("features.jsonl"),
                 "--out", p("h.json")}),
            2);
  EXPECT_EQ(run({"frobnicate"}), 2);
  EXPECT_EQ(run({"coverage", "--bogus-flag"}), 2);
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"train", "--model", "bert", "--labels", p("labels.jsonl"), "--out", p("b.json")}), 1);
}

TEST_F(CliTest, SameSeedSameBytes) {
  const std::vector<std::string> args = {"--docs", p("documents.jsonl"), "--tuples", p("tuples.jsonl"),
                                         "--gt",   p("gt.jsonl"),        "--aliases", p("aliases.jsonl"),
                                         "--variant", "web"};
  ASSERT_EQ(run(with({"--seed", "5", "coverage", "--out", p("l1.jsonl")}, args)), 0);
  ASSERT_EQ(run(with({"--seed", "5", "coverage", "--out", p("l2.jsonl")}, args)), 0);
  EXPECT_EQ(testing::read_file(p("l1.jsonl")), testing::read_file(p("l2.jsonl")));
  for (const char* out : {"t1.json", "t2.json"}) {
    ASSERT_EQ(run(with({"--seed", "5", "train", "--model", "stacked", "--labels", p("labels.jsonl"), "--epochs", "3",
                        "--out", p(out)},
                       inputs())),
              0);
  }
  EXPECT_EQ(testing::read_file(p("t1.json")), testing::read_file(p("t2.json")));
}

}  // namespace
}  // namespace covrank
