#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "covrank/features.hpp"
#include "covrank/vectorize.hpp"

namespace covrank {

struct TrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 1e-5;
  double adam_epsilon = 1e-9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  std::size_t epochs = 200;
  double l2_penalty = 0.0;
  std::uint64_t seed = 0;
  // Diagnostic: one plain gradient-descent step per epoch over the full set.
  bool full_batch_gd = false;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct Standardization {
  double mean = 0.0;
  double stddev = 1.0;

  friend bool operator==(const Standardization&, const Standardization&) = default;
};

// Features with a standard deviation below this are treated as constant and
// keep a zero weight.
inline constexpr double kConstantStddev = 1e-12;

// Per-feature z-scores from the rows (population standard deviation).
std::vector<Standardization> fit_standardization(const std::vector<SparseVector>& rows,
                                                 std::size_t dimension);

// Sparse view of a dense row; zeros are kept so every column is explicit.
SparseVector dense_row(const std::vector<double>& x);
std::vector<SparseVector> dense_rows(const std::vector<std::vector<double>>& xs);

class LogisticModel {
 public:
  LogisticModel() = default;
  LogisticModel(std::size_t dimension, std::vector<Standardization> standardization);

  std::size_t dimension() const { return weights.size(); }
  bool frozen(std::size_t j) const { return standardization[j].stddev < kConstantStddev; }

  // b + sum_j w_j * (x_j - mean_j) / std_j; evaluated sparsely.
  double logit(const SparseVector& x) const;
  double predict(const SparseVector& x) const;
  double predict(const std::vector<double>& x) const { return predict(dense_row(x)); }

  // Parameters flattened as [w_0 .. w_{d-1}, b].
  std::vector<double> parameters() const;
  void set_parameters(const std::vector<double>& p);
  std::size_t parameter_count() const { return weights.size() + 1; }

  nlohmann::json to_json() const;
  static LogisticModel from_json(const nlohmann::json& j);

  std::vector<double> weights;
  double bias = 0.0;
  std::vector<Standardization> standardization;
};

double sigmoid(double z);

// Mean binary cross-entropy plus (l2 / 2) * ||w||^2 (bias not penalized).
double lr_loss(const LogisticModel& model, const std::vector<SparseVector>& xs,
               const std::vector<int>& ys, double l2_penalty = 0.0);
// Gradient of lr_loss, flattened like LogisticModel::parameters().
std::vector<double> lr_gradient(const LogisticModel& model, const std::vector<SparseVector>& xs,
                                const std::vector<int>& ys, double l2_penalty = 0.0);

// Loss after each epoch; for diagnostics.
struct TrainTrace {
  std::vector<double> epoch_loss;
};

// Fits the standardization on `xs`, starts from zero weights and runs
// mini-batch Adam. Throws Error on dimension mismatch or a single class.
LogisticModel train_lr(const std::vector<SparseVector>& xs, const std::vector<int>& ys,
                       std::size_t dimension, const TrainConfig& config,
                       TrainTrace* trace = nullptr);
LogisticModel train_lr(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
                       const TrainConfig& config);

double predict_lr(const LogisticModel& model, const SparseVector& x);
double predict_lr(const LogisticModel& model, const std::vector<double>& x);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
  // In-place update; parameters with `frozen[i]` set are left untouched.
  void step(std::vector<double>& params, const std::vector<double>& grad,
            const TrainConfig& config, const std::vector<bool>& frozen);
};

// One input example for the stacked model.
struct StackedInput {
  SparseVector tfidf;
  FeatureVector heuristics;
};

// Seven level-1 regressions (TF-IDF, then one per heuristic) whose centred
// probabilities p_j - 0.5 feed a level-2 regression. Trained end-to-end.
class StackedModel {
 public:
  static constexpr std::size_t kLevel1 = 1 + FeatureVector::kSize;

  StackedModel() = default;
  // Zero level-1 weights; level-2 weights start at 1 so gradients reach level 1.
  StackedModel(std::vector<LogisticModel> level1, LogisticModel level2);

  double predict(const StackedInput& x) const;
  std::array<double, kLevel1> level1_probabilities(const StackedInput& x) const;

  std::vector<double> parameters() const;
  void set_parameters(const std::vector<double>& p);
  std::size_t parameter_count() const;
  std::vector<bool> frozen_mask() const;

  nlohmann::json to_json() const;
  static StackedModel from_json(const nlohmann::json& j);

  std::vector<LogisticModel> level1;
  LogisticModel level2;
};

// Untrained stacked model with standardization fitted on `xs`.
StackedModel init_stacked(const std::vector<StackedInput>& xs, std::size_t tfidf_dimension);

double stacked_loss(const StackedModel& model, const std::vector<StackedInput>& xs,
                    const std::vector<int>& ys, double l2_penalty = 0.0);
std::vector<double> stacked_gradient(const StackedModel& model, const std::vector<StackedInput>& xs,
                                     const std::vector<int>& ys, double l2_penalty = 0.0);

StackedModel train_stacked(const std::vector<StackedInput>& xs, const std::vector<int>& ys,
                           std::size_t tfidf_dimension, const TrainConfig& config);

class HerbModel {
 public:
  static constexpr std::size_t kFusionDimension = 1 + FeatureVector::kSize;

  double predict(const std::vector<double>& embedding, const FeatureVector& heuristics) const;
  // [p_embedding, heuristics...]
  std::vector<double> fusion_input(const std::vector<double>& embedding,
                                   const FeatureVector& heuristics) const;

  nlohmann::json to_json() const;
  static HerbModel from_json(const nlohmann::json& j);

  LogisticModel embedding_classifier;
  LogisticModel fusion;
};

// Trains the embedding classifier, freezes it, then trains the fusion layer.
// Throws Error naming every doc_id that lacks an embedding.
HerbModel train_herb(const EmbeddingStore& embeddings, const std::vector<std::string>& doc_ids,
                     const std::vector<FeatureVector>& heuristics, const std::vector<int>& ys,
                     const TrainConfig& config);

}  // namespace covrank
