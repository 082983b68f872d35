#include "covrank/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "covrank/error.hpp"
#include "covrank/rng.hpp"

namespace covrank {

void TrainConfig::validate() const {
  if (batch_size == 0) throw Error("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw Error("learning_rate must be positive");
  if (!(adam_epsilon > 0.0)) throw Error("adam_epsilon must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw Error("Adam betas must lie in [0, 1)");
  }
  if (!(l2_penalty >= 0.0)) throw Error("l2_penalty must be >= 0");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"batch_size", batch_size},     {"learning_rate", learning_rate},
          {"adam_epsilon", adam_epsilon}, {"adam_beta1", adam_beta1},
          {"adam_beta2", adam_beta2},     {"epochs", epochs},
          {"l2_penalty", l2_penalty},     {"seed", seed},
          {"full_batch_gd", full_batch_gd}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.epochs = j.value("epochs", c.epochs);
    c.l2_penalty = j.value("l2_penalty", c.l2_penalty);
    c.seed = j.value("seed", c.seed);
    c.full_batch_gd = j.value("full_batch_gd", c.full_batch_gd);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed train config: ") + e.what());
  }
  return c;
}

std::vector<Standardization> fit_standardization(const std::vector<SparseVector>& rows,
                                                 std::size_t dimension) {
  std::vector<double> sum(dimension, 0.0);
  for (const SparseVector& r : rows) {
    for (const auto& [j, x] : r.entries) sum[j] += x;
  }
  const double n = static_cast<double>(rows.size());
  std::vector<Standardization> out(dimension);
  if (rows.empty()) return out;
  for (std::size_t j = 0; j < dimension; ++j) out[j].mean = sum[j] / n;
  // Two-pass variance; implicit zeros contribute mean^2 each.
  std::vector<double> sq(dimension, 0.0);
  std::vector<std::size_t> present(dimension, 0);
  for (const SparseVector& r : rows) {
    for (const auto& [j, x] : r.entries) {
      const double d = x - out[j].mean;
      sq[j] += d * d;
      ++present[j];
    }
  }
  for (std::size_t j = 0; j < dimension; ++j) {
    const double missing = n - static_cast<double>(present[j]);
    const double var = (sq[j] + missing * out[j].mean * out[j].mean) / n;
    out[j].stddev = std::sqrt(var);
  }
  return out;
}

SparseVector dense_row(const std::vector<double>& x) {
  SparseVector v;
  v.entries.reserve(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) v.entries.emplace_back(static_cast<std::uint32_t>(j), x[j]);
  return v;
}

std::vector<SparseVector> dense_rows(const std::vector<std::vector<double>>& xs) {
  std::vector<SparseVector> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(dense_row(x));
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// ln(1 + e^z)
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double bce(double z, int y) { return softplus(z) - static_cast<double>(y) * z; }

void check_row(const SparseVector& x, std::size_t dimension) {
  for (const auto& [j, v] : x.entries) {
    if (j >= dimension) {
      throw Error("input column " + std::to_string(j) + " out of range for dimension " +
                  std::to_string(dimension));
    }
    if (!std::isfinite(v)) throw Error("non-finite input value");
  }
}

void check_labels(const std::vector<int>& ys, std::size_t n) {
  if (ys.size() != n) throw Error("inputs and labels differ in length");
  bool pos = false;
  bool neg = false;
  for (int y : ys) {
    if (y != 0 && y != 1) throw Error("labels must be 0 or 1");
    pos = pos || y == 1;
    neg = neg || y == 0;
  }
  if (!pos || !neg) throw Error("training data must contain both classes");
}

// Constant part of the logit: -sum_j w_j mean_j / std_j.
double logit_offset(const LogisticModel& m) {
  double off = m.bias;
  for (std::size_t j = 0; j < m.weights.size(); ++j) {
    if (!m.frozen(j)) off -= m.weights[j] * m.standardization[j].mean / m.standardization[j].stddev;
  }
  return off;
}

double logit_with(const LogisticModel& m, const SparseVector& x, double offset) {
  double z = offset;
  for (const auto& [j, v] : x.entries) {
    if (!m.frozen(j)) z += m.weights[j] / m.standardization[j].stddev * v;
  }
  return z;
}

// Accumulates sum_i dz_i * x_i sparsely; the mean shift is applied at the end.
struct GradAccumulator {
  explicit GradAccumulator(std::size_t dimension) : s(dimension, 0.0) {}

  void add(const SparseVector& x, double dz) {
    for (const auto& [j, v] : x.entries) s[j] += dz * v;
    total += dz;
  }

  // Writes dimension + 1 entries at `out`.
  void finish(const LogisticModel& m, double inv_n, double l2, double* out) const {
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
      if (m.frozen(j)) {
        out[j] = 0.0;
        continue;
      }
      const Standardization& st = m.standardization[j];
      out[j] = (s[j] - st.mean * total) / st.stddev * inv_n + l2 * m.weights[j];
    }
    out[m.weights.size()] = total * inv_n;
  }

  std::vector<double> s;
  double total = 0.0;
};

double l2_term(const LogisticModel& m, double l2) {
  double s = 0.0;
  for (double w : m.weights) s += w * w;
  return 0.5 * l2 * s;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

std::vector<double> lr_batch_gradient(const LogisticModel& m, const std::vector<SparseVector>& xs,
                                      const std::vector<int>& ys,
                                      const std::vector<std::size_t>& batch, double l2) {
  const double off = logit_offset(m);
  GradAccumulator acc(m.dimension());
  for (std::size_t i : batch) {
    const double p = sigmoid(logit_with(m, xs[i], off));
    acc.add(xs[i], p - static_cast<double>(ys[i]));
  }
  std::vector<double> g(m.parameter_count());
  acc.finish(m, 1.0 / static_cast<double>(batch.size()), l2, g.data());
  return g;
}

using BatchGradient = std::function<std::vector<double>(const std::vector<double>& params,
                                                        const std::vector<std::size_t>& batch)>;
using FullLoss = std::function<double(const std::vector<double>& params)>;

// Shared optimisation loop: seeded shuffle per epoch, then mini-batch Adam (or
// one full-batch gradient step per epoch in diagnostic mode).
std::vector<double> optimise(std::vector<double> params, const std::vector<bool>& frozen,
                             std::size_t n, const BatchGradient& gradient, const FullLoss& loss,
                             const TrainConfig& config, TrainTrace* trace) {
  Rng rng(config.seed);
  AdamState adam(params.size());
  std::vector<std::size_t> order = all_indices(n);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.full_batch_gd) {
      const std::vector<double> g = gradient(params, order);
      for (std::size_t k = 0; k < params.size(); ++k) {
        if (!frozen[k]) params[k] -= config.learning_rate * g[k];
      }
    } else {
      rng.shuffle(order);
      std::vector<std::size_t> batch;
      for (std::size_t start = 0; start < n; start += config.batch_size) {
        const std::size_t end = std::min(n, start + config.batch_size);
        batch.assign(order.begin() + static_cast<long>(start), order.begin() + static_cast<long>(end));
        adam.step(params, gradient(params, batch), config, frozen);
      }
    }
    if (trace != nullptr) trace->epoch_loss.push_back(loss(params));
  }
  return params;
}

std::vector<bool> lr_frozen_mask(const LogisticModel& m) {
  std::vector<bool> f(m.parameter_count(), false);
  for (std::size_t j = 0; j < m.dimension(); ++j) f[j] = m.frozen(j);
  return f;
}

nlohmann::json standardization_json(const std::vector<Standardization>& st) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& s : st) a.push_back({s.mean, s.stddev});
  return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// LogisticModel

LogisticModel::LogisticModel(std::size_t dimension, std::vector<Standardization> st)
    : weights(dimension, 0.0), standardization(std::move(st)) {
  if (standardization.size() != dimension) {
    throw Error("standardization length does not match the dimension");
  }
}

double LogisticModel::logit(const SparseVector& x) const {
  check_row(x, dimension());
  return logit_with(*this, x, logit_offset(*this));
}

double LogisticModel::predict(const SparseVector& x) const { return sigmoid(logit(x)); }

std::vector<double> LogisticModel::parameters() const {
  std::vector<double> p = weights;
  p.push_back(bias);
  return p;
}

void LogisticModel::set_parameters(const std::vector<double>& p) {
  if (p.size() != parameter_count()) throw Error("parameter vector has the wrong length");
  std::copy(p.begin(), p.end() - 1, weights.begin());
  bias = p.back();
}

nlohmann::json LogisticModel::to_json() const {
  return {{"dimension", dimension()},
          {"weights", weights},
          {"bias", bias},
          {"standardization", standardization_json(standardization)}};
}

LogisticModel LogisticModel::from_json(const nlohmann::json& j) {
  LogisticModel m;
  try {
    const auto dim = j.at("dimension").get<std::size_t>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    for (const auto& pair : j.at("standardization")) {
      m.standardization.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    }
    if (m.weights.size() != dim || m.standardization.size() != dim) {
      throw IoError("malformed model: dimension does not match weights/standardization");
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed model: ") + e.what());
  }
  return m;
}

double predict_lr(const LogisticModel& model, const SparseVector& x) { return model.predict(x); }

double predict_lr(const LogisticModel& model, const std::vector<double>& x) {
  if (x.size() != model.dimension()) {
    throw Error("input has dimension " + std::to_string(x.size()) + ", model expects " +
                std::to_string(model.dimension()));
  }
  return model.predict(x);
}

double lr_loss(const LogisticModel& model, const std::vector<SparseVector>& xs,
               const std::vector<int>& ys, double l2_penalty) {
  if (xs.size() != ys.size() || xs.empty()) throw Error("inputs and labels differ in length");
  const double off = logit_offset(model);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    check_row(xs[i], model.dimension());
    s += bce(logit_with(model, xs[i], off), ys[i]);
  }
  return s / static_cast<double>(xs.size()) + l2_term(model, l2_penalty);
}

std::vector<double> lr_gradient(const LogisticModel& model, const std::vector<SparseVector>& xs,
                                const std::vector<int>& ys, double l2_penalty) {
  if (xs.size() != ys.size() || xs.empty()) throw Error("inputs and labels differ in length");
  for (const auto& x : xs) check_row(x, model.dimension());
  return lr_batch_gradient(model, xs, ys, all_indices(xs.size()), l2_penalty);
}

LogisticModel train_lr(const std::vector<SparseVector>& xs, const std::vector<int>& ys,
                       std::size_t dimension, const TrainConfig& config, TrainTrace* trace) {
  config.validate();
  check_labels(ys, xs.size());
  for (const auto& x : xs) check_row(x, dimension);

  LogisticModel model(dimension, fit_standardization(xs, dimension));
  const std::vector<bool> frozen = lr_frozen_mask(model);
  LogisticModel scratch = model;
  auto gradient = [&](const std::vector<double>& p, const std::vector<std::size_t>& batch) {
    scratch.set_parameters(p);
    return lr_batch_gradient(scratch, xs, ys, batch, config.l2_penalty);
  };
  auto loss = [&](const std::vector<double>& p) {
    scratch.set_parameters(p);
    return lr_loss(scratch, xs, ys, config.l2_penalty);
  };
  model.set_parameters(
      optimise(model.parameters(), frozen, xs.size(), gradient, loss, config, trace));
  return model;
}

LogisticModel train_lr(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
                       const TrainConfig& config) {
  if (xs.empty()) throw Error("no training rows");
  const std::size_t dim = xs.front().size();
  for (const auto& x : xs) {
    if (x.size() != dim) throw Error("training rows differ in dimension");
  }
  return train_lr(dense_rows(xs), ys, dim, config);
}

void AdamState::step(std::vector<double>& params, const std::vector<double>& grad,
                     const TrainConfig& config, const std::vector<bool>& frozen) {
  ++t;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (frozen[k]) continue;
    m[k] = b1 * m[k] + (1.0 - b1) * grad[k];
    v[k] = b2 * v[k] + (1.0 - b2) * grad[k] * grad[k];
    const double mhat = m[k] / c1;
    const double vhat = v[k] / c2;
    params[k] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_epsilon);
  }
}

// ---------------------------------------------------------------------------
// Stacked

StackedModel::StackedModel(std::vector<LogisticModel> l1, LogisticModel l2)
    : level1(std::move(l1)), level2(std::move(l2)) {
  if (level1.size() != kLevel1 || level2.dimension() != kLevel1) {
    throw Error("stacked model needs 7 level-1 models and a 7-input level-2 model");
  }
}

namespace {

SparseVector single(double v) {
  SparseVector s;
  s.entries.emplace_back(0, v);
  return s;
}

const SparseVector& level1_input(const StackedInput& x, std::size_t j, SparseVector& scratch) {
  if (j == 0) return x.tfidf;
  scratch.entries.assign(1, {0, x.heuristics[j - 1]});
  return scratch;
}

}  // namespace

std::array<double, StackedModel::kLevel1> StackedModel::level1_probabilities(
    const StackedInput& x) const {
  std::array<double, kLevel1> p{};
  SparseVector scratch;
  for (std::size_t j = 0; j < kLevel1; ++j) p[j] = level1[j].predict(level1_input(x, j, scratch));
  return p;
}

double StackedModel::predict(const StackedInput& x) const {
  const auto p = level1_probabilities(x);
  return level2.predict(std::vector<double>(p.begin(), p.end()));
}

std::size_t StackedModel::parameter_count() const {
  std::size_t n = level2.parameter_count();
  for (const auto& m : level1) n += m.parameter_count();
  return n;
}

std::vector<double> StackedModel::parameters() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  for (const auto& m : level1) {
    const auto q = m.parameters();
    p.insert(p.end(), q.begin(), q.end());
  }
  const auto q = level2.parameters();
  p.insert(p.end(), q.begin(), q.end());
  return p;
}

void StackedModel::set_parameters(const std::vector<double>& p) {
  if (p.size() != parameter_count()) throw Error("parameter vector has the wrong length");
  auto it = p.begin();
  for (auto& m : level1) {
    std::copy(it, it + static_cast<long>(m.dimension()), m.weights.begin());
    it += static_cast<long>(m.dimension());
    m.bias = *it++;
  }
  std::copy(it, it + static_cast<long>(level2.dimension()), level2.weights.begin());
  it += static_cast<long>(level2.dimension());
  level2.bias = *it;
}

std::vector<bool> StackedModel::frozen_mask() const {
  std::vector<bool> f;
  for (const auto& m : level1) {
    const auto g = lr_frozen_mask(m);
    f.insert(f.end(), g.begin(), g.end());
  }
  const auto g = lr_frozen_mask(level2);
  f.insert(f.end(), g.begin(), g.end());
  return f;
}

nlohmann::json StackedModel::to_json() const {
  nlohmann::json l1 = nlohmann::json::array();
  for (const auto& m : level1) l1.push_back(m.to_json());
  return {{"level1", l1}, {"level2", level2.to_json()}};
}

StackedModel StackedModel::from_json(const nlohmann::json& j) {
  std::vector<LogisticModel> l1;
  try {
    for (const auto& m : j.at("level1")) l1.push_back(LogisticModel::from_json(m));
    return StackedModel(std::move(l1), LogisticModel::from_json(j.at("level2")));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed stacked model: ") + e.what());
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw IoError(std::string("malformed stacked model: ") + e.what());
  }
}

StackedModel init_stacked(const std::vector<StackedInput>& xs, std::size_t tfidf_dimension) {
  std::vector<LogisticModel> l1;
  std::vector<SparseVector> rows;
  rows.reserve(xs.size());
  for (const auto& x : xs) rows.push_back(x.tfidf);
  l1.emplace_back(tfidf_dimension, fit_standardization(rows, tfidf_dimension));
  for (std::size_t h = 0; h < FeatureVector::kSize; ++h) {
    rows.clear();
    for (const auto& x : xs) rows.push_back(single(x.heuristics[h]));
    l1.emplace_back(1, fit_standardization(rows, 1));
  }
  // Level-2 inputs are probabilities centred at 0.5. Its weights start at 1:
  // with every weight at zero the level-1 gradients vanish identically.
  LogisticModel l2(StackedModel::kLevel1,
                   std::vector<Standardization>(StackedModel::kLevel1, {0.5, 1.0}));
  std::fill(l2.weights.begin(), l2.weights.end(), 1.0);
  return StackedModel(std::move(l1), std::move(l2));
}

namespace {

void check_stacked(const StackedModel& model, const std::vector<StackedInput>& xs) {
  for (const auto& x : xs) {
    check_row(x.tfidf, model.level1[0].dimension());
    for (double v : x.heuristics.values()) {
      if (!std::isfinite(v)) throw Error("non-finite heuristic value");
    }
  }
}

std::vector<double> stacked_batch_gradient(const StackedModel& model,
                                           const std::vector<StackedInput>& xs,
                                           const std::vector<int>& ys,
                                           const std::vector<std::size_t>& batch, double l2) {
  constexpr std::size_t K = StackedModel::kLevel1;
  std::array<double, K> off{};
  for (std::size_t j = 0; j < K; ++j) off[j] = logit_offset(model.level1[j]);
  const double off2 = logit_offset(model.level2);

  std::vector<GradAccumulator> acc;
  for (const auto& m : model.level1) acc.emplace_back(m.dimension());
  GradAccumulator acc2(K);

  SparseVector scratch;
  SparseVector probs;
  probs.entries.resize(K);
  for (std::size_t i : batch) {
    std::array<double, K> p{};
    for (std::size_t j = 0; j < K; ++j) {
      p[j] = sigmoid(logit_with(model.level1[j], level1_input(xs[i], j, scratch), off[j]));
      probs.entries[j] = {static_cast<std::uint32_t>(j), p[j]};
    }
    const double out = sigmoid(logit_with(model.level2, probs, off2));
    const double delta = out - static_cast<double>(ys[i]);
    acc2.add(probs, delta);
    for (std::size_t j = 0; j < K; ++j) {
      if (model.level2.frozen(j)) continue;
      const double dz = delta * model.level2.weights[j] / model.level2.standardization[j].stddev *
                        p[j] * (1.0 - p[j]);
      acc[j].add(level1_input(xs[i], j, scratch), dz);
    }
  }

  std::vector<double> g(model.parameter_count());
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double* out = g.data();
  for (std::size_t j = 0; j < K; ++j) {
    acc[j].finish(model.level1[j], inv_n, l2, out);
    out += model.level1[j].parameter_count();
  }
  acc2.finish(model.level2, inv_n, l2, out);
  return g;
}

}  // namespace

double stacked_loss(const StackedModel& model, const std::vector<StackedInput>& xs,
                    const std::vector<int>& ys, double l2_penalty) {
  if (xs.size() != ys.size() || xs.empty()) throw Error("inputs and labels differ in length");
  check_stacked(model, xs);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto p = model.level1_probabilities(xs[i]);
    s += bce(model.level2.logit(dense_row(std::vector<double>(p.begin(), p.end()))), ys[i]);
  }
  double reg = l2_term(model.level2, l2_penalty);
  for (const auto& m : model.level1) reg += l2_term(m, l2_penalty);
  return s / static_cast<double>(xs.size()) + reg;
}

std::vector<double> stacked_gradient(const StackedModel& model, const std::vector<StackedInput>& xs,
                                     const std::vector<int>& ys, double l2_penalty) {
  if (xs.size() != ys.size() || xs.empty()) throw Error("inputs and labels differ in length");
  check_stacked(model, xs);
  return stacked_batch_gradient(model, xs, ys, all_indices(xs.size()), l2_penalty);
}

StackedModel train_stacked(const std::vector<StackedInput>& xs, const std::vector<int>& ys,
                           std::size_t tfidf_dimension, const TrainConfig& config) {
  config.validate();
  check_labels(ys, xs.size());
  StackedModel model = init_stacked(xs, tfidf_dimension);
  check_stacked(model, xs);
  StackedModel scratch = model;
  auto gradient = [&](const std::vector<double>& p, const std::vector<std::size_t>& batch) {
    scratch.set_parameters(p);
    return stacked_batch_gradient(scratch, xs, ys, batch, config.l2_penalty);
  };
  auto loss = [&](const std::vector<double>& p) {
    scratch.set_parameters(p);
    return stacked_loss(scratch, xs, ys, config.l2_penalty);
  };
  model.set_parameters(optimise(model.parameters(), model.frozen_mask(), xs.size(), gradient, loss,
                                config, nullptr));
  return model;
}

// ---------------------------------------------------------------------------
// HERB

std::vector<double> HerbModel::fusion_input(const std::vector<double>& embedding,
                                            const FeatureVector& heuristics) const {
  std::vector<double> x;
  x.reserve(kFusionDimension);
  x.push_back(predict_lr(embedding_classifier, embedding));
  for (double v : heuristics.values()) x.push_back(v);
  return x;
}

double HerbModel::predict(const std::vector<double>& embedding,
                          const FeatureVector& heuristics) const {
  return predict_lr(fusion, fusion_input(embedding, heuristics));
}

nlohmann::json HerbModel::to_json() const {
  return {{"embedding_classifier", embedding_classifier.to_json()}, {"fusion", fusion.to_json()}};
}

HerbModel HerbModel::from_json(const nlohmann::json& j) {
  HerbModel h;
  try {
    h.embedding_classifier = LogisticModel::from_json(j.at("embedding_classifier"));
    h.fusion = LogisticModel::from_json(j.at("fusion"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed HERB model: ") + e.what());
  }
  if (h.fusion.dimension() != kFusionDimension) {
    throw IoError("malformed HERB model: fusion dimension must be 7");
  }
  return h;
}

HerbModel train_herb(const EmbeddingStore& embeddings, const std::vector<std::string>& doc_ids,
                     const std::vector<FeatureVector>& heuristics, const std::vector<int>& ys,
                     const TrainConfig& config) {
  if (doc_ids.size() != heuristics.size() || doc_ids.size() != ys.size()) {
    throw Error("doc_ids, heuristics and labels differ in length");
  }
  std::string missing;
  std::size_t n_missing = 0;
  for (const auto& id : doc_ids) {
    if (!embeddings.contains(id)) {
      missing += (n_missing++ == 0 ? "" : ", ") + id;
    }
  }
  if (n_missing > 0) throw Error("missing embeddings for doc_ids: " + missing);

  std::vector<SparseVector> emb_rows;
  emb_rows.reserve(doc_ids.size());
  for (const auto& id : doc_ids) emb_rows.push_back(dense_row(embeddings.as_double(id)));

  HerbModel h;
  h.embedding_classifier = train_lr(emb_rows, ys, embeddings.dimension(), config);
  std::vector<SparseVector> fusion_rows;
  fusion_rows.reserve(doc_ids.size());
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    fusion_rows.push_back(dense_row(h.fusion_input(embeddings.as_double(doc_ids[i]), heuristics[i])));
  }
  h.fusion = train_lr(fusion_rows, ys, HerbModel::kFusionDimension, config);
  return h;
}

}  // namespace covrank
