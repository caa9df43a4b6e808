// Copyright 2026 The gdaug Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// GIN property predictor.
//
// Node types enter through a lookup table: a (possibly relaxed) one-hot row of
// x selects or mixes rows of the embedding table, so the same network runs on
// discrete graphs and on diffusion states. Each layer computes
//   h <- mlp((1 + eps) * h + A * h)
// with the real-valued adjacency, and the graph embedding is the sum over
// active nodes, mapped to K outputs by the head MLP.

#pragma once

#include "gdaug/autodiff.hpp"
#include "gdaug/graph.hpp"
#include "gdaug/nn.hpp"
#include "gdaug/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace gdaug {

enum class TaskKind { kClassification, kRegression };

struct TaskSpec {
  TaskKind kind = TaskKind::kClassification;
  Index n_tasks = 1;
  double label_std = 1.0;  // regression only, label units

  static TaskSpec classification(Index n_tasks) { return {TaskKind::kClassification, n_tasks, 1.0}; }
  static TaskSpec regression(Index n_tasks, double label_std) { return {TaskKind::kRegression, n_tasks, label_std}; }
  bool is_classification() const { return kind == TaskKind::kClassification; }
  void validate() const;
};

nlohmann::json to_json(const TaskSpec& s);
TaskSpec task_spec_from_json(const nlohmann::json& j);

struct Metrics {
  std::optional<double> auc;  // classification, averaged over tasks with both classes
  std::optional<double> mae;  // regression, label units
  Vector per_task;            // NaN for tasks excluded from the average
};

nlohmann::json to_json(const Metrics& m);

struct PredictorHyper {
  Index hidden = 32;
  Index layers = 3;
  nn::Activation activation = nn::Activation::kSilu;
  Index epochs = 100;
  Index batch_size = 32;
  nn::AdamConfig adam{.learning_rate = 3e-3};
};

nlohmann::json to_json(const PredictorHyper& h);
PredictorHyper predictor_hyper_from_json(const nlohmann::json& j, const PredictorHyper& defaults = {});

struct GinLayer {
  nn::Mlp mlp;
  Matrix eps = Matrix::Zero(1, 1);  // learnable self weight

  template <typename F>
  void visit(F&& f) {
    mlp.visit(f);
    f(eps);
  }
  template <typename F>
  void visit(F&& f) const {
    mlp.visit(f);
    f(eps);
  }
};

struct PredictorParams {
  static constexpr int kFormatVersion = 1;

  Matrix embed_table;  // F_n x H
  std::vector<GinLayer> layers;
  nn::Mlp head;         // H -> K
  Matrix score_vector;  // H x 1, top-k node scoring

  static PredictorParams init(Index num_types, Index n_tasks, const PredictorHyper& hyper, Rng& rng);

  Index num_types() const { return embed_table.rows(); }
  Index hidden() const { return embed_table.cols(); }
  Index n_tasks() const { return head.out(); }

  template <typename F>
  void visit(F&& f) {
    f(embed_table);
    for (auto& l : layers) l.visit(f);
    head.visit(f);
    f(score_vector);
  }
  template <typename F>
  void visit(F&& f) const {
    f(embed_table);
    for (const auto& l : layers) l.visit(f);
    head.visit(f);
    f(score_vector);
  }
};

nlohmann::json to_json(const PredictorParams& p);
PredictorParams predictor_params_from_json(const nlohmann::json& j);

// x * embed_table.
ad::Var embed_continuous(nn::Binder& bind, const ad::Var& x, const PredictorParams& params);
Matrix embed_continuous(const Matrix& x, const PredictorParams& params);

ad::Var gin_layer(nn::Binder& bind, const ad::Var& h, const ad::Var& a, const ad::Var& eps, const nn::Mlp& mlp);
Matrix gin_layer(const Matrix& h, const Matrix& a, double eps, const nn::Mlp& mlp);

struct PredictorForward {
  ad::Var outputs;          // 1 x K; logits or raw regression values
  ad::Var node_embeddings;  // n x H after the last layer, zero on padding
};

PredictorForward predictor_forward(nn::Binder& bind, const ad::Var& x, const ad::Var& a, const Mask& node_mask,
                                   const PredictorParams& params);

Vector predict(const ContinuousGraph& g, const PredictorParams& params);
Vector predict(const Graph& g, const PredictorParams& params);

struct ExampleLoss {
  double value = 0.0;
  bool has_signal = false;  // false when every label entry is masked
};

// Mean BCE-with-logits (classification) or MSE (regression) over valid entries.
ExampleLoss per_example_loss(const Vector& outputs, const MaskedLabel& label, const TaskSpec& spec);
ad::Var per_example_loss(const ad::Var& outputs, const MaskedLabel& label, const TaskSpec& spec);

// log p(y | outputs): Bernoulli for classification, Gaussian with scale
// label_std for regression, summed over valid entries.
ad::Var label_log_likelihood(const ad::Var& outputs, const MaskedLabel& label, const TaskSpec& spec);

struct LabeledExample {
  ContinuousGraph graph;
  MaskedLabel label;
};

std::vector<LabeledExample> to_examples(const std::vector<Graph>& graphs, Index num_types);

struct TrainHistory {
  std::vector<double> train_loss;  // mean per epoch
  std::vector<double> valid_loss;  // empty when no validation data
  Index best_epoch = -1;           // -1: initialization kept
};

// Warm-startable trainer; keeps Adam state and the best-validation snapshot.
class PredictorTrainer {
 public:
  PredictorTrainer(PredictorParams init, TaskSpec spec, PredictorHyper hyper, std::uint64_t seed);

  // One pass over data in a seed-determined order; returns the mean loss.
  double train_epoch(const std::vector<LabeledExample>& data);
  double mean_loss(const std::vector<LabeledExample>& data) const;
  // Trains `epochs` epochs, tracking the best validation loss.
  void run(const std::vector<LabeledExample>& train, const std::vector<LabeledExample>& valid, Index epochs);

  const PredictorParams& params() const { return params_; }
  const PredictorParams& best_params() const { return best_; }
  const TrainHistory& history() const { return history_; }
  Index epochs_done() const { return epoch_; }

 private:
  PredictorParams params_;
  PredictorParams best_;
  double best_valid_ = 0.0;
  bool has_best_ = false;
  TaskSpec spec_;
  PredictorHyper hyper_;
  nn::Adam adam_;
  Rng rng_;
  Index epoch_ = 0;
  TrainHistory history_;
};

struct TrainResult {
  PredictorParams params;
  TrainHistory history;
};

TrainResult train_predictor(const std::vector<Graph>& train, const std::vector<Graph>& valid, const TaskSpec& spec,
                            const PredictorHyper& hyper, Index num_types, std::uint64_t seed);

// Rank-statistic AUC with ties counted 1/2. nullopt when a class is missing.
std::optional<double> roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

Metrics evaluate(const std::vector<Graph>& data, const PredictorParams& params, const TaskSpec& spec);

// Indices of the ceil(top_n_percent/100 * N) lowest-loss examples, N counting
// examples with at least one valid label; ties keep dataset order.
std::vector<std::size_t> select_lowest_loss_indices(const std::vector<Graph>& data, const PredictorParams& params,
                                                    const TaskSpec& spec, double top_n_percent);
std::vector<Graph> select_lowest_loss(const std::vector<Graph>& data, const PredictorParams& params,
                                      const TaskSpec& spec, double top_n_percent);
std::size_t selection_size(std::size_t n, double top_n_percent);

struct LikelihoodGrad {
  double log_likelihood = 0.0;
  Matrix grad_x;  // n_max x F_n, zero on padding
  Matrix grad_a;  // n_max x n_max, symmetric, zero diagonal and padding
};

// Gradients w.r.t. the continuous state. The adjacency gradient is taken
// w.r.t. the independent upper-triangular coordinates and mirrored.
LikelihoodGrad label_loglik_grad(const ContinuousGraph& g, const MaskedLabel& y, const PredictorParams& params,
                                 const TaskSpec& spec);

// Converts the adjacency gradient of a free matrix into the mirrored gradient
// of its upper-triangular coordinates, restricted to the active pairs.
Matrix symmetric_gradient(const Matrix& grad, const Mask& node_mask);

// Indices (ascending) of the k nodes with the largest projection of their
// final-layer embedding onto the scoring vector.
std::vector<int> topk_subgraph(const Graph& g, const PredictorParams& params, Index k);

}  // namespace gdaug
