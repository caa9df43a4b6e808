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

#include "gdaug/predictor.hpp"

#include "gdaug/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gdaug {

void TaskSpec::validate() const {
  if (n_tasks < 1) throw ConfigError("task spec: n_tasks must be at least 1");
  if (kind == TaskKind::kRegression && !(label_std > 0.0)) throw ConfigError("task spec: label_std must be positive");
}

nlohmann::json to_json(const TaskSpec& s) {
  return {{"kind", s.is_classification() ? "classification" : "regression"},
          {"n_tasks", s.n_tasks},
          {"label_std", s.label_std}};
}

TaskSpec task_spec_from_json(const nlohmann::json& j) {
  TaskSpec s;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "classification") {
    s.kind = TaskKind::kClassification;
  } else if (kind == "regression") {
    s.kind = TaskKind::kRegression;
  } else {
    throw ConfigError("task kind must be classification or regression");
  }
  s.n_tasks = j.at("n_tasks").get<Index>();
  s.label_std = j.value("label_std", 1.0);
  s.validate();
  return s;
}

nlohmann::json to_json(const Metrics& m) {
  nlohmann::json j;
  j["auc"] = m.auc ? nlohmann::json(*m.auc) : nlohmann::json(nullptr);
  j["mae"] = m.mae ? nlohmann::json(*m.mae) : nlohmann::json(nullptr);
  nlohmann::json per = nlohmann::json::array();
  for (Index i = 0; i < m.per_task.size(); ++i) {
    if (std::isnan(m.per_task(i))) {
      per.push_back(nullptr);
    } else {
      per.push_back(m.per_task(i));
    }
  }
  j["per_task"] = per;
  return j;
}

nlohmann::json to_json(const PredictorHyper& h) {
  return {{"hidden", h.hidden},
          {"layers", h.layers},
          {"activation", nn::to_string(h.activation)},
          {"epochs", h.epochs},
          {"batch_size", h.batch_size},
          {"learning_rate", h.adam.learning_rate},
          {"weight_decay", h.adam.weight_decay},
          {"grad_clip", h.adam.grad_clip}};
}

PredictorHyper predictor_hyper_from_json(const nlohmann::json& j, const PredictorHyper& d) {
  PredictorHyper h = d;
  h.hidden = j.value("hidden", d.hidden);
  h.layers = j.value("layers", d.layers);
  h.activation = nn::parse_activation(j.value("activation", nn::to_string(d.activation)));
  h.epochs = j.value("epochs", d.epochs);
  h.batch_size = j.value("batch_size", d.batch_size);
  h.adam.learning_rate = j.value("learning_rate", d.adam.learning_rate);
  h.adam.weight_decay = j.value("weight_decay", d.adam.weight_decay);
  h.adam.grad_clip = j.value("grad_clip", d.adam.grad_clip);
  if (h.hidden < 1 || h.layers < 1 || h.epochs < 0 || h.batch_size < 1) {
    throw ConfigError("predictor hyperparameters out of range");
  }
  return h;
}

PredictorParams PredictorParams::init(Index num_types, Index n_tasks, const PredictorHyper& hyper, Rng& rng) {
  if (hyper.layers < 1) throw ConfigError("predictor needs at least one GIN layer");
  PredictorParams p;
  p.embed_table = nn::Linear::init(num_types, hyper.hidden, rng).weight;
  for (Index l = 0; l < hyper.layers; ++l) {
    GinLayer layer;
    layer.mlp = nn::Mlp::init({hyper.hidden, hyper.hidden, hyper.hidden}, hyper.activation, true, rng);
    layer.eps = Matrix::Zero(1, 1);
    p.layers.push_back(std::move(layer));
  }
  p.head = nn::Mlp::init({hyper.hidden, hyper.hidden, n_tasks}, hyper.activation, false, rng);
  p.score_vector = nn::Linear::init(hyper.hidden, 1, rng).weight;
  return p;
}

nlohmann::json to_json(const PredictorParams& p) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : p.layers) layers.push_back({{"mlp", nn::to_json(l.mlp)}, {"eps", l.eps(0, 0)}});
  return {{"format", "gdaug.predictor"},
          {"format_version", PredictorParams::kFormatVersion},
          {"embed_table", nn::matrix_to_json(p.embed_table)},
          {"layers", layers},
          {"head", nn::to_json(p.head)},
          {"score_vector", nn::matrix_to_json(p.score_vector)}};
}

PredictorParams predictor_params_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != PredictorParams::kFormatVersion) {
      throw ParseError("unsupported predictor checkpoint version");
    }
    PredictorParams p;
    p.embed_table = nn::matrix_from_json(j.at("embed_table"));
    for (const auto& l : j.at("layers")) {
      GinLayer layer;
      layer.mlp = nn::mlp_from_json(l.at("mlp"));
      layer.eps = Matrix::Constant(1, 1, l.at("eps").get<double>());
      p.layers.push_back(std::move(layer));
    }
    p.head = nn::mlp_from_json(j.at("head"));
    p.score_vector = nn::matrix_from_json(j.at("score_vector"));
    if (p.layers.empty()) throw ParseError("predictor checkpoint without layers");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("predictor checkpoint: ") + e.what());
  }
}

ad::Var embed_continuous(nn::Binder& bind, const ad::Var& x, const PredictorParams& params) {
  if (x.cols() != params.embed_table.rows()) {
    throw DimensionError("embedding: x has " + std::to_string(x.cols()) + " columns, table has " +
                         std::to_string(params.embed_table.rows()) + " rows");
  }
  return ad::matmul(x, bind(params.embed_table));
}

Matrix embed_continuous(const Matrix& x, const PredictorParams& params) {
  ad::Tape tape;
  nn::Binder bind(tape, false);
  return embed_continuous(bind, tape.constant(x), params).value();
}

ad::Var gin_layer(nn::Binder& bind, const ad::Var& h, const ad::Var& a, const ad::Var& eps, const nn::Mlp& mlp) {
  if (a.rows() != h.rows() || a.cols() != h.rows()) throw DimensionError("gin layer: adjacency does not match h");
  ad::Var self = ad::hadamard(ad::broadcast(eps + 1.0, h.rows(), h.cols()), h);
  return mlp.forward(bind, self + ad::matmul(a, h));
}

Matrix gin_layer(const Matrix& h, const Matrix& a, double eps, const nn::Mlp& mlp) {
  ad::Tape tape;
  nn::Binder bind(tape, false);
  return gin_layer(bind, tape.constant(h), tape.constant(a), tape.constant(eps), mlp).value();
}

PredictorForward predictor_forward(nn::Binder& bind, const ad::Var& x, const ad::Var& a, const Mask& node_mask,
                                   const PredictorParams& params) {
  ad::Tape& tape = bind.tape();
  const Index n = x.rows();
  if (node_mask.size() != n) throw DimensionError("predictor: mask length differs from node count");
  ad::Var mask_cols = tape.constant(Matrix(node_mask.cast<double>().matrix().replicate(1, params.hidden())));
  ad::Var h = ad::hadamard(embed_continuous(bind, x, params), mask_cols);
  for (const auto& layer : params.layers) {
    h = ad::hadamard(gin_layer(bind, h, a, bind(layer.eps), layer.mlp), mask_cols);
  }
  ad::Var pooled = ad::colwise_sum(h);
  return {params.head.forward(bind, pooled), h};
}

namespace {

PredictorForward forward_frozen(ad::Tape& tape, nn::Binder& bind, const ContinuousGraph& g,
                                const PredictorParams& params) {
  return predictor_forward(bind, tape.constant(g.x), tape.constant(g.a), g.node_mask, params);
}

}  // namespace

Vector predict(const ContinuousGraph& g, const PredictorParams& params) {
  ad::Tape tape;
  nn::Binder bind(tape, false);
  return forward_frozen(tape, bind, g, params).outputs.value().transpose();
}

Vector predict(const Graph& g, const PredictorParams& params) {
  return predict(to_continuous(g, params.num_types(), g.num_nodes()), params);
}

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_label_width(Index outputs, const MaskedLabel& label) {
  if (outputs != label.size()) {
    throw DimensionError("label has " + std::to_string(label.size()) + " entries, predictor emits " +
                         std::to_string(outputs));
  }
}

// 1 x K constants: validity mask and masked targets.
std::pair<Matrix, Matrix> label_rows(const MaskedLabel& label) {
  Matrix valid = label.valid.cast<double>().matrix().transpose();
  Matrix target = label.values.transpose().cwiseProduct(valid);
  return {valid, target};
}

}  // namespace

ExampleLoss per_example_loss(const Vector& outputs, const MaskedLabel& label, const TaskSpec& spec) {
  check_label_width(outputs.size(), label);
  ExampleLoss out;
  double total = 0.0;
  Index count = 0;
  for (Index k = 0; k < outputs.size(); ++k) {
    if (!label.valid(k)) continue;
    const double z = outputs(k);
    const double y = label.values(k);
    total += spec.is_classification() ? softplus(z) - y * z : (z - y) * (z - y);
    ++count;
  }
  if (count == 0) return out;
  out.value = total / static_cast<double>(count);
  out.has_signal = true;
  return out;
}

ad::Var per_example_loss(const ad::Var& outputs, const MaskedLabel& label, const TaskSpec& spec) {
  check_label_width(outputs.cols(), label);
  ad::Tape& tape = *outputs.tape();
  const Index count = label.valid.count();
  if (count == 0) return tape.constant(0.0);
  auto [valid, target] = label_rows(label);
  ad::Var v = tape.constant(valid);
  ad::Var y = tape.constant(target);
  ad::Var per_entry = spec.is_classification() ? ad::softplus(outputs) - ad::hadamard(y, outputs)
                                               : ad::square(outputs - y);
  return (1.0 / static_cast<double>(count)) * ad::dot(per_entry, v);
}

ad::Var label_log_likelihood(const ad::Var& outputs, const MaskedLabel& label, const TaskSpec& spec) {
  check_label_width(outputs.cols(), label);
  ad::Tape& tape = *outputs.tape();
  if (!label.any_valid()) throw DegenerateInputError("label likelihood with a fully masked label");
  auto [valid, target] = label_rows(label);
  ad::Var v = tape.constant(valid);
  ad::Var y = tape.constant(target);
  if (spec.is_classification()) {
    // y log s(z) + (1-y) log(1-s(z)) = y z - softplus(z)
    return ad::dot(ad::hadamard(y, outputs) - ad::softplus(outputs), v);
  }
  const double scale = 1.0 / (2.0 * spec.label_std * spec.label_std);
  return (-scale) * ad::dot(ad::square(outputs - y), v);
}

std::vector<LabeledExample> to_examples(const std::vector<Graph>& graphs, Index num_types) {
  std::vector<LabeledExample> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back({to_continuous(g, num_types, g.num_nodes()), g.label});
  return out;
}

PredictorTrainer::PredictorTrainer(PredictorParams init, TaskSpec spec, PredictorHyper hyper, std::uint64_t seed)
    : params_(std::move(init)), best_(params_), spec_(spec), hyper_(hyper), adam_(hyper.adam), rng_(derive_seed(seed, 11)) {
  spec_.validate();
}

double PredictorTrainer::train_epoch(const std::vector<LabeledExample>& data) {
  if (data.empty()) throw DegenerateInputError("training set is empty");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_);
  const auto params = nn::parameters(params_);
  double epoch_total = 0.0;
  std::size_t epoch_count = 0;
  const auto batch = static_cast<std::size_t>(hyper_.batch_size);
  for (std::size_t start = 0; start < order.size(); start += batch) {
    const std::size_t stop = std::min(order.size(), start + batch);
    ad::Tape tape;
    nn::Binder bind(tape, true);
    nn::Binder frozen(tape, false);
    const PredictorParams& p = params_;
    std::vector<ad::Var> losses;
    std::size_t with_signal = 0;
    for (std::size_t b = start; b < stop; ++b) {
      const LabeledExample& ex = data[order[b]];
      if (!ex.label.any_valid()) continue;
      PredictorForward fwd = predictor_forward(bind, tape.constant(ex.graph.x), tape.constant(ex.graph.a),
                                               ex.graph.node_mask, p);
      ad::Var loss = per_example_loss(fwd.outputs, ex.label, spec_);
      epoch_total += loss.scalar();
      ++with_signal;
      // Top-k scoring vector: gated readout through the frozen network, so the
      // auxiliary term trains only the scoring vector.
      ad::Var h = tape.constant(fwd.node_embeddings.value());
      ad::Var proj = ad::matmul(h, bind(p.score_vector));
      ad::Var gate = ad::tanh(ad::quotient(proj, ad::broadcast(ad::l2_norm(bind(p.score_vector)), proj.rows(), 1)));
      ad::Var gated = ad::colwise_sum(ad::hadamard(h, ad::broadcast_cols(gate, h.cols())));
      ad::Var aux = per_example_loss(p.head.forward(frozen, gated), ex.label, spec_);
      losses.push_back(loss + aux);
    }
    if (losses.empty()) continue;
    epoch_count += with_signal;
    ad::Var total = losses.front();
    for (std::size_t i = 1; i < losses.size(); ++i) total = total + losses[i];
    total = (1.0 / static_cast<double>(losses.size())) * total;
    tape.backward(total);
    std::vector<Matrix> grads;
    grads.reserve(params.size());
    for (Matrix* m : params) grads.push_back(bind.grad(*m));
    adam_.step(params, std::move(grads));
  }
  ++epoch_;
  const double mean = epoch_count ? epoch_total / static_cast<double>(epoch_count) : 0.0;
  history_.train_loss.push_back(mean);
  return mean;
}

double PredictorTrainer::mean_loss(const std::vector<LabeledExample>& data) const {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& ex : data) {
    const ExampleLoss l = per_example_loss(predict(ex.graph, params_), ex.label, spec_);
    if (!l.has_signal) continue;
    total += l.value;
    ++count;
  }
  return count ? total / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

void PredictorTrainer::run(const std::vector<LabeledExample>& train, const std::vector<LabeledExample>& valid,
                           Index epochs) {
  if (train.empty()) throw DegenerateInputError("training set is empty");
  for (Index e = 0; e < epochs; ++e) {
    train_epoch(train);
    const double score = valid.empty() ? history_.train_loss.back() : mean_loss(valid);
    if (!valid.empty()) history_.valid_loss.push_back(score);
    if (!has_best_ || score < best_valid_ || std::isnan(best_valid_)) {
      best_valid_ = score;
      best_ = params_;
      has_best_ = true;
      history_.best_epoch = epoch_ - 1;
    }
  }
}

TrainResult train_predictor(const std::vector<Graph>& train, const std::vector<Graph>& valid, const TaskSpec& spec,
                            const PredictorHyper& hyper, Index num_types, std::uint64_t seed) {
  if (train.empty()) throw DegenerateInputError("training set is empty");
  Rng init_rng = make_rng(seed, 10);
  PredictorTrainer trainer(PredictorParams::init(num_types, spec.n_tasks, hyper, init_rng), spec, hyper, seed);
  trainer.run(to_examples(train, num_types), to_examples(valid, num_types), hyper.epochs);
  return {trainer.best_params(), trainer.history()};
}

std::optional<double> roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw DimensionError("roc_auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Midranks, 1-based.
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }
  double pos = 0, neg = 0, rank_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i]) {
      pos += 1;
      rank_sum += rank[i];
    } else {
      neg += 1;
    }
  }
  if (pos == 0 || neg == 0) return std::nullopt;
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

Metrics evaluate(const std::vector<Graph>& data, const PredictorParams& params, const TaskSpec& spec) {
  spec.validate();
  const Index k = spec.n_tasks;
  std::vector<std::vector<double>> scores(static_cast<std::size_t>(k));
  std::vector<std::vector<double>> targets(static_cast<std::size_t>(k));
  for (const auto& g : data) {
    if (g.label.size() != k) throw DimensionError("label width differs from the task spec");
    const Vector out = predict(g, params);
    for (Index t = 0; t < k; ++t) {
      if (!g.label.valid(t)) continue;
      scores[static_cast<std::size_t>(t)].push_back(out(t));
      targets[static_cast<std::size_t>(t)].push_back(g.label.values(t));
    }
  }
  std::size_t total_valid = 0;
  for (const auto& t : targets) total_valid += t.size();
  if (total_valid == 0) throw DegenerateInputError("evaluation data has no valid labels");

  Metrics m;
  m.per_task = Vector::Constant(k, std::numeric_limits<double>::quiet_NaN());
  double acc = 0.0;
  Index used = 0;
  for (Index t = 0; t < k; ++t) {
    const auto& s = scores[static_cast<std::size_t>(t)];
    const auto& y = targets[static_cast<std::size_t>(t)];
    if (s.empty()) continue;
    if (spec.is_classification()) {
      std::vector<int> cls(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) cls[i] = y[i] > 0.5 ? 1 : 0;
      const auto auc = roc_auc(s, cls);
      if (!auc) continue;
      m.per_task(t) = *auc;
    } else {
      double err = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) err += std::abs(s[i] - y[i]);
      m.per_task(t) = err / static_cast<double>(y.size());
    }
    acc += m.per_task(t);
    ++used;
  }
  if (used == 0) throw DegenerateInputError("AUC undefined: no task has both classes");
  if (spec.is_classification()) {
    m.auc = acc / static_cast<double>(used);
  } else {
    m.mae = acc / static_cast<double>(used);
  }
  return m;
}

std::size_t selection_size(std::size_t n, double top_n_percent) {
  if (!(top_n_percent > 0.0 && top_n_percent <= 100.0)) throw DomainError("top-n percent must lie in (0, 100]");
  const double raw = top_n_percent * static_cast<double>(n) / 100.0;
  // Absorb representation error such as 7 * 100 / 100 landing just above 7.
  const auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::min(n, k);
}

std::vector<std::size_t> select_lowest_loss_indices(const std::vector<Graph>& data, const PredictorParams& params,
                                                    const TaskSpec& spec, double top_n_percent) {
  if (data.empty()) throw DegenerateInputError("selection from an empty dataset");
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const ExampleLoss l = per_example_loss(predict(data[i], params), data[i].label, spec);
    if (l.has_signal) scored.emplace_back(l.value, i);
  }
  const std::size_t keep = selection_size(scored.size(), top_n_percent);
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::size_t> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(scored[i].second);
  return out;
}

std::vector<Graph> select_lowest_loss(const std::vector<Graph>& data, const PredictorParams& params,
                                      const TaskSpec& spec, double top_n_percent) {
  std::vector<Graph> out;
  for (std::size_t i : select_lowest_loss_indices(data, params, spec, top_n_percent)) out.push_back(data[i]);
  return out;
}

Matrix symmetric_gradient(const Matrix& grad, const Mask& node_mask) {
  Matrix g = grad + grad.transpose();
  return g.cwiseProduct(pair_mask(node_mask));
}

LikelihoodGrad label_loglik_grad(const ContinuousGraph& g, const MaskedLabel& y, const PredictorParams& params,
                                 const TaskSpec& spec) {
  if (!y.any_valid()) throw DegenerateInputError("guidance undefined for a fully masked label");
  ad::Tape tape;
  nn::Binder bind(tape, false);
  ad::Var x = tape.variable(g.x);
  ad::Var a = tape.variable(g.a);
  PredictorForward fwd = predictor_forward(bind, x, a, g.node_mask, params);
  ad::Var ll = label_log_likelihood(fwd.outputs, y, spec);
  tape.backward(ll);
  LikelihoodGrad out;
  out.log_likelihood = ll.scalar();
  out.grad_x = mask_rows(x.grad(), g.node_mask);
  out.grad_a = symmetric_gradient(a.grad(), g.node_mask);
  return out;
}

std::vector<int> topk_subgraph(const Graph& g, const PredictorParams& params, Index k) {
  const Index n = g.num_nodes();
  if (k < 1 || k > n) throw DomainError("top-k size must lie in [1, n]");
  ad::Tape tape;
  nn::Binder bind(tape, false);
  const ContinuousGraph c = to_continuous(g, params.num_types(), n);
  PredictorForward fwd = forward_frozen(tape, bind, c, params);
  const Vector score = fwd.node_embeddings.value() * params.score_vector;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score(a) > score(b); });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace gdaug
