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


#include "gdaug/pipeline.hpp"

#include "gdaug/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace gdaug {

void DctConfig::validate() const {
  sde.validate();
  aug.validate();
  if (!(top_n_percent > 0.0 && top_n_percent <= 100.0)) throw ConfigError("top_n_percent must lie in (0, 100]");
  if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be positive");
  if (n_iterations < 0) throw ConfigError("n_iterations must be non-negative");
  if (workers < 1) throw ConfigError("workers must be positive");
}

nlohmann::json to_json(const DctConfig& c) {
  return {{"sde", to_json(c.sde)},
          {"aug", to_json(c.aug)},
          {"top_n_percent", c.top_n_percent},
          {"checkpoint_every", c.checkpoint_every},
          {"n_iterations", c.n_iterations},
          {"predictor_hyper", to_json(c.predictor_hyper)},
          {"score_net_hyper", to_json(c.score_net_hyper)},
          {"seeds", {{"data", c.seeds.data}, {"model", c.seeds.model}, {"sampler", c.seeds.sampler}}},
          {"workers", c.workers}};
}

DctConfig dct_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const char* known[] = {"sde",     "aug",   "top_n_percent", "checkpoint_every", "n_iterations",
                                "predictor_hyper", "score_net_hyper", "seeds", "workers"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  try {
    DctConfig c;
    const nlohmann::json empty = nlohmann::json::object();
    c.sde = sde_config_from_json(j.value("sde", empty));
    c.aug = augment_config_from_json(j.value("aug", empty));
    c.top_n_percent = j.value("top_n_percent", c.top_n_percent);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.n_iterations = j.value("n_iterations", c.n_iterations);
    c.predictor_hyper = predictor_hyper_from_json(j.value("predictor_hyper", empty));
    c.score_net_hyper = score_net_hyper_from_json(j.value("score_net_hyper", empty));
    const nlohmann::json seeds = j.value("seeds", empty);
    c.seeds.data = seeds.value("data", c.seeds.data);
    c.seeds.model = seeds.value("model", c.seeds.model);
    c.seeds.sampler = seeds.value("sampler", c.seeds.sampler);
    c.workers = j.value("workers", c.workers);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

nlohmann::json to_json(const IterationReport& r) {
  return {{"iteration", r.iteration},
          {"train_loss", r.train_loss},
          {"valid_metric", r.valid_metric},
          {"n_augmented", r.n_augmented},
          {"checkpoint_train_losses", r.checkpoint_train_losses},
          {"mean_bound", r.mean_bound},
          {"mean_log_likelihood", r.mean_log_likelihood},
          {"mean_feature_cosine", r.mean_feature_cosine}};
}

std::vector<Graph> update_training_pool(const std::vector<Graph>& original,
                                        const std::vector<AugmentedExample>& new_augmented) {
  std::vector<Graph> pool = original;
  pool.reserve(original.size() + new_augmented.size());
  for (const auto& e : new_augmented) pool.push_back(e.graph);
  return pool;
}

std::vector<AugmentedExample> augment_all(const std::vector<Graph>& sources, const PredictorParams& predictor,
                                          const ScoreModel& model, const SdeConfig& cfg,
                                          const AugmentConfig& aug_cfg, const std::vector<Graph>& pool,
                                          const TaskSpec& spec, const NodeTypeTable& table, std::uint64_t seed,
                                          Index workers) {
  std::vector<AugmentedExample> out(sources.size());
  auto work = [&](std::size_t i) {
    out[i] = augment(sources[i], predictor, model, cfg, aug_cfg, pool, spec, table, derive_seed(seed, i));
  };
  const auto n_threads = static_cast<std::size_t>(std::max<Index>(1, workers));
  if (n_threads == 1 || sources.size() < 2) {
    for (std::size_t i = 0; i < sources.size(); ++i) work(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < std::min(n_threads, sources.size()); ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < sources.size(); i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

namespace {

double headline_metric(const Metrics& m) {
  if (m.auc) return *m.auc;
  if (m.mae) return *m.mae;
  return std::numeric_limits<double>::quiet_NaN();
}

// Trains `epochs` epochs one at a time, recording train loss at each
// checkpoint and refreshing `checkpoint` every `every` epochs.
void train_with_checkpoints(PredictorTrainer& trainer, const std::vector<LabeledExample>& train,
                            const std::vector<LabeledExample>& valid, Index epochs, Index every,
                            PredictorParams& checkpoint, IterationReport& report) {
  for (Index e = 0; e < epochs; ++e) {
    trainer.run(train, valid, 1);
    if (trainer.epochs_done() % every == 0) {
      checkpoint = trainer.params();
      report.checkpoint_train_losses.push_back(trainer.history().train_loss.back());
    }
  }
  if (!trainer.history().train_loss.empty()) report.train_loss = trainer.history().train_loss.back();
}

}  // namespace

DctResult run_dct(const std::vector<Graph>& train, const std::vector<Graph>& valid, const std::vector<Graph>& test,
                  const ScoreModel& nets, const TaskSpec& spec, const DctConfig& cfg, const NodeTypeTable& table,
                  const IterationCallback& on_iteration) {
  cfg.validate();
  if (train.empty()) throw DegenerateInputError("training set is empty");
  const Index num_types = table.size();
  const std::uint64_t model_seed = cfg.seeds.model;

  Rng init_rng = make_rng(model_seed, 10);
  PredictorTrainer trainer(PredictorParams::init(num_types, spec.n_tasks, cfg.predictor_hyper, init_rng), spec,
                           cfg.predictor_hyper, model_seed);
  const auto train_examples = to_examples(train, num_types);
  const auto valid_examples = to_examples(valid, num_types);

  DctResult result;
  PredictorParams checkpoint = trainer.params();

  IterationReport first;
  first.iteration = 0;
  train_with_checkpoints(trainer, train_examples, valid_examples, cfg.predictor_hyper.epochs, cfg.checkpoint_every,
                         checkpoint, first);
  if (!valid.empty()) first.valid_metric = headline_metric(evaluate(valid, trainer.params(), spec));
  result.reports.push_back(first);
  if (on_iteration) on_iteration(first, {});

  for (Index it = 1; it <= cfg.n_iterations; ++it) {
    const PredictorParams frozen = checkpoint;
    std::vector<Graph> sources;
    for (std::size_t i : select_lowest_loss_indices(train, frozen, spec, cfg.top_n_percent)) sources.push_back(train[i]);
    std::vector<AugmentedExample> augmented =
        augment_all(sources, frozen, nets, cfg.sde, cfg.aug, train, spec, table,
                    derive_seed(cfg.seeds.sampler, static_cast<std::uint64_t>(it)), cfg.workers);
    const std::vector<Graph> pool = update_training_pool(train, augmented);

    IterationReport report;
    report.iteration = it;
    report.n_augmented = static_cast<Index>(augmented.size());
    for (const auto& e : augmented) {
      report.mean_bound += e.diagnostics.bound;
      report.mean_log_likelihood += e.diagnostics.log_likelihood;
      report.mean_feature_cosine += e.diagnostics.feature_cosine;
    }
    if (!augmented.empty()) {
      const auto n = static_cast<double>(augmented.size());
      report.mean_bound /= n;
      report.mean_log_likelihood /= n;
      report.mean_feature_cosine /= n;
    }
    train_with_checkpoints(trainer, to_examples(pool, num_types), valid_examples, cfg.checkpoint_every,
                           cfg.checkpoint_every, checkpoint, report);
    if (!valid.empty()) report.valid_metric = headline_metric(evaluate(valid, trainer.params(), spec));
    result.reports.push_back(report);
    if (on_iteration) on_iteration(report, augmented);
    result.augmented.push_back(std::move(augmented));
  }

  result.params = trainer.best_params();
  if (!test.empty()) result.test_metrics = evaluate(test, result.params, spec);
  return result;
}

}  // namespace gdaug
