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


// Iterative training loop: train the predictor, freeze its latest
// checkpoint, augment the lowest-loss training graphs with it, and continue
// training on the originals plus the fresh augmentations.

#pragma once

#include "gdaug/augmentor.hpp"
#include "gdaug/diffusion.hpp"
#include "gdaug/predictor.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <vector>

namespace gdaug {

struct SeedConfig {
  std::uint64_t data = 0;
  std::uint64_t model = 1;
  std::uint64_t sampler = 2;
};

struct DctConfig {
  SdeConfig sde;
  AugmentConfig aug;
  double top_n_percent = 10.0;
  Index checkpoint_every = 20;
  Index n_iterations = 3;
  PredictorHyper predictor_hyper;
  ScoreNetHyper score_net_hyper;
  SeedConfig seeds;
  Index workers = 1;

  void validate() const;
};

nlohmann::json to_json(const DctConfig& c);
DctConfig dct_config_from_json(const nlohmann::json& j);

struct IterationReport {
  Index iteration = 0;
  double train_loss = 0.0;        // mean over the last epoch of the iteration
  double valid_metric = 0.0;      // AUC or MAE of the current predictor
  Index n_augmented = 0;
  std::vector<double> checkpoint_train_losses;
  double mean_bound = 0.0;
  double mean_log_likelihood = 0.0;
  double mean_feature_cosine = 0.0;
};

nlohmann::json to_json(const IterationReport& r);

std::vector<Graph> update_training_pool(const std::vector<Graph>& original,
                                        const std::vector<AugmentedExample>& new_augmented);

// Augments each source once; source i uses seed derive_seed(seed, i). The
// result does not depend on `workers`.
std::vector<AugmentedExample> augment_all(const std::vector<Graph>& sources, const PredictorParams& predictor,
                                          const ScoreModel& model, const SdeConfig& cfg,
                                          const AugmentConfig& aug_cfg, const std::vector<Graph>& pool,
                                          const TaskSpec& spec, const NodeTypeTable& table, std::uint64_t seed,
                                          Index workers = 1);

struct DctResult {
  PredictorParams params;
  std::vector<IterationReport> reports;
  Metrics test_metrics;
  std::vector<std::vector<AugmentedExample>> augmented;  // per iteration >= 1
};

using IterationCallback = std::function<void(const IterationReport&, const std::vector<AugmentedExample>&)>;

DctResult run_dct(const std::vector<Graph>& train, const std::vector<Graph>& valid, const std::vector<Graph>& test,
                  const ScoreModel& nets, const TaskSpec& spec, const DctConfig& cfg, const NodeTypeTable& table,
                  const IterationCallback& on_iteration = {});

}  // namespace gdaug
