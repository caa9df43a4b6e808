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


// Numbered acceptance checks with pinned tolerances. Each check reports its
// measured value next to the threshold it is compared against, plus the
// wall-clock time it took.

#pragma once

#include "gdaug/diffusion.hpp"
#include "gdaug/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gdaug {

struct BenchConfig {
  std::vector<int> only;  // check ids to run; empty runs all
  std::uint64_t seed = 0;
  Index n_seeds = 5;
  Index kernel_draws = 100000;
  Index gaussian_chains = 10000;
  Index mi_instances = 100;
  Index gradient_instances = 50;

  // Motif-task augmentation studies.
  Index motif_train = 500;
  Index motif_valid = 200;
  Index motif_augments = 200;
  Index diffusion_epochs = 30;
  Index motif_predictor_epochs = 40;
  SdeConfig sde = bench_sde();

  // End-to-end loop comparison.
  Index dct_unlabeled = 500;
  Index dct_train = 60;
  Index dct_valid = 100;
  Index dct_test = 400;
  Index dct_predictor_epochs = 60;
  Index dct_iterations = 5;

  bool enforce_time_limits = true;
  bool force_failure = false;

  static SdeConfig bench_sde();
  void validate() const;
};

nlohmann::json to_json(const BenchConfig& c);
BenchConfig bench_config_from_json(const nlohmann::json& j);

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string relation;  // how value is compared with threshold: "<", "<=", ">", ">=", "=="
  double threshold = 0.0;
  double seconds = 0.0;
  double time_limit = 0.0;  // seconds; 0 means unbounded
  nlohmann::json details = nlohmann::json::object();
};

nlohmann::json to_json(const CheckResult& r);
// "PASS  7 label-preservation: value=... (> 0.1) 12.3s"
std::string summary_line(const CheckResult& r);

inline constexpr int kNumChecks = 10;

using CheckCallback = std::function<void(const CheckResult&)>;

std::vector<CheckResult> run_acceptance(const BenchConfig& cfg, const CheckCallback& on_result = {});

}  // namespace gdaug
