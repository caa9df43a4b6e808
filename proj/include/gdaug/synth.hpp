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


// Synthetic motif tasks with exact label oracles, and the toy-distribution
// machinery used to check the contrastive bound against exact mutual
// information. All quantities are in nats.

#pragma once

#include "gdaug/augmentor.hpp"
#include "gdaug/graph.hpp"
#include "gdaug/predictor.hpp"
#include "gdaug/random.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace gdaug {

enum class Motif { kTriangleCount, kStarPresence };

Motif parse_motif(const std::string& s);
std::string to_string(Motif m);

struct SyntheticTaskConfig {
  Index n_graphs = 500;
  Index n_lo = 6;
  Index n_hi = 12;
  double density = 0.25;
  Motif motif = Motif::kTriangleCount;
  double threshold = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const SyntheticTaskConfig& c);
SyntheticTaskConfig synthetic_task_config_from_json(const nlohmann::json& j, const SyntheticTaskConfig& d = {});

struct SyntheticTask {
  std::vector<Graph> graphs;
  TaskSpec spec;
};

// Erdos-Renyi graphs with uniform node types. Classes are balanced by
// rejection to at least 40% each within a budget of 10 * n_graphs draws.
SyntheticTask gen_synthetic_task(const SyntheticTaskConfig& cfg, const NodeTypeTable& table);

Index triangle_count(const Graph& g);
Index max_degree(const Graph& g);
double oracle_label(const Graph& g, Motif motif, double threshold);

struct JointPmf {
  Matrix p;  // |G| x |Y|

  void validate() const;
  Vector marginal_g() const { return p.rowwise().sum(); }
  RowVector marginal_y() const { return p.colwise().sum(); }
};

double brute_force_mi(const JointPmf& pmf);

// Dirichlet(1) draw over a |G| x |Y| grid.
JointPmf random_joint_pmf(Index n_g, Index n_y, Rng& rng);

// Exact expectation, over a positive pair (g, y) from the joint and m - 1
// independent negatives from the marginal of g, of loo_bound with critics
// log p(y | g_j), plus ln(m - 1). Enumerates all |G|^m negative tuples.
double expected_loo_bound(const JointPmf& pmf, Index m);

double label_preservation_rate(const std::vector<AugmentedExample>& augmented, Motif motif, double threshold);

// Mean statistical-feature cosine between each augmented graph and its source.
double diversity_score(const std::vector<AugmentedExample>& augmented, const std::vector<Graph>& sources,
                       const NodeTypeTable& table);

}  // namespace gdaug
