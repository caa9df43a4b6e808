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


// Guided reverse diffusion for label-preserving augmentation.
//
// A source graph is perturbed to t_D = d_steps / n_grid and pulled back down
// the grid. Each outer step first runs a short unguided inner chain to a
// denoised estimate G_hat, evaluates
//   L(G_hat) = I_bound(G_hat; G) - log p(y | f(G_hat))
// and its gradient there, and adds -alpha * grad L to the model score, with
// alpha = |s| / |grad L| so that the guidance has the same norm as the score.
// The gradient is not propagated through the inner chain.
//
// I_bound is the leave-one-out contrastive bound
//   log( p_pos / sum_{j != pos} p_j ),  p = softmax(cos(phi(G_hat), phi(c_j)))
// over the source and M - 1 negatives with a different label.

#pragma once

#include "gdaug/diffusion.hpp"
#include "gdaug/features.hpp"
#include "gdaug/graph.hpp"
#include "gdaug/predictor.hpp"
#include "gdaug/random.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gdaug {

struct AugmentConfig {
  Index d_steps = 5;
  Index m_negatives = 5;
  Index inner_grid_cap = 5;
  double regression_delta = 1.0;  // label units
  double smooth_temp = kDefaultSmoothTemp;
  bool use_mi_bound = true;
  bool use_label_likelihood = true;

  void validate() const;
};

nlohmann::json to_json(const AugmentConfig& c);
// inner_grid_cap defaults to d_steps when absent.
AugmentConfig augment_config_from_json(const nlohmann::json& j, const AugmentConfig& defaults = {});

struct AugmentDiagnostics {
  double bound = 0.0;  // evaluated on the discrete output
  double log_likelihood = 0.0;
  double feature_cosine = 1.0;  // statistical-feature cosine to the source
};

struct AugmentedExample {
  Graph graph;  // carries label == source label
  MaskedLabel label;
  std::string source_id;
  AugmentDiagnostics diagnostics;
};

nlohmann::json to_json(const AugmentedExample& e);
void write_augmented_jsonl(const std::filesystem::path& path, const std::vector<AugmentedExample>& examples);

// True when `other` may serve as a negative for label y.
bool is_negative(const MaskedLabel& y, const MaskedLabel& other, const TaskSpec& spec, double regression_delta);

// m - 1 distinct pool graphs drawn uniformly among the eligible ones.
std::vector<Graph> pick_negatives(const std::vector<Graph>& pool, const MaskedLabel& y, Index m, const TaskSpec& spec,
                                  double regression_delta, Rng& rng);

// log(p_0 / sum_{j>0} p_j) for p = softmax(log_critics); entry 0 is the positive.
double loo_bound(const Vector& log_critics);
ad::Var loo_bound(const ad::Var& log_critics);

double info_nce_bound(const ContinuousGraph& g_aug, const Graph& g_pos, const std::vector<Graph>& negatives,
                      const NodeTypeTable& table, double smooth_temp = kDefaultSmoothTemp);
ad::Var info_nce_bound(const ad::Var& features, const FeatureVector& positive,
                       const std::vector<FeatureVector>& negatives);

// Fixed ingredients of the guidance loss for one augment call.
struct GuidanceTarget {
  FeatureVector positive;
  std::vector<FeatureVector> negatives;
  MaskedLabel label;
  bool use_mi_bound = true;
  bool use_label_likelihood = true;
  double smooth_temp = kDefaultSmoothTemp;
};

GuidanceTarget make_guidance_target(const Graph& source, const MaskedLabel& y, const std::vector<Graph>& negatives,
                                    const NodeTypeTable& table, const AugmentConfig& cfg);

struct GuidanceLoss {
  double value = 0.0;
  double bound = 0.0;           // 0 when the bound term is disabled
  double log_likelihood = 0.0;  // 0 when the likelihood term is disabled
  GraphTensors grad;            // a-part: mirrored upper-triangular gradient
};

GuidanceLoss guidance_loss(const ContinuousGraph& g_aug, const GuidanceTarget& target,
                           const PredictorParams& predictor, const TaskSpec& spec, const NodeTypeTable& table);
GuidanceLoss guidance_loss(const ContinuousGraph& g_aug, const Graph& g_src, const MaskedLabel& y,
                           const std::vector<Graph>& negatives, const PredictorParams& predictor,
                           const TaskSpec& spec, const NodeTypeTable& table,
                           double smooth_temp = kDefaultSmoothTemp);

// |s| / |grad L|, or 0 when grad_norm is 0.
double alignment_alpha(double score_norm, double grad_norm);

// -alpha * grad, with alpha aligned to score_norm.
GraphTensors aligned_guidance(const GraphTensors& grad, double score_norm);

// Unguided reverse chain from t towards the grid floor, at most
// inner_grid_cap steps.
ContinuousGraph denoise_estimate(const ContinuousGraph& state, double t, const ScoreModel& model,
                                 const SdeConfig& cfg, const AugmentConfig& aug_cfg, Rng& rng);

// One guided outer step at state.time.
ContinuousGraph guided_step(const ContinuousGraph& state, const GuidanceTarget& target,
                            const PredictorParams& predictor, const TaskSpec& spec, const ScoreModel& model,
                            const SdeConfig& cfg, const AugmentConfig& aug_cfg, const NodeTypeTable& table,
                            Rng& outer, Rng& inner);

// Randomness: outer chain on stream 0, inner chains on stream 1 and the
// negative draw on stream 2, all derived from `seed`.
AugmentedExample augment(const Graph& g, const PredictorParams& predictor, const ScoreModel& model,
                         const SdeConfig& cfg, const AugmentConfig& aug_cfg, const std::vector<Graph>& pool,
                         const TaskSpec& spec, const NodeTypeTable& table, std::uint64_t seed);

}  // namespace gdaug
