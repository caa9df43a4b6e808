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


#include "gdaug/augmentor.hpp"

#include "gdaug/errors.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

namespace gdaug {

void AugmentConfig::validate() const {
  if (d_steps < 0 || d_steps > 10) throw ConfigError("augment: d_steps must lie in [0, 10]");
  if (m_negatives < 2 || m_negatives > 10) throw ConfigError("augment: m_negatives must lie in [2, 10]");
  if (inner_grid_cap < 1) throw ConfigError("augment: inner_grid_cap must be positive");
  if (!(regression_delta > 0.0)) throw ConfigError("augment: regression_delta must be positive");
  if (!(smooth_temp > 0.0)) throw ConfigError("augment: smooth_temp must be positive");
}

nlohmann::json to_json(const AugmentConfig& c) {
  return {{"d_steps", c.d_steps},
          {"m_negatives", c.m_negatives},
          {"inner_grid_cap", c.inner_grid_cap},
          {"regression_delta", c.regression_delta},
          {"smooth_temp", c.smooth_temp},
          {"use_mi_bound", c.use_mi_bound},
          {"use_label_likelihood", c.use_label_likelihood}};
}

AugmentConfig augment_config_from_json(const nlohmann::json& j, const AugmentConfig& d) {
  AugmentConfig c;
  c.d_steps = j.value("d_steps", d.d_steps);
  c.m_negatives = j.value("m_negatives", d.m_negatives);
  c.inner_grid_cap = j.value("inner_grid_cap", j.contains("d_steps") ? std::max<Index>(c.d_steps, 1) : d.inner_grid_cap);
  c.regression_delta = j.value("regression_delta", d.regression_delta);
  c.smooth_temp = j.value("smooth_temp", d.smooth_temp);
  c.use_mi_bound = j.value("use_mi_bound", d.use_mi_bound);
  c.use_label_likelihood = j.value("use_label_likelihood", d.use_label_likelihood);
  c.validate();
  return c;
}

nlohmann::json to_json(const AugmentedExample& e) {
  nlohmann::json j = graph_to_json(e.graph);
  j["source_id"] = e.source_id;
  j["diagnostics"] = {{"bound", e.diagnostics.bound},
                      {"log_likelihood", e.diagnostics.log_likelihood},
                      {"feature_cosine", e.diagnostics.feature_cosine}};
  return j;
}

void write_augmented_jsonl(const std::filesystem::path& path, const std::vector<AugmentedExample>& examples) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& e : examples) out << to_json(e).dump() << '\n';
}

bool is_negative(const MaskedLabel& y, const MaskedLabel& other, const TaskSpec& spec, double regression_delta) {
  if (other.size() != y.size()) return false;
  for (Index k = 0; k < y.size(); ++k) {
    if (!y.valid(k) || !other.valid(k)) continue;
    if (spec.is_classification()) {
      if ((y.values(k) > 0.5) != (other.values(k) > 0.5)) return true;
    } else if (std::abs(other.values(k) - y.values(k)) > regression_delta) {
      return true;
    }
  }
  return false;
}

std::vector<Graph> pick_negatives(const std::vector<Graph>& pool, const MaskedLabel& y, Index m, const TaskSpec& spec,
                                  double regression_delta, Rng& rng) {
  if (m < 2) throw DomainError("need m >= 2 for a contrastive bound");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (is_negative(y, pool[i].label, spec, regression_delta)) eligible.push_back(i);
  }
  const auto need = static_cast<std::size_t>(m - 1);
  if (eligible.size() < need) {
    throw InsufficientNegativesError("only " + std::to_string(eligible.size()) + " eligible negatives, need " +
                                     std::to_string(need));
  }
  // Partial Fisher-Yates over the eligible indices.
  for (std::size_t i = 0; i < need; ++i) {
    const std::size_t j = i + uniform_index(rng, eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
  }
  std::vector<Graph> out;
  out.reserve(need);
  for (std::size_t i = 0; i < need; ++i) out.push_back(pool[eligible[i]]);
  return out;
}

double loo_bound(const Vector& log_critics) {
  if (log_critics.size() < 2) throw DegenerateInputError("bound needs a positive and at least one negative");
  const Vector rest = log_critics.tail(log_critics.size() - 1);
  const double shift = rest.maxCoeff();
  return log_critics(0) - (shift + std::log((rest.array() - shift).exp().sum()));
}

ad::Var loo_bound(const ad::Var& log_critics) {
  const Index m = log_critics.cols();
  if (log_critics.rows() != 1 || m < 2) throw DegenerateInputError("bound needs a positive and at least one negative");
  return ad::block(log_critics, 0, 0, 1, 1) - ad::log_sum_exp(ad::block(log_critics, 0, 1, 1, m - 1));
}

ad::Var info_nce_bound(const ad::Var& features, const FeatureVector& positive,
                       const std::vector<FeatureVector>& negatives) {
  if (negatives.empty()) throw DegenerateInputError("bound needs at least one negative");
  std::vector<FeatureVector> candidates;
  candidates.reserve(negatives.size() + 1);
  candidates.push_back(positive);
  candidates.insert(candidates.end(), negatives.begin(), negatives.end());
  return loo_bound(cosine_logits(features, candidates));
}

double info_nce_bound(const ContinuousGraph& g_aug, const Graph& g_pos, const std::vector<Graph>& negatives,
                      const NodeTypeTable& table, double smooth_temp) {
  if (negatives.empty()) throw DegenerateInputError("bound needs at least one negative");
  const FeatureVector f = statistical_features(g_aug, table, smooth_temp);
  std::vector<FeatureVector> candidates{statistical_features(g_pos, table, smooth_temp)};
  for (const auto& n : negatives) candidates.push_back(statistical_features(n, table, smooth_temp));
  // Softmax normalization cancels in the ratio, so the cosines are the critics.
  Vector cos(static_cast<Index>(candidates.size()));
  for (std::size_t j = 0; j < candidates.size(); ++j) cos(static_cast<Index>(j)) = cosine_similarity(f, candidates[j]);
  return loo_bound(cos);
}

GuidanceTarget make_guidance_target(const Graph& source, const MaskedLabel& y, const std::vector<Graph>& negatives,
                                    const NodeTypeTable& table, const AugmentConfig& cfg) {
  GuidanceTarget t;
  t.positive = statistical_features(source, table, cfg.smooth_temp);
  for (const auto& n : negatives) t.negatives.push_back(statistical_features(n, table, cfg.smooth_temp));
  t.label = y;
  t.use_mi_bound = cfg.use_mi_bound;
  t.use_label_likelihood = cfg.use_label_likelihood;
  t.smooth_temp = cfg.smooth_temp;
  return t;
}

GuidanceLoss guidance_loss(const ContinuousGraph& g_aug, const GuidanceTarget& target,
                           const PredictorParams& predictor, const TaskSpec& spec, const NodeTypeTable& table) {
  GuidanceLoss out;
  out.grad = GraphTensors::zeros_like(g_aug);
  if (!target.use_mi_bound && !target.use_label_likelihood) return out;
  ad::Tape tape;
  nn::Binder bind(tape, false);
  ad::Var x = tape.variable(g_aug.x);
  ad::Var a = tape.variable(g_aug.a);
  std::optional<ad::Var> loss;
  if (target.use_mi_bound) {
    ad::Var f = statistical_features(x, a, g_aug.node_mask, table, target.smooth_temp);
    ad::Var b = info_nce_bound(f, target.positive, target.negatives);
    out.bound = b.scalar();
    loss = b;
  }
  if (target.use_label_likelihood) {
    if (!target.label.any_valid()) throw DegenerateInputError("guidance undefined for a fully masked label");
    PredictorForward fwd = predictor_forward(bind, x, a, g_aug.node_mask, predictor);
    ad::Var ll = label_log_likelihood(fwd.outputs, target.label, spec);
    out.log_likelihood = ll.scalar();
    loss = loss ? *loss - ll : -ll;
  }
  tape.backward(*loss);
  out.value = loss->scalar();
  out.grad.x = mask_rows(x.grad(), g_aug.node_mask);
  out.grad.a = symmetric_gradient(a.grad(), g_aug.node_mask);
  return out;
}

GuidanceLoss guidance_loss(const ContinuousGraph& g_aug, const Graph& g_src, const MaskedLabel& y,
                           const std::vector<Graph>& negatives, const PredictorParams& predictor,
                           const TaskSpec& spec, const NodeTypeTable& table, double smooth_temp) {
  AugmentConfig cfg;
  cfg.smooth_temp = smooth_temp;
  return guidance_loss(g_aug, make_guidance_target(g_src, y, negatives, table, cfg), predictor, spec, table);
}

double alignment_alpha(double score_norm, double grad_norm) {
  if (grad_norm == 0.0) return 0.0;
  return score_norm / grad_norm;
}

GraphTensors aligned_guidance(const GraphTensors& grad, double score_norm) {
  return grad * (-alignment_alpha(score_norm, grad.norm()));
}

ContinuousGraph denoise_estimate(const ContinuousGraph& state, double t, const ScoreModel& model,
                                 const SdeConfig& cfg, const AugmentConfig& aug_cfg, Rng& rng) {
  const Index k = grid_index(t, cfg);
  ContinuousGraph s = state;
  s.time = t;
  return reverse_steps(std::move(s), std::min(k - 1, aug_cfg.inner_grid_cap), model, cfg, rng);
}

ContinuousGraph guided_step(const ContinuousGraph& state, const GuidanceTarget& target,
                            const PredictorParams& predictor, const TaskSpec& spec, const ScoreModel& model,
                            const SdeConfig& cfg, const AugmentConfig& aug_cfg, const NodeTypeTable& table,
                            Rng& outer, Rng& inner) {
  const double t = state.time;
  if (!target.use_mi_bound && !target.use_label_likelihood) return pc_reverse_step(state, t, model, cfg, outer);
  const ContinuousGraph g_hat = denoise_estimate(state, t, model, cfg, aug_cfg, inner);
  const GuidanceLoss loss = guidance_loss(g_hat, target, predictor, spec, table);
  const double score_norm = model.score(state, t).norm();
  return pc_reverse_step(state, t, model, cfg, outer, aligned_guidance(loss.grad, score_norm));
}

AugmentedExample augment(const Graph& g, const PredictorParams& predictor, const ScoreModel& model,
                         const SdeConfig& cfg, const AugmentConfig& aug_cfg, const std::vector<Graph>& pool,
                         const TaskSpec& spec, const NodeTypeTable& table, std::uint64_t seed) {
  aug_cfg.validate();
  const MaskedLabel& y = g.label;
  if (!y.any_valid()) throw DegenerateInputError("cannot augment a graph whose label is fully masked");
  if (aug_cfg.d_steps > cfg.n_grid) throw ConfigError("augment: d_steps exceeds the time grid");
  Rng outer = make_rng(seed, 0);
  Rng inner = make_rng(seed, 1);
  Rng neg_rng = make_rng(seed, 2);

  const std::vector<Graph> negatives = pick_negatives(pool, y, aug_cfg.m_negatives, spec, aug_cfg.regression_delta,
                                                      neg_rng);
  const GuidanceTarget target = make_guidance_target(g, y, negatives, table, aug_cfg);

  AugmentedExample out;
  out.source_id = g.id;
  out.label = y;
  if (aug_cfg.d_steps == 0) {
    out.graph = g;
  } else {
    const ContinuousGraph g0 = to_continuous(g, table.size(), g.num_nodes());
    ContinuousGraph state = perturb(g0, grid_time(aug_cfg.d_steps, cfg), cfg, outer);
    for (Index s = 0; s < aug_cfg.d_steps; ++s) {
      state = guided_step(state, target, predictor, spec, model, cfg, aug_cfg, table, outer, inner);
    }
    out.graph = discretize(state, cfg.edge_threshold, table);
    out.graph.label = y;
    out.graph.id = g.id + "+aug";
  }

  GuidanceTarget full = target;
  full.use_mi_bound = true;
  full.use_label_likelihood = true;
  const ContinuousGraph final_state = to_continuous(out.graph, table.size(), out.graph.num_nodes());
  const GuidanceLoss diag = guidance_loss(final_state, full, predictor, spec, table);
  out.diagnostics.bound = diag.bound;
  out.diagnostics.log_likelihood = diag.log_likelihood;
  out.diagnostics.feature_cosine =
      cosine_similarity(statistical_features(final_state, table, aug_cfg.smooth_temp), target.positive);
  return out;
}

}  // namespace gdaug
