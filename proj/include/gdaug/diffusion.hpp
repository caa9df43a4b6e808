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

// Variance-exploding diffusion on graphs.
//
// Forward process: dG = g(t) dw with zero drift,
//   sigma(t) = sigma_min * (sigma_max / sigma_min)^t
//   g(t)     = sigma(t) * sqrt(2 ln(sigma_max / sigma_min)),
// applied independently to node features x and to the upper triangle of the
// adjacency a. Time runs on the uniform grid t_k = k / n_grid, k = 1..n_grid.
//
// The reverse sampler alternates an Euler-Maruyama predictor step of
//   dG = -g(t)^2 s(G, t) dt + g(t) dw
// with Langevin corrector steps of size beta/2, where
//   beta = 2 (snr * |z| / |s|)^2
// per channel. Symmetry, zero diagonal and zero padding are re-imposed after
// every update.

#pragma once

#include "gdaug/autodiff.hpp"
#include "gdaug/graph.hpp"
#include "gdaug/nn.hpp"
#include "gdaug/random.hpp"
#include "gdaug/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace gdaug {

struct SdeConfig {
  double sigma_min = 0.1;
  double sigma_max = 1.0;
  Index n_grid = 1000;
  double snr = 0.16;
  double eps1 = 1.0;
  Index corrector_steps = 1;
  double edge_threshold = 0.5;

  void validate() const;
};

nlohmann::json to_json(const SdeConfig& c);
SdeConfig sde_config_from_json(const nlohmann::json& j, const SdeConfig& defaults = {});

template <typename Scalar>
Scalar sigma_at(Scalar t, Scalar sigma_min, Scalar sigma_max) {
  using std::pow;
  return sigma_min * pow(sigma_max / sigma_min, t);
}

template <typename Scalar>
Scalar diffusion_coeff(Scalar t, Scalar sigma_min, Scalar sigma_max) {
  using std::log;
  using std::sqrt;
  return sigma_at(t, sigma_min, sigma_max) * sqrt(Scalar(2) * log(sigma_max / sigma_min));
}

// Domain-checked forms; t outside [0, 1] throws DomainError.
double sigma_at(double t, const SdeConfig& cfg);
double diffusion_coeff(double t, const SdeConfig& cfg);

double grid_time(Index k, const SdeConfig& cfg);
// Grid index of t; throws DomainError when t is not a grid point in (0, 1].
Index grid_index(double t, const SdeConfig& cfg);

// Paired node-feature / adjacency tensors: scores, gradients, noise.
struct GraphTensors {
  Matrix x;
  Matrix a;

  static GraphTensors zeros_like(const ContinuousGraph& g);
  GraphTensors& operator+=(const GraphTensors& o);
  GraphTensors operator*(double s) const;
  // Joint Euclidean norm over both channels.
  double norm() const;
};

class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  // Score of the perturbed marginal at (g, t); zero on padding, a-part
  // symmetric with zero diagonal.
  virtual GraphTensors score(const ContinuousGraph& g, double t) const = 0;
};

class ZeroScore final : public ScoreModel {
 public:
  GraphTensors score(const ContinuousGraph& g, double t) const override;
};

// Exact score of a point mass at g0 perturbed by the VE kernel.
class PointMassScore final : public ScoreModel {
 public:
  PointMassScore(ContinuousGraph g0, SdeConfig cfg) : g0_(std::move(g0)), cfg_(cfg) {}
  GraphTensors score(const ContinuousGraph& g, double t) const override;

 private:
  ContinuousGraph g0_;
  SdeConfig cfg_;
};

// Exact score when every active entry is independently N(0, data_variance).
class IsotropicGaussianScore final : public ScoreModel {
 public:
  IsotropicGaussianScore(double data_variance, SdeConfig cfg) : data_variance_(data_variance), cfg_(cfg) {}
  GraphTensors score(const ContinuousGraph& g, double t) const override;

 private:
  double data_variance_;
  SdeConfig cfg_;
};

struct ScoreNetHyper {
  Index hidden = 32;
  Index pair_hidden = 32;
  Index layers = 2;
  nn::Activation activation = nn::Activation::kSilu;
  Index epochs = 100;
  Index batch_size = 32;
  double sigma_data = 0.5;
  nn::AdamConfig adam{.learning_rate = 2e-3, .grad_clip = 10.0};
};

nlohmann::json to_json(const ScoreNetHyper& h);
ScoreNetHyper score_net_hyper_from_json(const nlohmann::json& j, const ScoreNetHyper& defaults = {});

// Trainable score pair (s_x, s_a). Both heads predict a denoised graph D and
// the score is (D - G) / sigma(t)^2. s_x reads node states from a
// message-passing trunk; s_a feeds node-pair concatenations through an MLP and
// symmetrizes the result.
class ScoreNetworks final : public ScoreModel {
 public:
  static constexpr int kFormatVersion = 1;

  ScoreNetworks() = default;
  static ScoreNetworks init(Index num_types, const SdeConfig& cfg, const ScoreNetHyper& hyper, Rng& rng);

  GraphTensors score(const ContinuousGraph& g, double t) const override;

  struct Denoised {
    ad::Var x;
    ad::Var a;
  };
  Denoised denoise(nn::Binder& bind, const ad::Var& x, const ad::Var& a, const Mask& node_mask, double t) const;

  Index num_types() const { return num_types_; }
  const SdeConfig& sde() const { return sde_; }

  template <typename F>
  void visit(F&& f) {
    node_in_.visit(f);
    time_embed_.visit(f);
    for (auto& l : trunk_) l.visit(f);
    x_head_.visit(f);
    pair_left_.visit(f);
    f(pair_right_);
    f(pair_edge_);
    pair_out_.visit(f);
  }

  nlohmann::json to_json() const;
  static ScoreNetworks from_json(const nlohmann::json& j);

 private:
  Index num_types_ = 0;
  double sigma_data_ = 0.5;
  SdeConfig sde_;
  nn::Linear node_in_;    // [c_in x, degree, time] -> H
  nn::Linear time_embed_;  // time features -> H, added before every trunk layer
  std::vector<nn::Mlp> trunk_;
  nn::Mlp x_head_;        // [h, c_in x] -> F
  nn::Linear pair_left_;  // h_i -> K (with bias)
  Matrix pair_right_;     // h_j -> K
  Matrix pair_edge_;      // 1 x K, weight of c_in a_ij
  nn::Mlp pair_out_;      // K -> 1
};

struct PerturbResult {
  ContinuousGraph graph;
  GraphTensors noise;  // standard normal draws; a-part symmetric
};

// g0 + sigma(t) z on active entries; z_a drawn on the upper triangle and mirrored.
PerturbResult perturb_with_noise(const ContinuousGraph& g0, double t, const SdeConfig& cfg, Rng& rng);
ContinuousGraph perturb(const ContinuousGraph& g0, double t, const SdeConfig& cfg, Rng& rng);

// sum of sigma(t) s + z over the independent entries, averaged over the batch.
double dsm_loss(const ScoreModel& model, const std::vector<ContinuousGraph>& batch, const SdeConfig& cfg, Rng& rng);

struct DiffusionTrainResult {
  ScoreNetworks nets;
  std::vector<double> loss_curve;  // mean loss per epoch
};

DiffusionTrainResult train_diffusion(const std::vector<Graph>& unlabeled, const SdeConfig& cfg,
                                     const ScoreNetHyper& hyper, Index num_types, std::uint64_t seed);

// One predictor step from grid time t plus the corrector steps; output time
// t - 1/n_grid. extra_score is added to the model score of both updates.
ContinuousGraph pc_reverse_step(const ContinuousGraph& state, double t, const ScoreModel& model, const SdeConfig& cfg,
                                Rng& rng, const std::optional<GraphTensors>& extra_score = std::nullopt);

// `steps` unguided reverse steps starting at state.time.
ContinuousGraph reverse_steps(ContinuousGraph state, Index steps, const ScoreModel& model, const SdeConfig& cfg,
                              Rng& rng);

// Perturb to t = d_steps / n_grid, then d_steps unguided reverse steps.
ContinuousGraph perturb_then_denoise(const ContinuousGraph& g0, Index d_steps, const ScoreModel& model,
                                     const SdeConfig& cfg, Rng& rng);

// Full generation from N(0, sigma_max^2) at t = 1.
ContinuousGraph sample_unconditional_state(Index n_nodes, Index num_types, Index n_max, const ScoreModel& model,
                                           const SdeConfig& cfg, Rng& rng);
Graph sample_unconditional(Index n_nodes, Index n_max, const ScoreModel& model, const SdeConfig& cfg,
                           const NodeTypeTable& table, Rng& rng);

}  // namespace gdaug
