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

#include "gdaug/diffusion.hpp"

#include "gdaug/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gdaug {

void SdeConfig::validate() const {
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min)) throw ConfigError("sde: need 0 < sigma_min < sigma_max");
  if (n_grid < 2) throw ConfigError("sde: n_grid must be at least 2");
  if (!(snr > 0.0)) throw ConfigError("sde: snr must be positive");
  if (eps1 < 0.0) throw ConfigError("sde: eps1 must be non-negative");
  if (corrector_steps < 0) throw ConfigError("sde: corrector_steps must be non-negative");
  if (!(edge_threshold > 0.0 && edge_threshold < 1.0)) throw ConfigError("sde: edge_threshold must lie in (0,1)");
}

nlohmann::json to_json(const SdeConfig& c) {
  return {{"sigma_min", c.sigma_min},   {"sigma_max", c.sigma_max},
          {"n_grid", c.n_grid},         {"snr", c.snr},
          {"eps1", c.eps1},             {"corrector_steps", c.corrector_steps},
          {"edge_threshold", c.edge_threshold}};
}

SdeConfig sde_config_from_json(const nlohmann::json& j, const SdeConfig& d) {
  SdeConfig c;
  c.sigma_min = j.value("sigma_min", d.sigma_min);
  c.sigma_max = j.value("sigma_max", d.sigma_max);
  c.n_grid = j.value("n_grid", d.n_grid);
  c.snr = j.value("snr", d.snr);
  c.eps1 = j.value("eps1", d.eps1);
  c.corrector_steps = j.value("corrector_steps", d.corrector_steps);
  c.edge_threshold = j.value("edge_threshold", d.edge_threshold);
  c.validate();
  return c;
}

double sigma_at(double t, const SdeConfig& cfg) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("sigma_at: t must lie in [0, 1]");
  return sigma_at<double>(t, cfg.sigma_min, cfg.sigma_max);
}

double diffusion_coeff(double t, const SdeConfig& cfg) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("diffusion_coeff: t must lie in [0, 1]");
  return diffusion_coeff<double>(t, cfg.sigma_min, cfg.sigma_max);
}

double grid_time(Index k, const SdeConfig& cfg) {
  if (k < 0 || k > cfg.n_grid) throw DomainError("grid index out of range");
  return static_cast<double>(k) / static_cast<double>(cfg.n_grid);
}

Index grid_index(double t, const SdeConfig& cfg) {
  const double scaled = t * static_cast<double>(cfg.n_grid);
  const double k = std::round(scaled);
  if (std::abs(scaled - k) > 1e-6 || k < 1 || k > static_cast<double>(cfg.n_grid)) {
    throw DomainError("time " + std::to_string(t) + " is not a grid point in (0, 1]");
  }
  return static_cast<Index>(k);
}

GraphTensors GraphTensors::zeros_like(const ContinuousGraph& g) {
  return {Matrix::Zero(g.x.rows(), g.x.cols()), Matrix::Zero(g.a.rows(), g.a.cols())};
}

GraphTensors& GraphTensors::operator+=(const GraphTensors& o) {
  x += o.x;
  a += o.a;
  return *this;
}

GraphTensors GraphTensors::operator*(double s) const { return {s * x, s * a}; }

double GraphTensors::norm() const { return std::sqrt(x.squaredNorm() + a.squaredNorm()); }

namespace {

// Standard normal on active x rows and on active upper-triangular pairs, mirrored.
GraphTensors graph_noise(const ContinuousGraph& g, Rng& rng) {
  const Index n = g.capacity();
  GraphTensors z;
  z.x = mask_rows(standard_normal(rng, n, g.num_types()), g.node_mask);
  Matrix full = standard_normal(rng, n, n);
  z.a = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      if (!g.node_mask(i) || !g.node_mask(j)) continue;
      z.a(i, j) = full(i, j);
      z.a(j, i) = full(i, j);
    }
  return z;
}

// Norm over the independent (upper-triangular) entries of a symmetric matrix.
double upper_norm(const Matrix& sym) { return std::sqrt(0.5 * sym.squaredNorm()); }

GraphTensors masked(GraphTensors s, const ContinuousGraph& g) {
  s.x = mask_rows(s.x, g.node_mask);
  s.a = symmetrized(s.a).cwiseProduct(pair_mask(g.node_mask));
  return s;
}

}  // namespace

GraphTensors ZeroScore::score(const ContinuousGraph& g, double) const { return GraphTensors::zeros_like(g); }

GraphTensors PointMassScore::score(const ContinuousGraph& g, double t) const {
  const double var = std::pow(sigma_at(t, cfg_), 2);
  return masked({-(g.x - g0_.x) / var, -(g.a - g0_.a) / var}, g);
}

GraphTensors IsotropicGaussianScore::score(const ContinuousGraph& g, double t) const {
  const double var = data_variance_ + std::pow(sigma_at(t, cfg_), 2);
  return masked({-g.x / var, -g.a / var}, g);
}

nlohmann::json to_json(const ScoreNetHyper& h) {
  return {{"hidden", h.hidden},
          {"pair_hidden", h.pair_hidden},
          {"layers", h.layers},
          {"activation", nn::to_string(h.activation)},
          {"epochs", h.epochs},
          {"batch_size", h.batch_size},
          {"sigma_data", h.sigma_data},
          {"learning_rate", h.adam.learning_rate},
          {"grad_clip", h.adam.grad_clip}};
}

ScoreNetHyper score_net_hyper_from_json(const nlohmann::json& j, const ScoreNetHyper& d) {
  ScoreNetHyper h = d;
  h.hidden = j.value("hidden", d.hidden);
  h.pair_hidden = j.value("pair_hidden", d.pair_hidden);
  h.layers = j.value("layers", d.layers);
  h.activation = nn::parse_activation(j.value("activation", nn::to_string(d.activation)));
  h.epochs = j.value("epochs", d.epochs);
  h.batch_size = j.value("batch_size", d.batch_size);
  h.sigma_data = j.value("sigma_data", d.sigma_data);
  h.adam.learning_rate = j.value("learning_rate", d.adam.learning_rate);
  h.adam.grad_clip = j.value("grad_clip", d.adam.grad_clip);
  if (h.hidden < 1 || h.pair_hidden < 1 || h.layers < 0 || h.epochs < 0 || h.batch_size < 1 ||
      !(h.sigma_data > 0.0)) {
    throw ConfigError("score network hyperparameters out of range");
  }
  return h;
}

ScoreNetworks ScoreNetworks::init(Index num_types, const SdeConfig& cfg, const ScoreNetHyper& hyper, Rng& rng) {
  cfg.validate();
  ScoreNetworks s;
  s.num_types_ = num_types;
  s.sigma_data_ = hyper.sigma_data;
  s.sde_ = cfg;
  const Index h = hyper.hidden;
  const Index k = hyper.pair_hidden;
  s.node_in_ = nn::Linear::init(num_types + 3, h, rng);
  s.time_embed_ = nn::Linear::init(2, h, rng);
  for (Index l = 0; l < hyper.layers; ++l) s.trunk_.push_back(nn::Mlp::init({h, h, h}, hyper.activation, true, rng));
  s.x_head_ = nn::Mlp::init({h + num_types, h, num_types}, hyper.activation, false, rng);
  s.pair_left_ = nn::Linear::init(h, k, rng);
  s.pair_right_ = nn::Linear::init(h, k, rng).weight;
  s.pair_edge_ = nn::Linear::init(1, k, rng).weight;
  s.pair_out_ = nn::Mlp::init({k, k, 1}, hyper.activation, false, rng);
  return s;
}

ScoreNetworks::Denoised ScoreNetworks::denoise(nn::Binder& bind, const ad::Var& x, const ad::Var& a,
                                               const Mask& node_mask, double t) const {
  ad::Tape& tape = bind.tape();
  const Index n = x.rows();
  if (x.cols() != num_types_) throw DimensionError("score network: node feature width mismatch");
  if (a.rows() != n || a.cols() != n || node_mask.size() != n) throw DimensionError("score network: shape mismatch");
  const double sigma = sigma_at(t, sde_);
  const double c_in = 1.0 / std::sqrt(sigma * sigma + sigma_data_ * sigma_data_);
  const Index hidden = node_in_.out();

  const Matrix mask_col = node_mask.cast<double>().matrix();
  ad::Var mask_h = tape.constant(Matrix(mask_col.replicate(1, hidden)));
  ad::Var mask_f = tape.constant(Matrix(mask_col.replicate(1, num_types_)));
  ad::Var support = tape.constant(pair_mask(node_mask));

  ad::Var xin = c_in * x;
  ad::Var ain = ad::hadamard(c_in * a, support);
  Matrix time_row(1, 2);
  time_row << std::log(sigma) / 4.0, c_in;
  ad::Var time_features = tape.constant(time_row);

  ad::Var inp = ad::hconcat({xin, ad::rowwise_sum(ain), ad::broadcast_rows(time_features, n)});
  ad::Var h = ad::hadamard(nn::activate(node_in_.forward(bind, inp), trunk_.empty() ? nn::Activation::kSilu
                                                                                    : trunk_.front().activation),
                           mask_h);
  ad::Var temb = ad::broadcast_rows(time_embed_.forward(bind, time_features), n);
  for (const auto& layer : trunk_) {
    ad::Var agg = h + ad::matmul(ain, h) + temb;
    h = ad::hadamard(layer.forward(bind, agg) + h, mask_h);
  }

  ad::Var dx = ad::hadamard(x_head_.forward(bind, ad::hconcat({h, xin})), mask_f);

  // Pair (i, j) sits at row i + j * n of the flattened n^2 layout.
  Matrix pick_i = Matrix::Zero(n * n, n);
  Matrix pick_j = Matrix::Zero(n * n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      pick_i(i + j * n, i) = 1.0;
      pick_j(i + j * n, j) = 1.0;
    }
  ad::Var left = pair_left_.forward(bind, h);
  ad::Var right = ad::matmul(h, bind(pair_right_));
  ad::Var edge = ad::matmul(ad::reshape(ain, n * n, 1), bind(pair_edge_));
  ad::Var pre = ad::matmul(tape.constant(pick_i), left) + ad::matmul(tape.constant(pick_j), right) + edge;
  ad::Var out = pair_out_.forward(bind, nn::activate(pre, pair_out_.activation));
  ad::Var m = ad::reshape(out, n, n);
  ad::Var da = ad::hadamard(0.5 * (m + ad::transpose(m)), support);
  return {dx, da};
}

GraphTensors ScoreNetworks::score(const ContinuousGraph& g, double t) const {
  ad::Tape tape;
  nn::Binder bind(tape, false);
  Denoised d = denoise(bind, tape.constant(g.x), tape.constant(g.a), g.node_mask, t);
  const double var = std::pow(sigma_at(t, sde_), 2);
  return masked({(d.x.value() - g.x) / var, (d.a.value() - g.a) / var}, g);
}

nlohmann::json ScoreNetworks::to_json() const {
  nlohmann::json trunk = nlohmann::json::array();
  for (const auto& l : trunk_) trunk.push_back(nn::to_json(l));
  return {{"format", "gdaug.score_networks"},
          {"format_version", kFormatVersion},
          {"num_types", num_types_},
          {"sigma_data", sigma_data_},
          {"sde", gdaug::to_json(sde_)},
          {"node_in", nn::to_json(node_in_)},
          {"time_embed", nn::to_json(time_embed_)},
          {"trunk", trunk},
          {"x_head", nn::to_json(x_head_)},
          {"pair_left", nn::to_json(pair_left_)},
          {"pair_right", nn::matrix_to_json(pair_right_)},
          {"pair_edge", nn::matrix_to_json(pair_edge_)},
          {"pair_out", nn::to_json(pair_out_)}};
}

ScoreNetworks ScoreNetworks::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) throw ParseError("unsupported score checkpoint version");
    ScoreNetworks s;
    s.num_types_ = j.at("num_types").get<Index>();
    s.sigma_data_ = j.at("sigma_data").get<double>();
    s.sde_ = sde_config_from_json(j.at("sde"));
    s.node_in_ = nn::linear_from_json(j.at("node_in"));
    s.time_embed_ = nn::linear_from_json(j.at("time_embed"));
    for (const auto& l : j.at("trunk")) s.trunk_.push_back(nn::mlp_from_json(l));
    s.x_head_ = nn::mlp_from_json(j.at("x_head"));
    s.pair_left_ = nn::linear_from_json(j.at("pair_left"));
    s.pair_right_ = nn::matrix_from_json(j.at("pair_right"));
    s.pair_edge_ = nn::matrix_from_json(j.at("pair_edge"));
    s.pair_out_ = nn::mlp_from_json(j.at("pair_out"));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("score checkpoint: ") + e.what());
  }
}

PerturbResult perturb_with_noise(const ContinuousGraph& g0, double t, const SdeConfig& cfg, Rng& rng) {
  const double sigma = sigma_at(t, cfg);
  PerturbResult r;
  r.noise = graph_noise(g0, rng);
  r.graph = g0;
  r.graph.x += sigma * r.noise.x;
  r.graph.a += sigma * r.noise.a;
  r.graph.project();
  r.graph.time = t;
  return r;
}

ContinuousGraph perturb(const ContinuousGraph& g0, double t, const SdeConfig& cfg, Rng& rng) {
  return perturb_with_noise(g0, t, cfg, rng).graph;
}

double dsm_loss(const ScoreModel& model, const std::vector<ContinuousGraph>& batch, const SdeConfig& cfg, Rng& rng) {
  if (batch.empty()) throw DegenerateInputError("dsm loss of an empty batch");
  double total = 0.0;
  for (const auto& g0 : batch) {
    const Index k = 1 + static_cast<Index>(uniform_index(rng, static_cast<std::size_t>(cfg.n_grid)));
    const double t = grid_time(k, cfg);
    const double sigma = sigma_at(t, cfg);
    PerturbResult p = perturb_with_noise(g0, t, cfg, rng);
    const GraphTensors s = model.score(p.graph, t);
    const Matrix rx = mask_rows(Matrix(sigma * s.x + p.noise.x), g0.node_mask);
    const Matrix ra = (sigma * s.a + p.noise.a).cwiseProduct(pair_mask(g0.node_mask));
    total += rx.squaredNorm() + 0.5 * ra.squaredNorm();
  }
  return total / static_cast<double>(batch.size());
}

DiffusionTrainResult train_diffusion(const std::vector<Graph>& unlabeled, const SdeConfig& cfg,
                                     const ScoreNetHyper& hyper, Index num_types, std::uint64_t seed) {
  if (unlabeled.empty()) throw DegenerateInputError("diffusion training set is empty");
  cfg.validate();
  Rng init_rng = make_rng(seed, 20);
  Rng rng = make_rng(seed, 21);
  DiffusionTrainResult result{ScoreNetworks::init(num_types, cfg, hyper, init_rng), {}};
  ScoreNetworks& nets = result.nets;
  std::vector<ContinuousGraph> data;
  data.reserve(unlabeled.size());
  for (const auto& g : unlabeled) data.push_back(to_continuous(g, num_types, g.num_nodes()));

  nn::Adam adam(hyper.adam);
  const auto params = nn::parameters(nets);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(hyper.batch_size);
  for (Index epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      ad::Tape tape;
      nn::Binder bind(tape, true);
      std::vector<ad::Var> losses;
      for (std::size_t b = start; b < stop; ++b) {
        const ContinuousGraph& g0 = data[order[b]];
        const Index k = 1 + static_cast<Index>(uniform_index(rng, static_cast<std::size_t>(cfg.n_grid)));
        const double t = grid_time(k, cfg);
        const double sigma = sigma_at(t, cfg);
        const ContinuousGraph gt = perturb(g0, t, cfg, rng);
        auto d = nets.denoise(bind, tape.constant(gt.x), tape.constant(gt.a), gt.node_mask, t);
        // |sigma s + z|^2 = |(D - g0) / sigma|^2 on the independent entries.
        ad::Var rx = (1.0 / sigma) * (d.x - tape.constant(g0.x));
        ad::Var ra = (1.0 / sigma) * (d.a - tape.constant(g0.a));
        ad::Var loss = ad::sum(ad::square(rx)) + 0.5 * ad::sum(ad::square(ra));
        epoch_total += loss.scalar();
        losses.push_back(loss);
      }
      ad::Var total = losses.front();
      for (std::size_t i = 1; i < losses.size(); ++i) total = total + losses[i];
      total = (1.0 / static_cast<double>(losses.size())) * total;
      tape.backward(total);
      std::vector<Matrix> grads;
      grads.reserve(params.size());
      for (Matrix* m : params) grads.push_back(bind.grad(*m));
      adam.step(params, std::move(grads));
    }
    result.loss_curve.push_back(epoch_total / static_cast<double>(data.size()));
  }
  return result;
}

namespace {

void corrector_update(ContinuousGraph& state, const GraphTensors& score, const SdeConfig& cfg, Rng& rng) {
  const GraphTensors z = graph_noise(state, rng);
  const double sx = score.x.norm();
  if (sx > 0.0) {
    const double beta = 2.0 * std::pow(cfg.snr * z.x.norm() / sx, 2);
    state.x += (beta / 2.0) * score.x + cfg.eps1 * std::sqrt(beta) * z.x;
  }
  const double sa = upper_norm(score.a);
  if (sa > 0.0) {
    const double beta = 2.0 * std::pow(cfg.snr * upper_norm(z.a) / sa, 2);
    state.a += (beta / 2.0) * score.a + cfg.eps1 * std::sqrt(beta) * z.a;
  }
  state.project();
}

}  // namespace

ContinuousGraph pc_reverse_step(const ContinuousGraph& state, double t, const ScoreModel& model, const SdeConfig& cfg,
                                Rng& rng, const std::optional<GraphTensors>& extra_score) {
  const Index k = grid_index(t, cfg);
  const double dt = 1.0 / static_cast<double>(cfg.n_grid);
  const double g = diffusion_coeff(t, cfg);

  auto total_score = [&](const ContinuousGraph& s, double time) {
    GraphTensors sc = model.score(s, time);
    if (extra_score) sc += *extra_score;
    return sc;
  };

  ContinuousGraph next = state;
  const GraphTensors s = total_score(state, t);
  const GraphTensors z = graph_noise(state, rng);
  next.x += (g * g * dt) * s.x + (g * std::sqrt(dt)) * z.x;
  next.a += (g * g * dt) * s.a + (g * std::sqrt(dt)) * z.a;
  next.project();
  next.time = grid_time(k - 1, cfg);

  for (Index c = 0; c < cfg.corrector_steps; ++c) {
    corrector_update(next, total_score(next, next.time), cfg, rng);
  }
  return next;
}

ContinuousGraph reverse_steps(ContinuousGraph state, Index steps, const ScoreModel& model, const SdeConfig& cfg,
                              Rng& rng) {
  for (Index s = 0; s < steps; ++s) state = pc_reverse_step(state, state.time, model, cfg, rng);
  return state;
}

ContinuousGraph perturb_then_denoise(const ContinuousGraph& g0, Index d_steps, const ScoreModel& model,
                                     const SdeConfig& cfg, Rng& rng) {
  if (d_steps < 0 || d_steps > cfg.n_grid) throw DomainError("perturbation steps out of range");
  if (d_steps == 0) return g0;
  const ContinuousGraph noisy = perturb(g0, grid_time(d_steps, cfg), cfg, rng);
  return reverse_steps(noisy, d_steps, model, cfg, rng);
}

ContinuousGraph sample_unconditional_state(Index n_nodes, Index num_types, Index n_max, const ScoreModel& model,
                                           const SdeConfig& cfg, Rng& rng) {
  if (n_nodes < 1 || n_nodes > n_max) throw CapacityError("node count exceeds the sampler capacity");
  ContinuousGraph g;
  g.node_mask = Mask::Constant(n_max, false);
  g.node_mask.head(n_nodes).setConstant(true);
  g.x = Matrix::Zero(n_max, num_types);
  g.a = Matrix::Zero(n_max, n_max);
  const GraphTensors z = graph_noise(g, rng);
  g.x = cfg.sigma_max * z.x;
  g.a = cfg.sigma_max * z.a;
  g.time = 1.0;
  return reverse_steps(std::move(g), cfg.n_grid, model, cfg, rng);
}

Graph sample_unconditional(Index n_nodes, Index n_max, const ScoreModel& model, const SdeConfig& cfg,
                           const NodeTypeTable& table, Rng& rng) {
  const ContinuousGraph s = sample_unconditional_state(n_nodes, table.size(), n_max, model, cfg, rng);
  return discretize(s, cfg.edge_threshold, table);
}

}  // namespace gdaug
