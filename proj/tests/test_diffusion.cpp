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

#include "support.hpp"

#include <doctest.h>

namespace gdaug {
namespace {

const NodeTypeTable kTable = NodeTypeTable::organic();

SdeConfig wide_sde() {
  SdeConfig c;
  c.sigma_min = 0.1;
  c.sigma_max = 10.0;
  return c;
}

TEST_CASE("noise schedule closed forms") {
  const SdeConfig c = wide_sde();
  CHECK(sigma_at(0.0, c) == doctest::Approx(0.1));
  CHECK(sigma_at(1.0, c) == doctest::Approx(10.0));
  CHECK(sigma_at(0.5, c) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sigma_at(1.5, c), DomainError);
  CHECK_THROWS_AS(diffusion_coeff(-0.1, c), DomainError);

  SdeConfig e;
  e.sigma_min = 0.3;
  e.sigma_max = 0.3 * std::exp(0.5);
  CHECK(diffusion_coeff(0.0, e) == doctest::Approx(0.3));

  const double k = std::sqrt(2.0 * std::log(100.0));
  double prev = 0.0;
  for (Index i = 1; i <= 1000; ++i) {
    const double t = grid_time(i, c);
    const double s = 0.1 * std::pow(100.0, t);
    CHECK(std::abs(sigma_at(t, c) - s) <= 4e-16 * s);
    CHECK(std::abs(diffusion_coeff(t, c) - s * k) <= 8e-16 * s * k);
    CHECK(diffusion_coeff(t, c) / diffusion_coeff(0.0, c) == doctest::Approx(std::pow(100.0, t)));
    CHECK(diffusion_coeff(t, c) > prev);
    prev = diffusion_coeff(t, c);
  }
  CHECK(sigma_at<float>(0.5F, 0.1F, 10.0F) == doctest::Approx(1.0F));
}

TEST_CASE("grid indexing") {
  SdeConfig c;
  CHECK(grid_index(0.005, c) == 5);
  CHECK(grid_index(1.0, c) == 1000);
  CHECK_THROWS_AS(grid_index(0.0, c), DomainError);
  CHECK_THROWS_AS(grid_index(0.0055, c), DomainError);
}

TEST_CASE("config validation and JSON") {
  SdeConfig c;
  c.sigma_max = 0.05;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  const SdeConfig d = sde_config_from_json(nlohmann::json{{"snr", 0.3}, {"n_grid", 50}});
  CHECK(d.snr == 0.3);
  CHECK(d.n_grid == 50);
  CHECK(d.sigma_min == SdeConfig{}.sigma_min);
  CHECK_THROWS_AS(sde_config_from_json(nlohmann::json{{"n_grid", 1}}), ConfigError);
}

TEST_CASE("perturbation kernel moments") {
  const SdeConfig c;
  const Graph g = Graph::from_edges({0, 1, 2}, {{0, 1}, {1, 2}});
  const ContinuousGraph g0 = to_continuous(g, 3, 4);
  const double t = 0.37;
  const double s = sigma_at(t, c);
  const int draws = 100000;
  Rng rng(1);
  Matrix sum_x = Matrix::Zero(4, 3), sq_x = Matrix::Zero(4, 3);
  Matrix sum_a = Matrix::Zero(4, 4), sq_a = Matrix::Zero(4, 4);
  for (int i = 0; i < draws; ++i) {
    const ContinuousGraph p = perturb(g0, t, c, rng);
    CHECK_MESSAGE(p.satisfies_constraints(), "draw " << i);
    const Matrix dx = p.x - g0.x;
    const Matrix da = p.a - g0.a;
    sum_x += dx;
    sq_x += dx.cwiseProduct(dx);
    sum_a += da;
    sq_a += da.cwiseProduct(da);
  }
  const double mean_tol = 3.0 * s / std::sqrt(static_cast<double>(draws));
  for (Index i = 0; i < 3; ++i) {
    for (Index f = 0; f < 3; ++f) {
      CHECK(std::abs(sum_x(i, f) / draws) < mean_tol);
      CHECK(std::sqrt(sq_x(i, f) / draws) == doctest::Approx(s).epsilon(0.02));
    }
    for (Index j = i + 1; j < 3; ++j) {
      CHECK(std::abs(sum_a(i, j) / draws) < mean_tol);
      CHECK(std::sqrt(sq_a(i, j) / draws) == doctest::Approx(s).epsilon(0.02));
    }
  }
  CHECK(sq_x.row(3).isZero());
  CHECK(sq_a.row(3).isZero());
  CHECK(sq_a.diagonal().isZero());
}

std::vector<ContinuousGraph> small_batch(int n, Rng& rng) {
  std::vector<ContinuousGraph> out;
  for (int i = 0; i < n; ++i) out.push_back(to_continuous(testing::random_graph(4, 3, 0.5, rng), 3, 5));
  return out;
}

TEST_CASE("dsm loss with the point-mass oracle vanishes") {
  const SdeConfig c;
  Rng rng(2);
  const ContinuousGraph g0 = to_continuous(Graph::from_edges({0, 1, 2}, {{0, 1}}), 3, 3);
  const PointMassScore oracle(g0, c);
  const std::vector<ContinuousGraph> batch(64, g0);
  for (int rep = 0; rep < 20; ++rep) CHECK(dsm_loss(oracle, batch, c, rng) < 1e-20);
}

TEST_CASE("dsm loss of a zero score counts the perturbed entries") {
  const SdeConfig c;
  Rng rng(3);
  const auto batch = small_batch(200, rng);
  // 4 active nodes: 4 * 3 feature entries and 6 pairs.
  double total = 0.0;
  for (int rep = 0; rep < 50; ++rep) total += dsm_loss(ZeroScore{}, batch, c, rng);
  CHECK(total / 50.0 == doctest::Approx(18.0).epsilon(0.05));
  CHECK_THROWS_AS(dsm_loss(ZeroScore{}, {}, c, rng), DegenerateInputError);
}

ScoreNetHyper tiny_hyper(Index epochs) {
  ScoreNetHyper h;
  h.hidden = 16;
  h.pair_hidden = 16;
  h.epochs = epochs;
  h.batch_size = 16;
  return h;
}

TEST_CASE("score network outputs respect symmetry and padding") {
  const SdeConfig c;
  Rng rng(4);
  const ScoreNetworks nets = ScoreNetworks::init(3, c, tiny_hyper(1), rng);
  for (int trial = 0; trial < 10; ++trial) {
    const ContinuousGraph s = testing::random_state(4, 6, 3, rng);
    const GraphTensors out = nets.score(s, grid_time(1 + trial * 50, c));
    CHECK(out.a == out.a.transpose());
    CHECK(out.a.diagonal().isZero());
    CHECK(out.x.bottomRows(2).isZero());
    CHECK(out.a.bottomRows(2).isZero());
    CHECK(out.a.rightCols(2).isZero());
  }
}

TEST_CASE("score network input gradients match finite differences") {
  const SdeConfig c;
  Rng rng(5);
  const ScoreNetworks nets = ScoreNetworks::init(3, c, tiny_hyper(1), rng);
  const ContinuousGraph s = testing::random_state(3, 4, 3, rng);
  const Matrix wx = standard_normal(rng, 4, 3);
  const Matrix wa = standard_normal(rng, 4, 4);
  const double t = 0.2;
  auto f = [&](const Matrix& x, const Matrix& a) {
    ad::Tape tape;
    nn::Binder bind(tape, false);
    auto d = nets.denoise(bind, tape.constant(x), tape.constant(a), s.node_mask, t);
    return ad::dot(d.x, tape.constant(wx)).scalar() + ad::dot(d.a, tape.constant(wa)).scalar();
  };
  ad::Tape tape;
  nn::Binder bind(tape, false);
  ad::Var x = tape.variable(s.x);
  ad::Var a = tape.variable(s.a);
  auto d = nets.denoise(bind, x, a, s.node_mask, t);
  tape.backward(ad::dot(d.x, tape.constant(wx)) + ad::dot(d.a, tape.constant(wa)));
  CHECK(testing::relative_error(x.grad(), testing::central_difference([&](const Matrix& m) { return f(m, s.a); }, s.x)) <
        1e-6);
  CHECK(testing::relative_error(a.grad(), testing::central_difference([&](const Matrix& m) { return f(s.x, m); }, s.a)) <
        1e-6);
}

TEST_CASE("score checkpoints round-trip") {
  const SdeConfig c;
  Rng rng(6);
  const ScoreNetworks nets = ScoreNetworks::init(3, c, tiny_hyper(1), rng);
  const ScoreNetworks back = ScoreNetworks::from_json(nlohmann::json::parse(nets.to_json().dump()));
  const ContinuousGraph s = testing::random_state(4, 4, 3, rng);
  CHECK(nets.score(s, 0.3).x == back.score(s, 0.3).x);
  CHECK(nets.score(s, 0.3).a == back.score(s, 0.3).a);
  nlohmann::json bad = nets.to_json();
  bad["format_version"] = 2;
  CHECK_THROWS_AS(ScoreNetworks::from_json(bad), ParseError);
  CHECK_THROWS_AS(ScoreNetworks::from_json(nlohmann::json{{"format_version", 1}}), ParseError);
}

TEST_CASE("diffusion training reduces the loss and is deterministic") {
  const SdeConfig c;
  Rng rng(7);
  std::vector<Graph> corpus;
  for (int i = 0; i < 200; ++i) corpus.push_back(testing::random_graph(3 + i % 3, 3, 0.5, rng));
  const DiffusionTrainResult a = train_diffusion(corpus, c, tiny_hyper(4), 3, 9);
  const DiffusionTrainResult b = train_diffusion(corpus, c, tiny_hyper(4), 3, 9);
  REQUIRE(a.loss_curve.size() == 4);
  for (double l : a.loss_curve) CHECK(std::isfinite(l));
  CHECK(a.loss_curve.back() < a.loss_curve.front());
  CHECK(a.loss_curve == b.loss_curve);
  CHECK_THROWS_AS(train_diffusion({}, c, tiny_hyper(1), 3, 9), DegenerateInputError);
}

TEST_CASE("diffusion trained on a single graph approaches the point-mass optimum") {
  const SdeConfig c;
  const Graph g = Graph::from_edges({0, 1, 2}, {{0, 1}, {1, 2}});
  const std::vector<Graph> corpus(64, g);
  const DiffusionTrainResult r = train_diffusion(corpus, c, tiny_hyper(400), 3, 10);
  Rng rng(11);
  const std::vector<ContinuousGraph> batch(256, to_continuous(g, 3, 3));
  // The optimum is 0; a zero score scores the entry count (9 + 3).
  CHECK(dsm_loss(r.nets, batch, c, rng) < 0.1 * 12.0);
}

TEST_CASE("reverse step contracts") {
  SdeConfig c;
  c.corrector_steps = 2;
  Rng rng(12);
  ContinuousGraph s = testing::random_state(4, 6, 3, rng);
  s.time = 1.0;
  const IsotropicGaussianScore model(0.25, c);

  Rng r1(13), r2(13);
  const ContinuousGraph a = pc_reverse_step(s, 1.0, model, c, r1);
  const ContinuousGraph b = pc_reverse_step(s, 1.0, model, c, r2, GraphTensors::zeros_like(s));
  CHECK(a.x == b.x);
  CHECK(a.a == b.a);
  CHECK(a.time == grid_time(999, c));
  CHECK_THROWS_AS(pc_reverse_step(s, 0.0005, model, c, r1), DomainError);

  ContinuousGraph state = s;
  for (Index k = c.n_grid; k >= 1; k -= 37) {
    state.time = grid_time(k, c);
    state = pc_reverse_step(state, state.time, model, c, rng);
    CHECK(state.satisfies_constraints());
  }
}

TEST_CASE("analytic Gaussian reverse run recovers the data variance") {
  SdeConfig c = wide_sde();
  c.n_grid = 200;
  c.corrector_steps = 0;
  const double var = 1.0;
  const IsotropicGaussianScore model(var, c);
  Rng rng(14);
  const int chains = 4000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < chains; ++i) {
    const ContinuousGraph s = sample_unconditional_state(1, 1, 1, model, c, rng);
    sum += s.x(0, 0);
    sq += s.x(0, 0) * s.x(0, 0);
  }
  const double m = sum / chains;
  CHECK((sq / chains - m * m) == doctest::Approx(var + 0.01).epsilon(0.1));
}

TEST_CASE("perturb then denoise with zero steps is the identity") {
  const SdeConfig c;
  Rng rng(15);
  const ContinuousGraph g0 = to_continuous(Graph::from_edges({0, 1}, {{0, 1}}), 3, 2);
  const ContinuousGraph out = perturb_then_denoise(g0, 0, ZeroScore{}, c, rng);
  CHECK(out.x == g0.x);
  CHECK(out.a == g0.a);
  CHECK_THROWS_AS(perturb_then_denoise(g0, 2000, ZeroScore{}, c, rng), DomainError);
}

TEST_CASE("sampler on a triangle corpus mostly yields triangles") {
  SdeConfig c;
  c.n_grid = 200;
  Rng data_rng(16);
  std::vector<Graph> corpus;
  for (int i = 0; i < 128; ++i) {
    std::vector<int> types{static_cast<int>(uniform_index(data_rng, 3)), static_cast<int>(uniform_index(data_rng, 3)),
                           static_cast<int>(uniform_index(data_rng, 3))};
    corpus.push_back(Graph::from_edges(types, {{0, 1}, {1, 2}, {0, 2}}));
  }
  const DiffusionTrainResult r = train_diffusion(corpus, c, tiny_hyper(30), 3, 17);
  Rng rng(18);
  int triangles = 0;
  for (int i = 0; i < 200; ++i) {
    const Graph g = sample_unconditional(3, 3, r.nets, c, kTable, rng);
    CHECK_NOTHROW(g.validate(kTable));
    if (g.num_edges() == 3) ++triangles;
  }
  CHECK(triangles >= 120);

  Rng a(19), b(19);
  const Graph ga = sample_unconditional(3, 4, r.nets, c, kTable, a);
  const Graph gb = sample_unconditional(3, 4, r.nets, c, kTable, b);
  CHECK(ga.adjacency == gb.adjacency);
  CHECK(ga.node_types == gb.node_types);
  CHECK_THROWS_AS(sample_unconditional(5, 4, r.nets, c, kTable, a), CapacityError);
}

}  // namespace
}  // namespace gdaug
