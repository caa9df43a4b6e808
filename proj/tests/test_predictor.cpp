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


#include "gdaug/errors.hpp"
#include "gdaug/predictor.hpp"

#include "support.hpp"

#include <doctest.h>

namespace gdaug {
namespace {

const NodeTypeTable kTable = NodeTypeTable::organic();

nn::Linear identity_linear(Index width) {
  return nn::Linear{Matrix::Identity(width, width), Matrix::Zero(1, width)};
}

nn::Mlp identity_mlp(Index width) {
  nn::Mlp m;
  m.layers = {identity_linear(width)};
  m.activation = nn::Activation::kIdentity;
  return m;
}

// One GIN layer, H = 1, everything the identity, embedding entry per type.
PredictorParams unit_params(const Vector& embedding) {
  PredictorParams p;
  p.embed_table = embedding;
  p.layers = {GinLayer{identity_mlp(1), Matrix::Zero(1, 1)}};
  p.head = identity_mlp(1);
  p.score_vector = Matrix::Ones(1, 1);
  return p;
}

PredictorParams random_params(Index n_tasks, std::uint64_t seed, Index hidden = 8) {
  PredictorHyper h;
  h.hidden = hidden;
  h.layers = 2;
  Rng rng(seed);
  return PredictorParams::init(kTable.size(), n_tasks, h, rng);
}

Graph single_node(int type, double label) {
  Graph g = Graph::from_edges({type}, {});
  g.label = MaskedLabel::scalar(label);
  return g;
}

TEST_CASE("embedding is a table lookup for one-hot rows") {
  const PredictorParams p = random_params(1, 1);
  Matrix x = Matrix::Zero(3, 3);
  x(0, 2) = 1.0;
  x(1, 0) = 0.5;
  x(1, 1) = 0.5;
  const Matrix e = embed_continuous(x, p);
  CHECK(e.row(0) == p.embed_table.row(2));
  CHECK(e.row(1).isApprox(0.5 * (p.embed_table.row(0) + p.embed_table.row(1))));
  CHECK(e.row(2).isZero());
  CHECK_THROWS_AS(embed_continuous(Matrix::Zero(2, 4), p), DimensionError);
}

TEST_CASE("gin layer with identity mlp sums the neighbourhood") {
  Matrix a = Matrix::Zero(4, 4);
  a(0, 1) = a(1, 0) = 1.0;
  a(0, 2) = a(2, 0) = 1.0;
  const Matrix h = Matrix::Ones(4, 2);
  const Matrix out = gin_layer(h, a, 0.0, identity_mlp(2));
  CHECK(out.row(0) == RowVector::Constant(2, 3.0));
  CHECK(out.row(3) == RowVector::Constant(2, 1.0));
  CHECK_THROWS_AS(gin_layer(Matrix::Ones(3, 2), a, 0.0, identity_mlp(2)), DimensionError);
}

TEST_CASE("gin layer is permutation equivariant") {
  Rng rng(2);
  const PredictorParams p = random_params(1, 2);
  const Graph g = testing::random_graph(6, kTable.size(), 0.5, rng);
  const auto perm = testing::random_permutation(6, rng);
  const Graph q = permute(g, perm);
  const Matrix h = embed_continuous(to_continuous(g, 3, 6).x, p);
  const Matrix hq = embed_continuous(to_continuous(q, 3, 6).x, p);
  const Matrix out = gin_layer(h, g.adjacency.cast<double>(), 0.3, p.layers[0].mlp);
  const Matrix outq = gin_layer(hq, q.adjacency.cast<double>(), 0.3, p.layers[0].mlp);
  for (Index i = 0; i < 6; ++i) CHECK((outq.row(i) - out.row(perm[static_cast<std::size_t>(i)])).norm() < 1e-12);
}

TEST_CASE("hand-evaluated pooled value on a path of three nodes") {
  const Graph p3 = Graph::from_edges({0, 0, 0}, {{0, 1}, {1, 2}});
  // Node values after one layer: deg + 1 = (2, 3, 2).
  CHECK(predict(p3, unit_params(Vector::Ones(3)))(0) == doctest::Approx(7.0));
}

TEST_CASE("zero inputs with a bias-free head give zero") {
  PredictorParams p = random_params(2, 3);
  for (auto& l : p.layers)
    for (auto& lin : l.mlp.layers) lin.bias.setZero();
  for (auto& lin : p.head.layers) lin.bias.setZero();
  ContinuousGraph c;
  c.node_mask = Mask::Constant(3, true);
  c.x = Matrix::Zero(3, 3);
  c.a = Matrix::Zero(3, 3);
  CHECK(predict(c, p).isZero());
}

TEST_CASE("prediction is permutation invariant") {
  Rng rng(4);
  const PredictorParams p = random_params(2, 4, 16);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = testing::random_graph(2 + trial % 9, kTable.size(), 0.4, rng);
    const Graph q = permute(g, testing::random_permutation(g.num_nodes(), rng));
    CHECK((predict(g, p) - predict(q, p)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("per-example loss examples") {
  const TaskSpec cls = TaskSpec::classification(1);
  const ExampleLoss bce = per_example_loss(Vector::Zero(1), MaskedLabel::scalar(1.0), cls);
  CHECK(bce.value == doctest::Approx(std::log(2.0)));
  CHECK(bce.has_signal);

  const TaskSpec reg = TaskSpec::regression(1, 1.0);
  CHECK(per_example_loss(Vector::Constant(1, 2.5), MaskedLabel::scalar(2.5), reg).value == 0.0);

  Vector v(2);
  v << 1.0, 0.0;
  Mask m(2);
  m << true, false;
  Vector logits(2);
  logits << 0.0, 100.0;
  const ExampleLoss partial = per_example_loss(logits, MaskedLabel(v, m), TaskSpec::classification(2));
  CHECK(partial.value == doctest::Approx(std::log(2.0)));

  const ExampleLoss none = per_example_loss(logits, MaskedLabel(v, Mask::Constant(2, false)),
                                            TaskSpec::classification(2));
  CHECK_FALSE(none.has_signal);
  CHECK(none.value == 0.0);
}

TEST_CASE("AUC examples and tie convention") {
  CHECK(*roc_auc({0.9, 0.8, 0.2}, {1, 1, 0}) == 1.0);
  CHECK(*roc_auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
  CHECK_FALSE(roc_auc({0.1, 0.2}, {1, 1}).has_value());
}

double brute_force_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  return wins / pairs;
}

TEST_CASE("AUC equals the pairwise oracle exactly") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 49);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(uniform_index(rng, 6));  // coarse scores force ties
      y[i] = static_cast<int>(uniform_index(rng, 2));
    }
    y[0] = 1;
    y[1] = 0;
    CHECK(*roc_auc(s, y) == brute_force_auc(s, y));
  }
}

TEST_CASE("evaluate reports AUC and MAE") {
  const PredictorParams p = unit_params((Vector(3) << 1.0, 3.0, 2.0).finished());
  const Metrics mae = evaluate({single_node(0, 2.0), single_node(1, 2.0)}, p, TaskSpec::regression(1, 1.0));
  REQUIRE(mae.mae.has_value());
  CHECK(*mae.mae == doctest::Approx(1.0));
  CHECK_FALSE(mae.auc.has_value());

  const Metrics auc = evaluate({single_node(1, 1.0), single_node(0, 0.0)}, p, TaskSpec::classification(1));
  REQUIRE(auc.auc.has_value());
  CHECK(*auc.auc == 1.0);

  CHECK_THROWS_AS(evaluate({single_node(0, 1.0), single_node(1, 1.0)}, p, TaskSpec::classification(1)),
                  DegenerateInputError);
  Graph masked = single_node(0, 1.0);
  masked.label.valid(0) = false;
  CHECK_THROWS_AS(evaluate({masked}, p, TaskSpec::classification(1)), DegenerateInputError);
}

TEST_CASE("evaluate excludes single-class tasks from the average") {
  const PredictorParams base = unit_params((Vector(3) << 1.0, 3.0, 2.0).finished());
  PredictorParams p = base;
  p.head.layers[0] = nn::Linear{Matrix::Ones(1, 2), Matrix::Zero(1, 2)};
  auto two_task = [](int type, double y0, double y1) {
    Graph g = Graph::from_edges({type}, {});
    g.label = MaskedLabel((Vector(2) << y0, y1).finished(), Mask::Constant(2, true));
    return g;
  };
  const Metrics m = evaluate({two_task(1, 1.0, 1.0), two_task(0, 0.0, 1.0)}, p, TaskSpec::classification(2));
  CHECK(*m.auc == 1.0);
  CHECK(std::isnan(m.per_task(1)));
}

TEST_CASE("selection size follows the ceiling rule") {
  CHECK(selection_size(3, 34.0) == 2);
  CHECK(selection_size(10, 10.0) == 1);
  CHECK(selection_size(500, 10.0) == 50);
  CHECK(selection_size(7, 100.0) == 7);
}

TEST_CASE("lowest-loss selection returns the smallest losses in dataset order") {
  // Regression outputs equal the node embedding; label 0 makes loss = value^2.
  const PredictorParams p = unit_params((Vector(3) << std::sqrt(0.1), std::sqrt(0.5), std::sqrt(0.3)).finished());
  const TaskSpec reg = TaskSpec::regression(1, 1.0);
  const std::vector<Graph> data{single_node(0, 0.0), single_node(1, 0.0), single_node(2, 0.0)};
  CHECK(select_lowest_loss_indices(data, p, reg, 34.0) == std::vector<std::size_t>{0, 2});

  std::vector<Graph> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(single_node(i == 6 ? 0 : 1, 0.0));
  CHECK(select_lowest_loss_indices(ten, p, reg, 10.0) == std::vector<std::size_t>{6});

  std::vector<Graph> equal(5, single_node(1, 0.0));
  CHECK(select_lowest_loss_indices(equal, p, reg, 40.0) == std::vector<std::size_t>{0, 1});

  std::vector<Graph> with_masked = data;
  with_masked[0].label.valid(0) = false;
  CHECK(select_lowest_loss_indices(with_masked, p, reg, 50.0) == std::vector<std::size_t>{2});
  CHECK_THROWS(select_lowest_loss_indices({}, p, reg, 10.0));
}

TEST_CASE("selected losses never exceed excluded losses") {
  Rng rng(6);
  const PredictorParams p = random_params(1, 6);
  const TaskSpec cls = TaskSpec::classification(1);
  std::vector<Graph> data;
  for (int i = 0; i < 40; ++i) {
    Graph g = testing::random_graph(3 + i % 5, kTable.size(), 0.4, rng);
    g.label = MaskedLabel::scalar(static_cast<double>(i % 2));
    data.push_back(g);
  }
  const auto picked = select_lowest_loss_indices(data, p, cls, 25.0);
  CHECK(picked.size() == 10);
  double worst_kept = 0.0;
  for (auto i : picked) worst_kept = std::max(worst_kept, per_example_loss(predict(data[i], p), data[i].label, cls).value);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (std::find(picked.begin(), picked.end(), i) != picked.end()) continue;
    CHECK(per_example_loss(predict(data[i], p), data[i].label, cls).value >= worst_kept);
  }
}

TEST_CASE("label log-likelihood gradients match finite differences") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const bool regression = trial % 2 == 1;
    const TaskSpec spec = regression ? TaskSpec::regression(2, 1.5) : TaskSpec::classification(2);
    const PredictorParams p = random_params(2, 100 + trial);
    const Index n = 2 + trial % 7;
    const ContinuousGraph c = testing::random_state(n, n + 1, kTable.size(), rng);
    Vector v(2);
    v << static_cast<double>(trial % 2), regression ? 0.7 : 1.0;
    Mask m(2);
    m << true, trial % 3 != 0;
    const MaskedLabel y(v, m);

    auto ll = [&](const Matrix& x, const Matrix& a) {
      ContinuousGraph g = c;
      g.x = x;
      g.a = a;
      return label_loglik_grad(g, y, p, spec).log_likelihood;
    };
    const LikelihoodGrad g = label_loglik_grad(c, y, p, spec);
    const Matrix fd_x = mask_rows(
        testing::central_difference([&](const Matrix& x) { return ll(x, c.a); }, c.x, 1e-5), c.node_mask);
    const Matrix fd_a = testing::symmetric_central_difference([&](const Matrix& a) { return ll(c.x, a); }, c.a,
                                                              c.node_mask, 1e-5);
    CHECK(testing::relative_error(g.grad_x, fd_x) < 1e-4);
    CHECK(testing::relative_error(g.grad_a, fd_a) < 1e-4);
    CHECK(g.grad_a.isApprox(g.grad_a.transpose()));
    CHECK(g.grad_a.diagonal().isZero());
  }
}

TEST_CASE("saturated and exact predictions have zero log-likelihood") {
  const PredictorParams p = unit_params((Vector(3) << 60.0, 2.0, 1.0).finished());
  const ContinuousGraph c = to_continuous(single_node(0, 1.0), 3, 1);
  const LikelihoodGrad cls = label_loglik_grad(c, MaskedLabel::scalar(1.0), p, TaskSpec::classification(1));
  CHECK(cls.log_likelihood == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cls.grad_x.cwiseAbs().maxCoeff() < 1e-12);

  const LikelihoodGrad reg = label_loglik_grad(c, MaskedLabel::scalar(60.0), p, TaskSpec::regression(1, 2.0));
  CHECK(reg.log_likelihood == 0.0);
  CHECK(reg.grad_x.isZero());

  MaskedLabel masked = MaskedLabel::scalar(1.0);
  masked.valid(0) = false;
  CHECK_THROWS_AS(label_loglik_grad(c, masked, p, TaskSpec::classification(1)), DegenerateInputError);
}

std::vector<Graph> separable_set(int n) {
  // Class 1: triangles of type 0; class 0: isolated type-2 triples.
  std::vector<Graph> out;
  for (int i = 0; i < n; ++i) {
    Graph g = i % 2 == 0 ? Graph::from_edges({0, 0, 0}, {{0, 1}, {1, 2}, {0, 2}}) : Graph::from_edges({2, 2, 2}, {});
    g.label = MaskedLabel::scalar(i % 2 == 0 ? 1.0 : 0.0);
    out.push_back(g);
  }
  return out;
}

TEST_CASE("training fits a separable task") {
  PredictorHyper h;
  h.hidden = 8;
  h.layers = 1;
  h.epochs = 200;
  h.batch_size = 8;
  const TrainResult r = train_predictor(separable_set(20), {}, TaskSpec::classification(1), h, 3, 11);
  CHECK(r.history.train_loss.size() == 200);
  CHECK(r.history.train_loss.back() < 0.1);
}

TEST_CASE("training is deterministic and zero epochs keep the initialization") {
  PredictorHyper h;
  h.hidden = 8;
  h.epochs = 5;
  const auto data = separable_set(10);
  const TrainResult a = train_predictor(data, data, TaskSpec::classification(1), h, 3, 12);
  const TrainResult b = train_predictor(data, data, TaskSpec::classification(1), h, 3, 12);
  CHECK(a.history.train_loss == b.history.train_loss);
  CHECK(a.history.valid_loss == b.history.valid_loss);
  CHECK(a.params.embed_table == b.params.embed_table);

  h.epochs = 0;
  const TrainResult z = train_predictor(data, data, TaskSpec::classification(1), h, 3, 12);
  Rng init = make_rng(12, 10);
  CHECK(z.params.embed_table == PredictorParams::init(3, 1, h, init).embed_table);
  CHECK_THROWS(train_predictor({}, data, TaskSpec::classification(1), h, 3, 12));
}

TEST_CASE("checkpoints round-trip through JSON") {
  const PredictorParams p = random_params(2, 13);
  const PredictorParams q = predictor_params_from_json(nlohmann::json::parse(to_json(p).dump()));
  Rng rng(13);
  const Graph g = testing::random_graph(5, 3, 0.5, rng);
  CHECK(predict(g, p) == predict(g, q));
  nlohmann::json bad = to_json(p);
  bad["format_version"] = 99;
  CHECK_THROWS_AS(predictor_params_from_json(bad), ParseError);
}

TEST_CASE("top-k subgraph") {
  Rng rng(14);
  const PredictorParams p = random_params(1, 14);
  const Graph g = testing::random_graph(7, 3, 0.4, rng);
  CHECK(topk_subgraph(g, p, 7) == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
  CHECK(topk_subgraph(g, p, 1).size() == 1);
  CHECK_THROWS_AS(topk_subgraph(g, p, 8), DomainError);
  CHECK_THROWS_AS(topk_subgraph(g, p, 0), DomainError);

  const auto perm = testing::random_permutation(7, rng);
  const Graph q = permute(g, perm);
  std::vector<int> mapped;
  for (int i : topk_subgraph(q, p, 3)) mapped.push_back(perm[static_cast<std::size_t>(i)]);
  std::sort(mapped.begin(), mapped.end());
  CHECK(mapped == topk_subgraph(g, p, 3));
}

}  // namespace
}  // namespace gdaug
