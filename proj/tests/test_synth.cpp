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
#include "gdaug/features.hpp"
#include "gdaug/synth.hpp"

#include <doctest.h>

namespace gdaug {
namespace {

const NodeTypeTable kTable = NodeTypeTable::organic();

Graph cycle(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Graph::from_edges(std::vector<int>(static_cast<std::size_t>(n), 0), e);
}

TEST_CASE("motif oracles") {
  const Graph k3 = cycle(3);
  const Graph p3 = Graph::from_edges({0, 0, 0}, {{0, 1}, {1, 2}});
  const Graph s4 = Graph::from_edges({0, 0, 0, 0, 0}, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const Graph k4 = Graph::from_edges({0, 0, 0, 0}, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  CHECK(triangle_count(k3) == 1);
  CHECK(triangle_count(p3) == 0);
  CHECK(triangle_count(k4) == 4);
  CHECK(triangle_count(cycle(5)) == 0);
  CHECK(max_degree(s4) == 4);
  CHECK(max_degree(p3) == 2);
  CHECK(oracle_label(k3, Motif::kTriangleCount, 1.0) == 1.0);
  CHECK(oracle_label(p3, Motif::kTriangleCount, 1.0) == 0.0);
  CHECK(oracle_label(s4, Motif::kStarPresence, 4.0) == 1.0);
  CHECK(oracle_label(p3, Motif::kStarPresence, 4.0) == 0.0);
  CHECK(parse_motif(to_string(Motif::kStarPresence)) == Motif::kStarPresence);
  CHECK_THROWS_AS(parse_motif("square"), ConfigError);
}

TEST_CASE("synthetic generator") {
  SyntheticTaskConfig cfg;
  cfg.n_graphs = 200;
  cfg.seed = 4;
  const SyntheticTask a = gen_synthetic_task(cfg, kTable);
  const SyntheticTask b = gen_synthetic_task(cfg, kTable);
  REQUIRE(a.graphs.size() == 200);
  Index positives = 0;
  for (std::size_t i = 0; i < a.graphs.size(); ++i) {
    const Graph& g = a.graphs[i];
    CHECK(g.adjacency == b.graphs[i].adjacency);
    CHECK(g.node_types == b.graphs[i].node_types);
    CHECK(g.num_nodes() >= cfg.n_lo);
    CHECK(g.num_nodes() <= cfg.n_hi);
    CHECK_NOTHROW(g.validate(kTable));
    CHECK(g.label.values(0) == oracle_label(g, cfg.motif, cfg.threshold));
    positives += g.label.values(0) > 0.5 ? 1 : 0;
  }
  CHECK(positives >= 80);
  CHECK(positives <= 120);
  cfg.seed = 5;
  CHECK(gen_synthetic_task(cfg, kTable).graphs[0].adjacency != a.graphs[0].adjacency);

  cfg.density = 0.02;
  cfg.n_lo = 3;
  cfg.n_hi = 3;
  CHECK_THROWS_AS(gen_synthetic_task(cfg, kTable), Error);
  cfg.density = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("mutual information examples") {
  CHECK(brute_force_mi(JointPmf{Matrix::Constant(2, 2, 0.25)}) == doctest::Approx(0.0));
  CHECK(brute_force_mi(JointPmf{(Matrix(2, 2) << 0.5, 0.0, 0.0, 0.5).finished()}) == doctest::Approx(std::log(2.0)));
  CHECK(brute_force_mi(JointPmf{(Matrix(2, 2) << 0.4, 0.1, 0.1, 0.4).finished()}) ==
        doctest::Approx(0.1927).epsilon(1e-3));
  CHECK_THROWS_AS(brute_force_mi(JointPmf{Matrix::Constant(2, 2, 0.3)}), ValidationError);
}

TEST_CASE("leave-one-out expectation sits above the mutual information") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const JointPmf pmf = random_joint_pmf(3 + trial % 3, 2 + trial % 2, rng);
    CHECK(pmf.p.sum() == doctest::Approx(1.0));
    const double mi = brute_force_mi(pmf);
    for (Index m : {2, 3, 4}) CHECK(expected_loo_bound(pmf, m) >= mi - 1e-9);
  }
  const JointPmf diag{(Matrix(2, 2) << 0.5, 0.0, 0.0, 0.5).finished()};
  CHECK(expected_loo_bound(JointPmf{Matrix::Constant(2, 2, 0.25)}, 3) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(expected_loo_bound(diag, 1), DomainError);
}

TEST_CASE("preservation and diversity metrics") {
  const Graph k3 = cycle(3);
  const Graph c4 = cycle(4);
  std::vector<AugmentedExample> aug;
  aug.push_back({k3, MaskedLabel::scalar(1.0), "a", {}});
  aug.push_back({c4, MaskedLabel::scalar(1.0), "b", {}});
  aug.push_back({c4, MaskedLabel::scalar(0.0), "c", {}});
  aug.push_back({k3, MaskedLabel::scalar(1.0), "d", {}});
  CHECK(label_preservation_rate(aug, Motif::kTriangleCount, 1.0) == doctest::Approx(0.75));
  CHECK_THROWS_AS(label_preservation_rate({}, Motif::kTriangleCount, 1.0), DegenerateInputError);

  const std::vector<Graph> same{k3, c4, c4, k3};
  CHECK(diversity_score(aug, same, kTable) == doctest::Approx(1.0));
  const std::vector<Graph> swapped{c4, k3, k3, c4};
  const double d = diversity_score(aug, swapped, kTable);
  CHECK(d < 1.0);
  CHECK(d == doctest::Approx(cosine_similarity(statistical_features(k3, kTable), statistical_features(c4, kTable))));
  CHECK_THROWS_AS(diversity_score(aug, {k3}, kTable), DimensionError);
}

}  // namespace
}  // namespace gdaug
