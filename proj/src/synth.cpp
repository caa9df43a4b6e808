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


#include "gdaug/synth.hpp"

#include "gdaug/errors.hpp"
#include "gdaug/features.hpp"

#include <cmath>

namespace gdaug {

Motif parse_motif(const std::string& s) {
  if (s == "triangle_count") return Motif::kTriangleCount;
  if (s == "star_presence") return Motif::kStarPresence;
  throw ConfigError("unknown motif '" + s + "'");
}

std::string to_string(Motif m) { return m == Motif::kTriangleCount ? "triangle_count" : "star_presence"; }

void SyntheticTaskConfig::validate() const {
  if (n_graphs < 1) throw ConfigError("synthetic task: n_graphs must be positive");
  if (n_lo < 3 || n_hi < n_lo) throw ConfigError("synthetic task: need 3 <= n_lo <= n_hi");
  if (!(density > 0.0 && density < 1.0)) throw ConfigError("synthetic task: density must lie in (0, 1)");
}

nlohmann::json to_json(const SyntheticTaskConfig& c) {
  return {{"n_graphs", c.n_graphs}, {"n_lo", c.n_lo},           {"n_hi", c.n_hi},          {"density", c.density},
          {"motif", to_string(c.motif)}, {"threshold", c.threshold}, {"seed", c.seed}};
}

SyntheticTaskConfig synthetic_task_config_from_json(const nlohmann::json& j, const SyntheticTaskConfig& d) {
  SyntheticTaskConfig c;
  c.n_graphs = j.value("n_graphs", d.n_graphs);
  c.n_lo = j.value("n_lo", d.n_lo);
  c.n_hi = j.value("n_hi", d.n_hi);
  c.density = j.value("density", d.density);
  c.motif = parse_motif(j.value("motif", to_string(d.motif)));
  c.threshold = j.value("threshold", d.threshold);
  c.seed = j.value("seed", d.seed);
  c.validate();
  return c;
}

Index triangle_count(const Graph& g) {
  const Eigen::MatrixXd a = g.adjacency.cast<double>();
  return static_cast<Index>(std::llround((a * a * a).trace() / 6.0));
}

Index max_degree(const Graph& g) {
  if (g.num_nodes() == 0) return 0;
  return g.adjacency.cast<Index>().rowwise().sum().maxCoeff();
}

double oracle_label(const Graph& g, Motif motif, double threshold) {
  const double stat = motif == Motif::kTriangleCount ? static_cast<double>(triangle_count(g))
                                                     : static_cast<double>(max_degree(g));
  return stat >= threshold ? 1.0 : 0.0;
}

SyntheticTask gen_synthetic_task(const SyntheticTaskConfig& cfg, const NodeTypeTable& table) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, 30);
  const Index n = cfg.n_graphs;
  // Each class may take at most n - ceil(0.4 n) slots, leaving room for the other.
  const Index min_per_class = static_cast<Index>(std::ceil(0.4 * static_cast<double>(n) - 1e-9));
  const Index cap = n - min_per_class;
  Index counts[2] = {0, 0};
  SyntheticTask task{{}, TaskSpec::classification(1)};
  task.graphs.reserve(static_cast<std::size_t>(n));
  const Index budget = 10 * n;
  for (Index attempt = 0; attempt < budget && static_cast<Index>(task.graphs.size()) < n; ++attempt) {
    const Index nodes = cfg.n_lo + static_cast<Index>(uniform_index(rng, static_cast<std::size_t>(cfg.n_hi - cfg.n_lo + 1)));
    std::vector<int> types(static_cast<std::size_t>(nodes));
    for (auto& t : types) t = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(table.size())));
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < nodes; ++i)
      for (int j = i + 1; j < nodes; ++j)
        if (uniform01(rng) < cfg.density) edges.emplace_back(i, j);
    Graph g = Graph::from_edges(std::move(types), edges);
    const double y = oracle_label(g, cfg.motif, cfg.threshold);
    const int cls = y > 0.5 ? 1 : 0;
    if (counts[cls] >= cap) continue;
    ++counts[cls];
    g.label = MaskedLabel::scalar(y);
    g.id = "syn-" + std::to_string(task.graphs.size());
    task.graphs.push_back(std::move(g));
  }
  if (static_cast<Index>(task.graphs.size()) < n) {
    throw Error("synthetic task: class-balance budget exhausted after " + std::to_string(budget) + " draws");
  }
  return task;
}

void JointPmf::validate() const {
  if (p.size() == 0) throw ValidationError("empty joint pmf");
  if ((p.array() < 0.0).any()) throw ValidationError("joint pmf has negative entries");
  if (std::abs(p.sum() - 1.0) > 1e-12) throw ValidationError("joint pmf does not sum to 1");
}

double brute_force_mi(const JointPmf& pmf) {
  pmf.validate();
  const Vector pg = pmf.marginal_g();
  const RowVector py = pmf.marginal_y();
  double mi = 0.0;
  for (Index i = 0; i < pmf.p.rows(); ++i)
    for (Index j = 0; j < pmf.p.cols(); ++j) {
      const double pij = pmf.p(i, j);
      if (pij > 0.0) mi += pij * std::log(pij / (pg(i) * py(j)));
    }
  return std::max(mi, 0.0);
}

JointPmf random_joint_pmf(Index n_g, Index n_y, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  JointPmf pmf{Matrix(n_g, n_y)};
  for (Index j = 0; j < n_y; ++j)
    for (Index i = 0; i < n_g; ++i) pmf.p(i, j) = expo(rng);
  pmf.p /= pmf.p.sum();
  return pmf;
}

double expected_loo_bound(const JointPmf& pmf, Index m) {
  pmf.validate();
  if (m < 2) throw DomainError("need m >= 2");
  const Index ng = pmf.p.rows();
  const Index ny = pmf.p.cols();
  const Vector pg = pmf.marginal_g();
  Matrix log_cond(ng, ny);  // log p(y | g)
  for (Index i = 0; i < ng; ++i)
    for (Index j = 0; j < ny; ++j) log_cond(i, j) = std::log(pmf.p(i, j) / pg(i));

  const Index k = m - 1;
  std::vector<Index> tuple(static_cast<std::size_t>(k), 0);
  Vector critics(m);
  double total = 0.0;
  while (true) {
    double p_tuple = 1.0;
    for (Index r = 0; r < k; ++r) p_tuple *= pg(tuple[static_cast<std::size_t>(r)]);
    if (p_tuple > 0.0) {
      for (Index g0 = 0; g0 < ng; ++g0)
        for (Index y = 0; y < ny; ++y) {
          const double w = pmf.p(g0, y) * p_tuple;
          if (w == 0.0) continue;
          critics(0) = log_cond(g0, y);
          for (Index r = 0; r < k; ++r) critics(r + 1) = log_cond(tuple[static_cast<std::size_t>(r)], y);
          total += w * loo_bound(critics);
        }
    }
    Index pos = 0;
    while (pos < k && ++tuple[static_cast<std::size_t>(pos)] == ng) tuple[static_cast<std::size_t>(pos++)] = 0;
    if (pos == k) break;
  }
  return total + std::log(static_cast<double>(k));
}

double label_preservation_rate(const std::vector<AugmentedExample>& augmented, Motif motif, double threshold) {
  if (augmented.empty()) throw DegenerateInputError("label preservation of an empty set");
  Index kept = 0;
  for (const auto& e : augmented) {
    if (!e.label.any_valid()) throw DegenerateInputError("augmented example without a valid label");
    Index k = 0;
    while (!e.label.valid(k)) ++k;
    if (oracle_label(e.graph, motif, threshold) == e.label.values(k)) ++kept;
  }
  return static_cast<double>(kept) / static_cast<double>(augmented.size());
}

double diversity_score(const std::vector<AugmentedExample>& augmented, const std::vector<Graph>& sources,
                       const NodeTypeTable& table) {
  if (augmented.size() != sources.size()) throw DimensionError("diversity: augmented and source lists differ in length");
  if (augmented.empty()) throw DegenerateInputError("diversity of an empty set");
  double total = 0.0;
  for (std::size_t i = 0; i < augmented.size(); ++i) {
    total += cosine_similarity(statistical_features(augmented[i].graph, table), statistical_features(sources[i], table));
  }
  return total / static_cast<double>(augmented.size());
}

}  // namespace gdaug
