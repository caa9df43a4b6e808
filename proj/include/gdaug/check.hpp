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


// Finite-difference helpers and random fixtures shared by the unit tests and
// the acceptance suite.

#pragma once

#include "gdaug/graph.hpp"
#include "gdaug/random.hpp"
#include "gdaug/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace gdaug::check {

// Central differences of f at x, one entry at a time.
inline Matrix central_difference(const std::function<double(const Matrix&)>& f, const Matrix& x, double h = 1e-6) {
  Matrix g(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i) {
      Matrix xp = x;
      Matrix xm = x;
      xp(i, j) += h;
      xm(i, j) -= h;
      g(i, j) = (f(xp) - f(xm)) / (2.0 * h);
    }
  return g;
}

// Central differences w.r.t. the upper-triangular coordinates of a symmetric
// matrix: a_ij and a_ji move together. Mirrored; the diagonal stays 0.
inline Matrix symmetric_central_difference(const std::function<double(const Matrix&)>& f, const Matrix& a,
                                           const Mask& mask, double h = 1e-6) {
  const Index n = a.rows();
  Matrix g = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      if (!mask(i) || !mask(j)) continue;
      Matrix ap = a;
      Matrix am = a;
      ap(i, j) += h;
      ap(j, i) += h;
      am(i, j) -= h;
      am(j, i) -= h;
      g(i, j) = g(j, i) = (f(ap) - f(am)) / (2.0 * h);
    }
  return g;
}

// |a - b|_max / max(1, |b|_max).
inline double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline Graph random_graph(Index n, Index num_types, double density, Rng& rng) {
  std::vector<int> types(static_cast<std::size_t>(n));
  for (auto& t : types) t = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(num_types)));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (uniform01(rng) < density) edges.emplace_back(i, j);
  return Graph::from_edges(std::move(types), edges);
}

inline std::vector<int> random_permutation(Index n, Rng& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = static_cast<int>(i);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// A relaxed continuous state: noisy features and a symmetric real adjacency.
inline ContinuousGraph random_state(Index n_active, Index n_max, Index num_types, Rng& rng) {
  ContinuousGraph g;
  g.node_mask = Mask::Constant(n_max, false);
  g.node_mask.head(n_active).setConstant(true);
  g.x = 0.5 * standard_normal(rng, n_max, num_types);
  g.x.leftCols(1).array() += 1.0;
  g.a = 0.5 * standard_normal(rng, n_max, n_max);
  g.a.array() += 0.3;
  g.project();
  return g;
}

}  // namespace gdaug::check
