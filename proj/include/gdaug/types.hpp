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

#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace gdaug {

using Index = Eigen::Index;
static constexpr int Dynamic = Eigen::Dynamic;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Dynamic, Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Dynamic, 1>;

template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Dynamic>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using RowVector = RowVectorX<double>;

// Boolean per-node / per-task mask.
using Mask = Eigen::Array<bool, Dynamic, 1>;

// 0/1 adjacency of a discrete graph.
using AdjacencyMatrix = Eigen::Matrix<std::uint8_t, Dynamic, Dynamic>;

// (M + M^T) / 2 with the diagonal cleared.
template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& m) {
  MatrixX<typename Derived::Scalar> out = (m + m.transpose()) / typename Derived::Scalar(2);
  out.diagonal().setZero();
  return out;
}

// Outer product of a node mask with itself, diagonal cleared: the support of
// a padded adjacency matrix.
inline Matrix pair_mask(const Mask& node_mask) {
  const Vector m = node_mask.cast<double>().matrix();
  Matrix out = m * m.transpose();
  out.diagonal().setZero();
  return out;
}

// Rows outside the mask become zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> mask_rows(const Eigen::MatrixBase<Derived>& m, const Mask& node_mask) {
  MatrixX<typename Derived::Scalar> out = m;
  for (Index i = 0; i < out.rows(); ++i) {
    if (!node_mask(i)) out.row(i).setZero();
  }
  return out;
}

}  // namespace gdaug
