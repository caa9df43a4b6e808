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

// Reverse-mode automatic differentiation over dense Eigen matrices.
//
// A Tape records matrix-valued nodes. Every op is a free function taking and
// returning Var handles; the op stores a closure that pushes the output
// adjoint back to its parents. Nodes whose parents are all constants carry
// no closure, so inference-only forward passes cost one allocation per op.
//
// Usage:
//   ad::Tape tape;
//   auto x = tape.variable(x0);
//   auto y = ad::sum(ad::tanh(ad::matmul(x, w)));
//   tape.backward(y);
//   Matrix dx = x.grad();

#pragma once

#include "gdaug/types.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace gdaug::ad {

class Tape;

class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  // Adjoint after Tape::backward; a zero matrix if nothing reached this node.
  Matrix grad() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  // Value of a 1x1 node.
  double scalar() const;
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var variable(Matrix value);
  Var constant(Matrix value);
  Var constant(double value);

  // Seeds d(root)/d(root) = 1 for a 1x1 root and propagates adjoints.
  void backward(const Var& root);

  // Used by op implementations.
  Var record(Matrix value, bool requires_grad, Backward backward);
  void accumulate(const Var& v, const Matrix& g);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Matrix& grad_of(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// Arithmetic. Shapes must match exactly; use the broadcast helpers otherwise.
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator-(const Var& a);
Var operator*(double s, const Var& a);
Var operator*(const Var& a, double s);
Var operator+(const Var& a, double s);
Var operator-(const Var& a, double s);

Var matmul(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
Var quotient(const Var& a, const Var& b);
Var transpose(const Var& a);

// 1x1 -> rows x cols.
Var broadcast(const Var& scalar, Index rows, Index cols);
// 1 x c -> rows x c.
Var broadcast_rows(const Var& row, Index rows);
// r x 1 -> r x cols.
Var broadcast_cols(const Var& col, Index cols);

Var sum(const Var& a);          // -> 1x1
Var colwise_sum(const Var& a);  // -> 1 x cols
Var rowwise_sum(const Var& a);  // -> rows x 1

Var reshape(const Var& a, Index rows, Index cols);  // column-major
Var block(const Var& a, Index row, Index col, Index rows, Index cols);
Var hconcat(const std::vector<Var>& parts);

Var exp(const Var& a);
Var log(const Var& a);
Var sqrt(const Var& a);
Var square(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);
Var silu(const Var& a);
Var relu(const Var& a);

// Convenience compositions.
Var dot(const Var& a, const Var& b);  // -> 1x1, Frobenius inner product
Var l2_norm(const Var& a);            // -> 1x1
Var log_sum_exp(const Var& a);        // -> 1x1, over all entries, stabilized

}  // namespace gdaug::ad
