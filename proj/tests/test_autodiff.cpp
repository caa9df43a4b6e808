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


#include "gdaug/autodiff.hpp"

#include "support.hpp"

#include <doctest.h>

namespace gdaug {
namespace {

using testing::central_difference;
using testing::relative_error;

using UnaryOp = std::function<ad::Var(const ad::Var&)>;

// Contracts op(x) with a fixed random weight so every output entry matters.
void check_unary(const UnaryOp& op, Matrix x0, double tol = 1e-6) {
  Rng rng(7);
  ad::Tape probe;
  const Matrix out0 = op(probe.constant(x0)).value();
  const Matrix w = standard_normal(rng, out0.rows(), out0.cols());
  auto f = [&](const Matrix& x) {
    ad::Tape t;
    return ad::dot(op(t.constant(x)), t.constant(w)).scalar();
  };
  ad::Tape tape;
  ad::Var x = tape.variable(x0);
  tape.backward(ad::dot(op(x), tape.constant(w)));
  CHECK(relative_error(x.grad(), central_difference(f, x0)) < tol);
}

Matrix random_matrix(Index r, Index c, std::uint64_t seed) {
  Rng rng(seed);
  return standard_normal(rng, r, c);
}

TEST_CASE("elementwise ops match finite differences") {
  const Matrix x = random_matrix(3, 4, 1);
  const Matrix positive = x.cwiseAbs().array() + 0.5;
  check_unary([](const ad::Var& v) { return ad::exp(v); }, x);
  check_unary([](const ad::Var& v) { return ad::log(v); }, positive);
  check_unary([](const ad::Var& v) { return ad::sqrt(v); }, positive);
  check_unary([](const ad::Var& v) { return ad::square(v); }, x);
  check_unary([](const ad::Var& v) { return ad::tanh(v); }, x);
  check_unary([](const ad::Var& v) { return ad::sigmoid(v); }, x);
  check_unary([](const ad::Var& v) { return ad::softplus(v); }, x);
  check_unary([](const ad::Var& v) { return ad::silu(v); }, x);
  check_unary([](const ad::Var& v) { return -v + 2.0; }, x);
  check_unary([](const ad::Var& v) { return 3.0 * v - 1.0; }, x);
}

TEST_CASE("structural ops match finite differences") {
  const Matrix x = random_matrix(3, 4, 2);
  const Matrix w = random_matrix(4, 2, 3);
  check_unary([&](const ad::Var& v) { return ad::matmul(v, v.tape()->constant(w)); }, x);
  check_unary([&](const ad::Var& v) { return ad::matmul(v.tape()->constant(w.transpose()), ad::transpose(v)); }, x);
  check_unary([](const ad::Var& v) { return ad::hadamard(v, v); }, x);
  check_unary([](const ad::Var& v) { return ad::quotient(v, ad::exp(v)); }, x);
  check_unary([](const ad::Var& v) { return ad::broadcast(ad::sum(v), 2, 3); }, x);
  check_unary([](const ad::Var& v) { return ad::broadcast_rows(ad::colwise_sum(v), 5); }, x);
  check_unary([](const ad::Var& v) { return ad::broadcast_cols(ad::rowwise_sum(v), 2); }, x);
  check_unary([](const ad::Var& v) { return ad::reshape(v, 6, 2); }, x);
  check_unary([](const ad::Var& v) { return ad::block(v, 1, 1, 2, 2); }, x);
  check_unary([](const ad::Var& v) { return ad::hconcat({v, ad::square(v)}); }, x);
  check_unary([](const ad::Var& v) { return ad::dot(v, ad::tanh(v)); }, x);
  check_unary([](const ad::Var& v) { return ad::l2_norm(v); }, x);
  check_unary([](const ad::Var& v) { return ad::log_sum_exp(v); }, x);
}

TEST_CASE("log_sum_exp is stable for large inputs") {
  ad::Tape tape;
  Matrix big(1, 3);
  big << 1000.0, 1000.0, 1000.0;
  CHECK(ad::log_sum_exp(tape.constant(big)).scalar() == doctest::Approx(1000.0 + std::log(3.0)));
}

TEST_CASE("reshape is column-major") {
  ad::Tape tape;
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  const Matrix r = ad::reshape(tape.constant(m), 4, 1).value();
  CHECK(r(1, 0) == 3.0);
  CHECK(r(2, 0) == 2.0);
}

TEST_CASE("l2_norm has zero gradient at the origin") {
  ad::Tape tape;
  ad::Var x = tape.variable(Matrix::Zero(2, 2));
  tape.backward(ad::l2_norm(x));
  CHECK(x.grad().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradients accumulate over shared subexpressions") {
  ad::Tape tape;
  ad::Var x = tape.variable(Matrix::Constant(1, 1, 3.0));
  ad::Var y = x + x;
  tape.backward(ad::hadamard(y, x));  // 2 x^2
  CHECK(x.grad()(0, 0) == doctest::Approx(12.0));
}

TEST_CASE("unreached and constant nodes report zero gradients") {
  ad::Tape tape;
  ad::Var x = tape.variable(Matrix::Ones(2, 2));
  ad::Var unused = tape.variable(Matrix::Ones(3, 1));
  ad::Var c = tape.constant(Matrix::Ones(2, 2));
  tape.backward(ad::sum(ad::hadamard(x, c)));
  CHECK(unused.grad().isZero());
  CHECK_FALSE(c.requires_grad());
  CHECK(x.grad().isOnes());
}

TEST_CASE("mismatched shapes throw") {
  ad::Tape tape;
  ad::Var a = tape.variable(Matrix::Ones(2, 2));
  ad::Var b = tape.variable(Matrix::Ones(3, 2));
  CHECK_THROWS(a + b);
  CHECK_THROWS(ad::matmul(a, b));
}

}  // namespace
}  // namespace gdaug
