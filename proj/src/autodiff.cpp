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

#include "gdaug/errors.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace gdaug::ad {

namespace {

Tape& tape_of(const Var& a) {
  if (a.tape() == nullptr) throw Error("ad: operation on an unbound Var");
  return *a.tape();
}

Tape& tape_of(const Var& a, const Var& b) {
  if (a.tape() != b.tape()) throw Error("ad: operands live on different tapes");
  return tape_of(a);
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string("ad::") + op + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

// Elementwise unary op with derivative expressed through input and output.
template <typename F, typename DF>
Var unary(const Var& a, F f, DF df) {
  Tape& t = tape_of(a);
  Matrix out = a.value().unaryExpr(f);
  const bool rg = a.requires_grad();
  Tape::Backward bw;
  if (rg) {
    const int out_id = static_cast<int>(t.size());
    bw = [a, out_id, df](Tape& tape, const Matrix& g) {
      const Matrix& x = a.value();
      const Matrix& y = tape.value(out_id);
      Matrix local(x.rows(), x.cols());
      for (Index i = 0; i < x.size(); ++i) local(i) = df(x(i), y(i));
      tape.accumulate(a, g.cwiseProduct(local));
    };
  }
  return t.record(std::move(out), rg, std::move(bw));
}

}  // namespace

const Matrix& Var::value() const { return tape_->value(id_); }

Matrix Var::grad() const {
  const Matrix& g = tape_->grad_of(id_);
  if (g.size() == 0) return Matrix::Zero(rows(), cols());
  return g;
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw DimensionError("ad::Var::scalar on a non-1x1 node");
  return v(0, 0);
}

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::variable(Matrix value) { return record(std::move(value), true, nullptr); }

Var Tape::constant(Matrix value) { return record(std::move(value), false, nullptr); }

Var Tape::constant(double value) { return constant(Matrix::Constant(1, 1, value)); }

Var Tape::record(Matrix value, bool requires_grad, Backward backward) {
  nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, std::move(backward)});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::accumulate(const Var& v, const Matrix& g) {
  Node& n = nodes_[static_cast<std::size_t>(v.id())];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(const Var& root) {
  if (root.tape() != this) throw Error("ad::Tape::backward: root belongs to another tape");
  if (root.value().size() != 1) throw DimensionError("ad::Tape::backward: root must be 1x1");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  nodes_[static_cast<std::size_t>(root.id())].grad = Matrix::Ones(1, 1);
  for (int id = root.id(); id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.backward || n.grad.size() == 0) continue;
    // Copy: the closure may accumulate into earlier nodes only, never this one,
    // but keep the adjoint stable regardless.
    const Matrix g = n.grad;
    n.backward(*this, g);
  }
}

Var operator+(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tape& t = tape_of(a, b);
  const bool rg = a.requires_grad() || b.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [a, b](Tape& tape, const Matrix& g) {
      tape.accumulate(a, g);
      tape.accumulate(b, g);
    };
  return t.record(a.value() + b.value(), rg, std::move(bw));
}

Var operator-(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tape& t = tape_of(a, b);
  const bool rg = a.requires_grad() || b.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [a, b](Tape& tape, const Matrix& g) {
      tape.accumulate(a, g);
      tape.accumulate(b, -g);
    };
  return t.record(a.value() - b.value(), rg, std::move(bw));
}

Var operator-(const Var& a) { return -1.0 * a; }

Var operator*(double s, const Var& a) {
  Tape& t = tape_of(a);
  const bool rg = a.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [a, s](Tape& tape, const Matrix& g) { tape.accumulate(a, s * g); };
  return t.record(s * a.value(), rg, std::move(bw));
}

Var operator*(const Var& a, double s) { return s * a; }

Var operator+(const Var& a, double s) {
  Tape& t = tape_of(a);
  const bool rg = a.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [a](Tape& tape, const Matrix& g) { tape.accumulate(a, g); };
  return t.record((a.value().array() + s).matrix(), rg, std::move(bw));
}

Var operator-(const Var& a, double s) { return a + (-s); }

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("ad::matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()));
  }
  Tape& t = tape_of(a, b);
  const bool rg = a.requires_grad() || b.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [a, b](Tape& tape, const Matrix& g) {
      if (a.requires_grad()) tape.accumulate(a, g * b.value().transpose());
      if (b.requires_grad()) tape.accumulate(b, a.value().transpose() * g);
    };
  return t.record(a.value() * b.value(), rg, std::move(bw));
}

Var hadamard(const Var& a, const Var& b) {
  require_same_shape(a, b, "hadamard");
  Tape& t = tape_of(a, b);
  const bool rg = a.requires_grad() || b.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [a, b](Tape& tape, const Matrix& g) {
      if (a.requires_grad()) tape.accumulate(a, g.cwiseProduct(b.value()));
      if (b.requires_grad()) tape.accumulate(b, g.cwiseProduct(a.value()));
    };
  return t.record(a.value().cwiseProduct(b.value()), rg, std::move(bw));
}

Var quotient(const Var& a, const Var& b) {
  require_same_shape(a, b, "quotient");
  Tape& t = tape_of(a, b);
  const bool rg = a.requires_grad() || b.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [a, b](Tape& tape, const Matrix& g) {
      const Matrix& bv = b.value();
      if (a.requires_grad()) tape.accumulate(a, g.cwiseQuotient(bv));
      if (b.requires_grad()) {
        const Matrix& av = a.value();
        tape.accumulate(b, -(g.cwiseProduct(av).cwiseQuotient(bv.cwiseProduct(bv))));
      }
    };
  return t.record(a.value().cwiseQuotient(b.value()), rg, std::move(bw));
}

Var transpose(const Var& a) {
  Tape& t = tape_of(a);
  const bool rg = a.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [a](Tape& tape, const Matrix& g) { tape.accumulate(a, g.transpose()); };
  return t.record(a.value().transpose(), rg, std::move(bw));
}

Var broadcast(const Var& scalar, Index rows, Index cols) {
  if (scalar.value().size() != 1) throw DimensionError("ad::broadcast: operand must be 1x1");
  Tape& t = tape_of(scalar);
  const bool rg = scalar.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [scalar](Tape& tape, const Matrix& g) { tape.accumulate(scalar, Matrix::Constant(1, 1, g.sum())); };
  return t.record(Matrix::Constant(rows, cols, scalar.scalar()), rg, std::move(bw));
}

Var broadcast_rows(const Var& row, Index rows) {
  if (row.rows() != 1) throw DimensionError("ad::broadcast_rows: operand must have one row");
  Tape& t = tape_of(row);
  const bool rg = row.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [row](Tape& tape, const Matrix& g) { tape.accumulate(row, g.colwise().sum()); };
  return t.record(row.value().replicate(rows, 1), rg, std::move(bw));
}

Var broadcast_cols(const Var& col, Index cols) {
  if (col.cols() != 1) throw DimensionError("ad::broadcast_cols: operand must have one column");
  Tape& t = tape_of(col);
  const bool rg = col.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [col](Tape& tape, const Matrix& g) { tape.accumulate(col, g.rowwise().sum()); };
  return t.record(col.value().replicate(1, cols), rg, std::move(bw));
}

Var sum(const Var& a) {
  Tape& t = tape_of(a);
  const bool rg = a.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [a](Tape& tape, const Matrix& g) { tape.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0))); };
  return t.record(Matrix::Constant(1, 1, a.value().sum()), rg, std::move(bw));
}

Var colwise_sum(const Var& a) {
  Tape& t = tape_of(a);
  const bool rg = a.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [a](Tape& tape, const Matrix& g) { tape.accumulate(a, g.replicate(a.rows(), 1)); };
  return t.record(a.value().colwise().sum(), rg, std::move(bw));
}

Var rowwise_sum(const Var& a) {
  Tape& t = tape_of(a);
  const bool rg = a.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [a](Tape& tape, const Matrix& g) { tape.accumulate(a, g.replicate(1, a.cols())); };
  return t.record(a.value().rowwise().sum(), rg, std::move(bw));
}

Var reshape(const Var& a, Index rows, Index cols) {
  if (rows * cols != a.value().size()) throw DimensionError("ad::reshape: size mismatch");
  Tape& t = tape_of(a);
  const bool rg = a.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [a](Tape& tape, const Matrix& g) {
      tape.accumulate(a, Eigen::Map<const Matrix>(g.data(), a.rows(), a.cols()));
    };
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  return t.record(std::move(out), rg, std::move(bw));
}

Var block(const Var& a, Index row, Index col, Index rows, Index cols) {
  if (row < 0 || col < 0 || row + rows > a.rows() || col + cols > a.cols()) {
    throw DimensionError("ad::block: out of range");
  }
  Tape& t = tape_of(a);
  const bool rg = a.requires_grad();
  Tape::Backward bw;
  if (rg) bw = [a, row, col, rows, cols](Tape& tape, const Matrix& g) {
      Matrix full = Matrix::Zero(a.rows(), a.cols());
      full.block(row, col, rows, cols) = g;
      tape.accumulate(a, full);
    };
  return t.record(a.value().block(row, col, rows, cols), rg, std::move(bw));
}

Var hconcat(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("ad::hconcat: no operands");
  Tape& t = tape_of(parts.front());
  const Index rows = parts.front().rows();
  Index cols = 0;
  bool rg = false;
  for (const auto& p : parts) {
    if (p.tape() != &t) throw Error("ad: operands live on different tapes");
    if (p.rows() != rows) throw DimensionError("ad::hconcat: row mismatch");
    cols += p.cols();
    rg = rg || p.requires_grad();
  }
  Matrix out(rows, cols);
  Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  Tape::Backward bw;
  if (rg) bw = [parts](Tape& tape, const Matrix& g) {
      Index offset = 0;
      for (const auto& p : parts) {
        if (p.requires_grad()) tape.accumulate(p, g.middleCols(offset, p.cols()));
        offset += p.cols();
      }
    };
  return t.record(std::move(out), rg, std::move(bw));
}

Var exp(const Var& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(const Var& a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var sqrt(const Var& a) {
  return unary(a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; });
}

Var square(const Var& a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var tanh(const Var& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

namespace {
double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
double softplus_value(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
}  // namespace

Var sigmoid(const Var& a) {
  return unary(a, logistic, [](double, double y) { return y * (1.0 - y); });
}

Var softplus(const Var& a) {
  return unary(a, softplus_value, [](double x, double) { return logistic(x); });
}

Var silu(const Var& a) {
  return unary(
      a, [](double x) { return x * logistic(x); },
      [](double x, double) {
        const double s = logistic(x);
        return s * (1.0 + x * (1.0 - s));
      });
}

Var relu(const Var& a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; }, [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Var dot(const Var& a, const Var& b) { return sum(hadamard(a, b)); }

Var l2_norm(const Var& a) {
  Tape& t = tape_of(a);
  const double n = a.value().norm();
  const bool rg = a.requires_grad();
  const int out_id = static_cast<int>(t.size());
  Tape::Backward bw;
  if (rg) bw = [a, out_id](Tape& tape, const Matrix& g) {
      const double norm = tape.value(out_id)(0, 0);
      if (norm == 0.0) return;
      tape.accumulate(a, (g(0, 0) / norm) * a.value());
    };
  return t.record(Matrix::Constant(1, 1, n), rg, std::move(bw));
}

Var log_sum_exp(const Var& a) {
  // The shift is a constant; log-sum-exp is shift-invariant so its gradient is unaffected.
  const double shift = a.value().maxCoeff();
  return log(sum(exp(a - shift))) + shift;
}

}  // namespace gdaug::ad
