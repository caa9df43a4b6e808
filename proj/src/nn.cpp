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

#include "gdaug/nn.hpp"

#include "gdaug/errors.hpp"

#include <cmath>

namespace gdaug::nn {

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "silu") return Activation::kSilu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + name + "'");
}

std::string to_string(Activation act) {
  switch (act) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kSilu: return "silu";
    case Activation::kTanh: return "tanh";
  }
  return "identity";
}

ad::Var activate(const ad::Var& x, Activation act) {
  switch (act) {
    case Activation::kIdentity: return x;
    case Activation::kRelu: return ad::relu(x);
    case Activation::kSilu: return ad::silu(x);
    case Activation::kTanh: return ad::tanh(x);
  }
  return x;
}

ad::Var Binder::operator()(const Matrix& param) {
  auto it = bound_.find(&param);
  if (it != bound_.end()) return it->second;
  ad::Var v = trainable_ ? tape_.variable(param) : tape_.constant(param);
  bound_.emplace(&param, v);
  return v;
}

Matrix Binder::grad(const Matrix& param) const {
  auto it = bound_.find(&param);
  if (it == bound_.end()) return Matrix::Zero(param.rows(), param.cols());
  return it->second.grad();
}

Linear Linear::init(Index in, Index out, Rng& rng) {
  // Glorot-uniform weights, zero bias.
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> u(-limit, limit);
  Linear l;
  l.weight.resize(in, out);
  for (Index j = 0; j < out; ++j)
    for (Index i = 0; i < in; ++i) l.weight(i, j) = u(rng);
  l.bias = Matrix::Zero(1, out);
  return l;
}

ad::Var Linear::forward(Binder& bind, const ad::Var& x) const {
  if (x.cols() != in()) {
    throw DimensionError("Linear: input has " + std::to_string(x.cols()) + " columns, expected " +
                         std::to_string(in()));
  }
  return ad::matmul(x, bind(weight)) + ad::broadcast_rows(bind(bias), x.rows());
}

Mlp Mlp::init(const std::vector<Index>& widths, Activation act, bool activate_output, Rng& rng) {
  if (widths.size() < 2) throw ConfigError("Mlp needs at least input and output widths");
  Mlp m;
  m.activation = act;
  m.activate_output = activate_output;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) m.layers.push_back(Linear::init(widths[i], widths[i + 1], rng));
  return m;
}

ad::Var Mlp::forward(Binder& bind, const ad::Var& x) const {
  ad::Var h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i].forward(bind, h);
    if (i + 1 < layers.size() || activate_output) h = activate(h, activation);
  }
  return h;
}

void Adam::step(const std::vector<Matrix*>& params, std::vector<Matrix> grads) {
  if (params.size() != grads.size()) throw DimensionError("Adam: params/grads length mismatch");
  if (m_.empty()) {
    for (const Matrix* p : params) {
      m_.push_back(Matrix::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (m_.size() != params.size()) throw DimensionError("Adam: parameter list changed between steps");
  if (cfg_.grad_clip > 0) {
    double sq = 0;
    for (const auto& g : grads) sq += g.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > cfg_.grad_clip) {
      for (auto& g : grads) g *= cfg_.grad_clip / norm;
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& p = *params[k];
    Matrix g = grads[k];
    if (cfg_.weight_decay > 0) g += cfg_.weight_decay * p;
    m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * g;
    v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    const Matrix m_hat = m_[k] / bc1;
    const Matrix v_hat = v_[k] / bc2;
    p.array() -= cfg_.learning_rate * m_hat.array() / (v_hat.array().sqrt() + cfg_.epsilon);
  }
}

nlohmann::json matrix_to_json(const Matrix& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Index>(data.size()) != rows * cols) throw ParseError("matrix payload size mismatch");
  return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

nlohmann::json to_json(const Linear& l) { return {{"weight", matrix_to_json(l.weight)}, {"bias", matrix_to_json(l.bias)}}; }

Linear linear_from_json(const nlohmann::json& j) {
  Linear l;
  l.weight = matrix_from_json(j.at("weight"));
  l.bias = matrix_from_json(j.at("bias"));
  if (l.bias.rows() != 1 || l.bias.cols() != l.weight.cols()) throw ParseError("linear layer bias shape mismatch");
  return l;
}

nlohmann::json to_json(const Mlp& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : m.layers) layers.push_back(to_json(l));
  return {{"activation", to_string(m.activation)}, {"activate_output", m.activate_output}, {"layers", layers}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp m;
  m.activation = parse_activation(j.at("activation").get<std::string>());
  m.activate_output = j.at("activate_output").get<bool>();
  for (const auto& l : j.at("layers")) m.layers.push_back(linear_from_json(l));
  if (m.layers.empty()) throw ParseError("mlp without layers");
  for (std::size_t i = 1; i < m.layers.size(); ++i) {
    if (m.layers[i].in() != m.layers[i - 1].out()) throw ParseError("mlp layer widths do not chain");
  }
  return m;
}

}  // namespace gdaug::nn
