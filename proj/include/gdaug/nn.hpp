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

#include "gdaug/autodiff.hpp"
#include "gdaug/random.hpp"
#include "gdaug/types.hpp"

#include <json.hpp>

#include <string>
#include <unordered_map>
#include <vector>

namespace gdaug::nn {

enum class Activation { kIdentity, kRelu, kSilu, kTanh };

Activation parse_activation(const std::string& name);
std::string to_string(Activation act);
ad::Var activate(const ad::Var& x, Activation act);

// Maps parameter matrices onto tape nodes for one forward pass. Trainable
// binders create variables, frozen binders create constants.
class Binder {
 public:
  Binder(ad::Tape& tape, bool trainable) : tape_(tape), trainable_(trainable) {}

  ad::Var operator()(const Matrix& param);
  ad::Tape& tape() const { return tape_; }
  bool trainable() const { return trainable_; }

  // Gradient of the last backward pass w.r.t. param (zero if unused).
  Matrix grad(const Matrix& param) const;

 private:
  ad::Tape& tape_;
  bool trainable_;
  std::unordered_map<const Matrix*, ad::Var> bound_;
};

struct Linear {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out

  static Linear init(Index in, Index out, Rng& rng);
  Index in() const { return weight.rows(); }
  Index out() const { return weight.cols(); }

  ad::Var forward(Binder& bind, const ad::Var& x) const;

  template <typename F>
  void visit(F&& f) {
    f(weight);
    f(bias);
  }
  template <typename F>
  void visit(F&& f) const {
    f(weight);
    f(bias);
  }
};

// Linear layers with an activation between them (and optionally after the last).
struct Mlp {
  std::vector<Linear> layers;
  Activation activation = Activation::kSilu;
  bool activate_output = false;

  static Mlp init(const std::vector<Index>& widths, Activation act, bool activate_output, Rng& rng);
  Index in() const { return layers.front().in(); }
  Index out() const { return layers.back().out(); }

  ad::Var forward(Binder& bind, const ad::Var& x) const;

  template <typename F>
  void visit(F&& f) {
    for (auto& l : layers) l.visit(f);
  }
  template <typename F>
  void visit(F&& f) const {
    for (const auto& l : layers) l.visit(f);
  }
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  double grad_clip = 0.0;  // global-norm clip; 0 disables
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  // params and grads are parallel; the parameter order must be stable across calls.
  void step(const std::vector<Matrix*>& params, std::vector<Matrix> grads);
  long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

// Collects raw pointers to every parameter of a module in visit order.
template <typename Module>
std::vector<Matrix*> parameters(Module& m) {
  std::vector<Matrix*> out;
  m.visit([&](Matrix& p) { out.push_back(&p); });
  return out;
}

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Linear& l);
Linear linear_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Mlp& m);
Mlp mlp_from_json(const nlohmann::json& j);

}  // namespace gdaug::nn
