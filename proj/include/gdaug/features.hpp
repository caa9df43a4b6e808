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

// Statistical graph descriptors and the cosine/softmax similarity built on them.
//
// Layout of a feature vector for a table with F node types:
//   [0]          sum of adjacency entries (twice the edge count when discrete)
//   [1, F]       node-type distribution
//   [F+1, F+3]   smooth max / smooth min / mean of per-node weight
//   [F+4, F+6]   smooth max / smooth min / mean of per-node valence proxy
//
// Smooth extrema weight each node by softmax(+-v / temperature), the gradient
// of log-sum-exp. They are exact when the extremum is attained by ties and
// converge to the hard extrema as the temperature goes to zero.

#pragma once

#include "gdaug/autodiff.hpp"
#include "gdaug/graph.hpp"
#include "gdaug/types.hpp"

#include <vector>

namespace gdaug {

inline constexpr double kDefaultSmoothTemp = 0.05;

struct FeatureVector {
  Vector values;

  Index size() const { return values.size(); }
};

Index feature_length(const NodeTypeTable& table);

// Differentiable form: x (n x F) and a (n x n) on a tape; returns a 1 x d row.
ad::Var statistical_features(const ad::Var& x, const ad::Var& a, const Mask& node_mask, const NodeTypeTable& table,
                             double smooth_temp);

FeatureVector statistical_features(const ContinuousGraph& g, const NodeTypeTable& table,
                                   double smooth_temp = kDefaultSmoothTemp);
FeatureVector statistical_features(const Graph& g, const NodeTypeTable& table,
                                   double smooth_temp = kDefaultSmoothTemp);

double cosine_similarity(const FeatureVector& u, const FeatureVector& v);

// p_j = exp(cos(g, c_j)) / sum_k exp(cos(g, c_k)).
Vector similarity_softmax(const FeatureVector& g_aug, const std::vector<FeatureVector>& candidates);

// Cosines of a differentiable 1 x d feature row against fixed candidates; 1 x M.
ad::Var cosine_logits(const ad::Var& features, const std::vector<FeatureVector>& candidates);

}  // namespace gdaug
