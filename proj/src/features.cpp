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

#include "gdaug/features.hpp"

#include "gdaug/errors.hpp"

#include <cmath>

namespace gdaug {

namespace {

// Row selector picking the masked nodes, k x n.
Matrix selector(const Mask& node_mask) {
  const Index n = node_mask.size();
  Matrix s = Matrix::Zero(node_mask.count(), n);
  Index r = 0;
  for (Index i = 0; i < n; ++i) {
    if (node_mask(i)) s(r++, i) = 1.0;
  }
  return s;
}

ad::Var softmax_column(const ad::Var& logits) {
  const double shift = logits.value().maxCoeff();
  ad::Var e = ad::exp(logits - shift);
  return ad::quotient(e, ad::broadcast(ad::sum(e), e.rows(), 1));
}

// smooth max, smooth min, mean of a k x 1 column.
ad::Var extremes_and_mean(const ad::Var& v, double temp) {
  const Index k = v.rows();
  ad::Var wmax = softmax_column((1.0 / temp) * v);
  ad::Var wmin = softmax_column((-1.0 / temp) * v);
  ad::Var smax = ad::dot(v, wmax);
  ad::Var smin = ad::dot(v, wmin);
  ad::Var mean = (1.0 / static_cast<double>(k)) * ad::sum(v);
  return ad::hconcat({smax, smin, mean});
}

}  // namespace

Index feature_length(const NodeTypeTable& table) { return table.size() + 7; }

ad::Var statistical_features(const ad::Var& x, const ad::Var& a, const Mask& node_mask, const NodeTypeTable& table,
                             double smooth_temp) {
  if (!(smooth_temp > 0.0)) throw DomainError("smooth temperature must be positive");
  if (x.cols() != table.size()) throw DimensionError("node features do not match the node-type table");
  if (x.rows() != node_mask.size() || a.rows() != node_mask.size() || a.cols() != node_mask.size()) {
    throw DimensionError("feature extraction: x, a and mask disagree on node count");
  }
  const Index k = node_mask.count();
  if (k == 0) throw DegenerateInputError("statistical features of an empty graph");
  ad::Tape& tape = *x.tape();

  ad::Var select = tape.constant(selector(node_mask));
  ad::Var support = tape.constant(pair_mask(node_mask));
  ad::Var a_masked = ad::hadamard(a, support);

  ad::Var degree_sum = ad::sum(a_masked);

  // Rows are normalized by their squared entries: exact for one-hot rows and
  // defined for arbitrary signs.
  ad::Var xs = ad::matmul(select, x);
  ad::Var sq = ad::square(xs);
  ad::Var row_norm = ad::rowwise_sum(sq) + 1e-12;
  ad::Var dist = ad::quotient(sq, ad::broadcast_cols(row_norm, sq.cols()));
  ad::Var type_dist = (1.0 / static_cast<double>(k)) * ad::colwise_sum(dist);

  ad::Var node_weight = ad::matmul(xs, tape.constant(Matrix(table.weights)));
  ad::Var node_valence = ad::matmul(select, ad::rowwise_sum(a_masked));

  return ad::hconcat({degree_sum, type_dist, extremes_and_mean(node_weight, smooth_temp),
                      extremes_and_mean(node_valence, smooth_temp)});
}

FeatureVector statistical_features(const ContinuousGraph& g, const NodeTypeTable& table, double smooth_temp) {
  ad::Tape tape;
  ad::Var f = statistical_features(tape.constant(g.x), tape.constant(g.a), g.node_mask, table, smooth_temp);
  return FeatureVector{f.value().transpose()};
}

FeatureVector statistical_features(const Graph& g, const NodeTypeTable& table, double smooth_temp) {
  return statistical_features(to_continuous(g, table.size(), g.num_nodes()), table, smooth_temp);
}

double cosine_similarity(const FeatureVector& u, const FeatureVector& v) {
  if (u.size() != v.size()) throw DimensionError("cosine similarity: length mismatch");
  const double nu = u.values.norm();
  const double nv = v.values.norm();
  if (nu == 0.0 || nv == 0.0) throw DegenerateInputError("cosine similarity with a zero-norm feature vector");
  return u.values.dot(v.values) / (nu * nv);
}

Vector similarity_softmax(const FeatureVector& g_aug, const std::vector<FeatureVector>& candidates) {
  if (candidates.empty()) throw DegenerateInputError("similarity softmax needs at least one candidate");
  Vector logits(static_cast<Index>(candidates.size()));
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    logits(static_cast<Index>(j)) = cosine_similarity(g_aug, candidates[j]);
  }
  const Vector e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

ad::Var cosine_logits(const ad::Var& features, const std::vector<FeatureVector>& candidates) {
  if (candidates.empty()) throw DegenerateInputError("similarity softmax needs at least one candidate");
  if (features.rows() != 1) throw DimensionError("cosine logits expect a single feature row");
  const Index d = features.cols();
  ad::Tape& tape = *features.tape();
  Matrix c(d, static_cast<Index>(candidates.size()));
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (candidates[j].size() != d) throw DimensionError("candidate feature length mismatch");
    const double n = candidates[j].values.norm();
    if (n == 0.0) throw DegenerateInputError("zero-norm candidate feature vector");
    c.col(static_cast<Index>(j)) = candidates[j].values / n;
  }
  ad::Var norm = ad::l2_norm(features);
  if (norm.scalar() == 0.0) throw DegenerateInputError("zero-norm augmented feature vector");
  ad::Var dots = ad::matmul(features, tape.constant(c));
  return ad::quotient(dots, ad::broadcast(norm, 1, dots.cols()));
}

}  // namespace gdaug
