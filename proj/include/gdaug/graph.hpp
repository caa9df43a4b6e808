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

#include "gdaug/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gdaug {

// Multi-task label; invalid entries are missing measurements. Masked values
// are stored as 0.
struct MaskedLabel {
  Vector values;
  Mask valid;

  MaskedLabel() = default;
  MaskedLabel(Vector v, Mask m);
  static MaskedLabel scalar(double v) { return MaskedLabel(Vector::Constant(1, v), Mask::Constant(1, true)); }

  Index size() const { return values.size(); }
  bool empty() const { return values.size() == 0; }
  bool any_valid() const { return valid.size() > 0 && valid.any(); }
  friend bool operator==(const MaskedLabel& a, const MaskedLabel& b);
};

struct NodeTypeTable {
  std::vector<std::string> names;
  Vector weights;   // e.g. atomic mass, unified mass units
  Vector valences;

  NodeTypeTable() = default;
  NodeTypeTable(std::vector<std::string> names, Vector weights, Vector valences);

  Index size() const { return static_cast<Index>(names.size()); }
  void validate() const;

  // C, N, O with atomic masses and standard valences.
  static NodeTypeTable organic();
};

struct Graph {
  std::vector<int> node_types;
  AdjacencyMatrix adjacency;
  MaskedLabel label;
  std::string id;

  Index num_nodes() const { return static_cast<Index>(node_types.size()); }
  Index num_edges() const;
  // Throws ValidationError on any broken invariant.
  void validate(const NodeTypeTable& table) const;

  static Graph from_edges(std::vector<int> node_types, const std::vector<std::pair<int, int>>& edges);
};

// Relaxed diffusion state, padded to a fixed capacity.
struct ContinuousGraph {
  Matrix x;        // n_max x F_n
  Matrix a;        // n_max x n_max, symmetric, zero diagonal
  Mask node_mask;  // n_max
  double time = 0.0;

  Index capacity() const { return node_mask.size(); }
  Index num_active() const { return node_mask.count(); }
  Index num_types() const { return x.cols(); }
  // Re-imposes symmetry, zero diagonal and zero padding.
  void project();
  // True when a is symmetric, the diagonal is 0, and padding is 0, all exactly.
  bool satisfies_constraints() const;
};

Graph parse_graph_record(std::string_view line, const NodeTypeTable& table);
nlohmann::json graph_to_json(const Graph& g);
std::string serialize_graph_record(const Graph& g);

std::vector<Graph> read_graphs_jsonl(const std::filesystem::path& path, const NodeTypeTable& table);
void write_graphs_jsonl(const std::filesystem::path& path, const std::vector<Graph>& graphs);

NodeTypeTable node_type_table_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NodeTypeTable& t);
NodeTypeTable read_node_type_table(const std::filesystem::path& path);

// One-hot x, 0/1 a, first n positions masked, time 0.
ContinuousGraph to_continuous(const Graph& g, Index num_types, Index n_max);
std::vector<ContinuousGraph> batch_graphs(const std::vector<Graph>& graphs, Index num_types, Index n_max);

// Argmax node types (lowest index wins ties) and thresholded symmetric edges.
Graph discretize(const ContinuousGraph& g, double edge_threshold, const NodeTypeTable& table);

// Relabels nodes: node i of the result is node perm[i] of g.
Graph permute(const Graph& g, const std::vector<int>& perm);

}  // namespace gdaug
