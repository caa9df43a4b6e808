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

#include "gdaug/graph.hpp"

#include "gdaug/errors.hpp"

#include <fstream>
#include <unordered_set>

namespace gdaug {

MaskedLabel::MaskedLabel(Vector v, Mask m) : values(std::move(v)), valid(std::move(m)) {
  if (values.size() != valid.size()) throw ValidationError("label and mask lengths differ");
  for (Index i = 0; i < values.size(); ++i) {
    if (!valid(i)) values(i) = 0.0;
  }
}

bool operator==(const MaskedLabel& a, const MaskedLabel& b) {
  if (a.size() != b.size()) return false;
  for (Index i = 0; i < a.size(); ++i) {
    if (a.valid(i) != b.valid(i)) return false;
    if (a.valid(i) && a.values(i) != b.values(i)) return false;
  }
  return true;
}

NodeTypeTable::NodeTypeTable(std::vector<std::string> n, Vector w, Vector v)
    : names(std::move(n)), weights(std::move(w)), valences(std::move(v)) {
  validate();
}

void NodeTypeTable::validate() const {
  if (names.empty()) throw ValidationError("node-type table is empty");
  if (weights.size() != size() || valences.size() != size()) {
    throw ValidationError("node-type table: names, weights and valences differ in length");
  }
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw ValidationError("node-type table: duplicate name '" + n + "'");
  }
  if ((weights.array() <= 0.0).any()) throw ValidationError("node-type table: weights must be positive");
}

NodeTypeTable NodeTypeTable::organic() {
  return NodeTypeTable({"C", "N", "O"}, (Vector(3) << 12.011, 14.007, 15.999).finished(),
                       (Vector(3) << 4.0, 3.0, 2.0).finished());
}

Index Graph::num_edges() const {
  Index e = 0;
  for (Index i = 0; i < adjacency.rows(); ++i)
    for (Index j = i + 1; j < adjacency.cols(); ++j) e += adjacency(i, j) != 0;
  return e;
}

void Graph::validate(const NodeTypeTable& table) const {
  const Index n = num_nodes();
  if (adjacency.rows() != n || adjacency.cols() != n) throw ValidationError("adjacency shape does not match node count");
  for (Index i = 0; i < n; ++i) {
    if (node_types[static_cast<std::size_t>(i)] < 0 || node_types[static_cast<std::size_t>(i)] >= table.size()) {
      throw ValidationError("node type index " + std::to_string(node_types[static_cast<std::size_t>(i)]) +
                            " outside the node-type table");
    }
    if (adjacency(i, i) != 0) throw ValidationError("self-loop on node " + std::to_string(i));
    for (Index j = 0; j < n; ++j) {
      if (adjacency(i, j) > 1) throw ValidationError("adjacency entries must be 0/1");
      if (adjacency(i, j) != adjacency(j, i)) throw ValidationError("adjacency is not symmetric");
    }
  }
  if (label.values.size() != label.valid.size()) throw ValidationError("label and mask lengths differ");
}

Graph Graph::from_edges(std::vector<int> node_types, const std::vector<std::pair<int, int>>& edges) {
  Graph g;
  g.node_types = std::move(node_types);
  const Index n = g.num_nodes();
  g.adjacency = AdjacencyMatrix::Zero(n, n);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw ValidationError("edge endpoint out of range");
    if (u == v) throw ValidationError("self-loop rejected");
    g.adjacency(u, v) = 1;
    g.adjacency(v, u) = 1;
  }
  return g;
}

void ContinuousGraph::project() {
  const Index n = capacity();
  Matrix sym = (a + a.transpose()) / 2.0;
  a = sym.cwiseProduct(pair_mask(node_mask));
  for (Index i = 0; i < n; ++i) {
    if (!node_mask(i)) x.row(i).setZero();
  }
}

bool ContinuousGraph::satisfies_constraints() const {
  const Index n = capacity();
  if (a.rows() != n || a.cols() != n || x.rows() != n) return false;
  for (Index i = 0; i < n; ++i) {
    if (a(i, i) != 0.0) return false;
    if (!node_mask(i) && (x.row(i).array() != 0.0).any()) return false;
    for (Index j = 0; j < n; ++j) {
      if (a(i, j) != a(j, i)) return false;
      if ((!node_mask(i) || !node_mask(j)) && a(i, j) != 0.0) return false;
    }
  }
  return true;
}

Graph parse_graph_record(std::string_view line, const NodeTypeTable& table) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line.begin(), line.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("graph record: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("graph record is not a JSON object");
  if (!j.contains("nodes") || !j["nodes"].is_array()) throw ParseError("graph record lacks a \"nodes\" list");
  if (!j.contains("edges") || !j["edges"].is_array()) throw ParseError("graph record lacks an \"edges\" list");

  std::vector<int> types;
  for (const auto& t : j["nodes"]) {
    if (!t.is_number_integer()) throw ParseError("node type must be an integer");
    const auto v = t.get<long long>();
    if (v < 0 || v >= table.size()) throw ValidationError("unknown node type index " + std::to_string(v));
    types.push_back(static_cast<int>(v));
  }
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      throw ParseError("edge must be a pair of integers");
    }
    const auto u = e[0].get<long long>();
    const auto v = e[1].get<long long>();
    const auto n = static_cast<long long>(types.size());
    if (u < 0 || v < 0 || u >= n || v >= n) throw ValidationError("edge endpoint out of range");
    if (u == v) throw ValidationError("self-loop rejected");
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  }
  Graph g = Graph::from_edges(std::move(types), edges);
  if (j.contains("label")) {
    const auto& l = j["label"];
    if (!l.is_array()) throw ParseError("\"label\" must be a list");
    Vector values(static_cast<Index>(l.size()));
    Mask valid(static_cast<Index>(l.size()));
    for (std::size_t k = 0; k < l.size(); ++k) {
      const auto i = static_cast<Index>(k);
      if (l[k].is_null()) {
        values(i) = 0.0;
        valid(i) = false;
      } else if (l[k].is_number()) {
        values(i) = l[k].get<double>();
        valid(i) = true;
      } else {
        throw ParseError("label entries must be numbers or null");
      }
    }
    g.label = MaskedLabel(std::move(values), std::move(valid));
  }
  if (j.contains("id")) {
    const auto& id = j["id"];
    g.id = id.is_string() ? id.get<std::string>() : id.dump();
  }
  return g;
}

nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["id"] = g.id;
  j["nodes"] = g.node_types;
  nlohmann::json edges = nlohmann::json::array();
  for (Index i = 0; i < g.num_nodes(); ++i)
    for (Index j2 = i + 1; j2 < g.num_nodes(); ++j2)
      if (g.adjacency(i, j2)) edges.push_back({i, j2});
  j["edges"] = edges;
  if (!g.label.empty()) {
    nlohmann::json l = nlohmann::json::array();
    for (Index k = 0; k < g.label.size(); ++k) {
      if (g.label.valid(k)) {
        l.push_back(g.label.values(k));
      } else {
        l.push_back(nullptr);
      }
    }
    j["label"] = l;
  }
  return j;
}

std::string serialize_graph_record(const Graph& g) { return graph_to_json(g).dump(); }

std::vector<Graph> read_graphs_jsonl(const std::filesystem::path& path, const NodeTypeTable& table) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file " + path.string());
  std::vector<Graph> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_graph_record(line, table));
    } catch (const Error& e) {
      // Keep the error category, add the location.
      const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
      if (dynamic_cast<const ValidationError*>(&e)) throw ValidationError(where + e.what());
      throw ParseError(where + e.what());
    }
  }
  return out;
}

void write_graphs_jsonl(const std::filesystem::path& path, const std::vector<Graph>& graphs) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& g : graphs) out << serialize_graph_record(g) << '\n';
}

NodeTypeTable node_type_table_from_json(const nlohmann::json& j) {
  try {
    const auto names = j.at("names").get<std::vector<std::string>>();
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto v = j.at("valences").get<std::vector<double>>();
    return NodeTypeTable(names, Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size())),
                         Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("node-type table: ") + e.what());
  }
}

nlohmann::json to_json(const NodeTypeTable& t) {
  return {{"names", t.names},
          {"weights", std::vector<double>(t.weights.data(), t.weights.data() + t.weights.size())},
          {"valences", std::vector<double>(t.valences.data(), t.valences.data() + t.valences.size())}};
}

NodeTypeTable read_node_type_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open node-type table " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("node-type table: ") + e.what());
  }
  return node_type_table_from_json(j);
}

ContinuousGraph to_continuous(const Graph& g, Index num_types, Index n_max) {
  const Index n = g.num_nodes();
  if (n > n_max) {
    throw CapacityError("graph with " + std::to_string(n) + " nodes exceeds capacity " + std::to_string(n_max));
  }
  ContinuousGraph c;
  c.x = Matrix::Zero(n_max, num_types);
  c.a = Matrix::Zero(n_max, n_max);
  c.node_mask = Mask::Constant(n_max, false);
  for (Index i = 0; i < n; ++i) {
    const int t = g.node_types[static_cast<std::size_t>(i)];
    if (t < 0 || t >= num_types) throw ValidationError("node type outside the table");
    c.x(i, t) = 1.0;
    c.node_mask(i) = true;
  }
  c.a.topLeftCorner(n, n) = g.adjacency.cast<double>();
  c.time = 0.0;
  return c;
}

std::vector<ContinuousGraph> batch_graphs(const std::vector<Graph>& graphs, Index num_types, Index n_max) {
  if (n_max <= 0) throw CapacityError("n_max must be positive");
  std::vector<ContinuousGraph> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(to_continuous(g, num_types, n_max));
  return out;
}

Graph discretize(const ContinuousGraph& g, double edge_threshold, const NodeTypeTable& table) {
  if (!(edge_threshold > 0.0 && edge_threshold < 1.0)) throw DomainError("edge threshold must lie in (0,1)");
  if (g.num_types() != table.size()) throw DimensionError("continuous graph width differs from the node-type table");
  std::vector<Index> active;
  for (Index i = 0; i < g.capacity(); ++i)
    if (g.node_mask(i)) active.push_back(i);
  const auto n = static_cast<Index>(active.size());
  Graph out;
  out.node_types.resize(active.size());
  out.adjacency = AdjacencyMatrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index i = active[static_cast<std::size_t>(k)];
    Index best = 0;
    for (Index c = 1; c < g.num_types(); ++c) {
      if (g.x(i, c) > g.x(i, best)) best = c;
    }
    out.node_types[static_cast<std::size_t>(k)] = static_cast<int>(best);
    for (Index l = k + 1; l < n; ++l) {
      const Index j = active[static_cast<std::size_t>(l)];
      const double v = 0.5 * (g.a(i, j) + g.a(j, i));
      if (v > edge_threshold) {
        out.adjacency(k, l) = 1;
        out.adjacency(l, k) = 1;
      }
    }
  }
  return out;
}

Graph permute(const Graph& g, const std::vector<int>& perm) {
  const Index n = g.num_nodes();
  if (static_cast<Index>(perm.size()) != n) throw DimensionError("permutation length differs from node count");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)]) throw DimensionError("not a permutation");
    seen[static_cast<std::size_t>(p)] = true;
  }
  Graph out = g;
  for (Index i = 0; i < n; ++i) {
    out.node_types[static_cast<std::size_t>(i)] = g.node_types[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    for (Index j = 0; j < n; ++j) {
      out.adjacency(i, j) = g.adjacency(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

}  // namespace gdaug
