// Copyright 2026 The hetembed Authors. All Rights Reserved.
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

// Heterogeneous graph model, meta-path units (MPUs), meta-paths and query
// plans.
//
// A HetGraph is immutable after construction. Node ids are dense 0..N-1 and
// every node carries exactly one type. Edges are stored once and traversed
// in both directions. An MPU is an unordered pair of node types joined by at
// least one edge; (A,M) and (M,A) are the same unit, canonicalized by label.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hetembed/common.hpp"

namespace hetembed {

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  RelationId relation = 0;
};

struct ContentSlot {
  ContentTypeId type = 0;
  std::vector<double> values;
};

struct Mpu {
  TypeId first = 0;
  TypeId second = 0;

  bool self_pair() const { return first == second; }
  bool contains(TypeId t) const { return first == t || second == t; }
  /// The type on the other end of the unit from `t`.
  TypeId other(TypeId t) const { return t == first ? second : first; }

  friend auto operator<=>(const Mpu&, const Mpu&) = default;
};

/// Type names plus the set of connected type pairs. Enough to parse and
/// validate meta-paths without the full graph.
class Schema {
 public:
  Schema() = default;
  Schema(std::vector<std::string> type_names, std::vector<Mpu> mpus)
      : type_names_(std::move(type_names)), mpus_(std::move(mpus)) {
    std::sort(mpus_.begin(), mpus_.end(), [this](const Mpu& a, const Mpu& b) {
      return label_key(a) < label_key(b);
    });
  }

  std::size_t num_types() const { return type_names_.size(); }
  const std::string& type_name(TypeId t) const { return type_names_.at(t); }
  const std::vector<std::string>& type_names() const { return type_names_; }

  std::optional<TypeId> find_type(std::string_view label) const {
    for (std::size_t i = 0; i < type_names_.size(); ++i)
      if (type_names_[i] == label) return static_cast<TypeId>(i);
    return std::nullopt;
  }

  /// Orders the pair so that the lexicographically smaller label comes first.
  Mpu canonical(TypeId a, TypeId b) const {
    if (type_names_.at(b) < type_names_.at(a)) std::swap(a, b);
    return Mpu{a, b};
  }

  /// MPUs sorted by label pair.
  const std::vector<Mpu>& mpus() const { return mpus_; }

  bool has_mpu(const Mpu& m) const {
    return std::find(mpus_.begin(), mpus_.end(), m) != mpus_.end();
  }

  std::optional<std::size_t> mpu_index(const Mpu& m) const {
    auto it = std::find(mpus_.begin(), mpus_.end(), m);
    if (it == mpus_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - mpus_.begin());
  }

  std::string mpu_name(const Mpu& m) const {
    return "(" + type_name(m.first) + "," + type_name(m.second) + ")";
  }

  /// True when every label is a single character, so paths render without
  /// delimiters.
  bool single_char_labels() const {
    return std::all_of(type_names_.begin(), type_names_.end(),
                       [](const std::string& s) { return s.size() == 1; });
  }

 private:
  std::pair<std::string, std::string> label_key(const Mpu& m) const {
    return {type_names_.at(m.first), type_names_.at(m.second)};
  }

  std::vector<std::string> type_names_;
  std::vector<Mpu> mpus_;
};

class HetGraph {
 public:
  HetGraph() = default;

  /// Validates and builds adjacency. Throws SchemaError on dangling
  /// endpoints, unknown types, inconsistent content dimensions or a graph
  /// with a single node type and a single relation type.
  HetGraph(std::vector<std::string> type_names, std::vector<TypeId> node_types,
           std::vector<Edge> edges, std::vector<std::vector<ContentSlot>> content = {})
      : type_names_(std::move(type_names)),
        node_types_(std::move(node_types)),
        edges_(std::move(edges)),
        content_(std::move(content)) {
    validate_schema();
    build_indices();
  }

  std::size_t num_nodes() const { return node_types_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_types() const { return type_names_.size(); }
  std::size_t num_relations() const { return num_relations_; }

  TypeId type_of(NodeId n) const { return node_types_.at(n); }
  const std::string& type_name(TypeId t) const { return type_names_.at(t); }
  const std::vector<std::string>& type_names() const { return type_names_; }
  const std::vector<TypeId>& node_types() const { return node_types_; }

  std::optional<TypeId> find_type(std::string_view label) const {
    for (std::size_t i = 0; i < type_names_.size(); ++i)
      if (type_names_[i] == label) return static_cast<TypeId>(i);
    return std::nullopt;
  }

  /// Distinct neighbors across all relations, ascending id.
  std::span<const NodeId> neighbors(NodeId n) const {
    return {adjacency_.data() + offsets_.at(n), adjacency_.data() + offsets_.at(n + 1)};
  }
  std::size_t degree(NodeId n) const { return offsets_.at(n + 1) - offsets_.at(n); }

  std::span<const NodeId> nodes_of_type(TypeId t) const { return by_type_.at(t); }
  std::span<const Edge> edges() const { return edges_; }

  std::span<const ContentSlot> content(NodeId n) const {
    if (content_.empty()) return {};
    return content_.at(n);
  }
  bool has_content() const { return !content_dims_.empty(); }
  std::size_t num_content_types() const { return content_dims_.size(); }
  /// Raw dimension of a content type.
  std::size_t content_dim(ContentTypeId c) const { return content_dims_.at(c); }
  const std::vector<std::size_t>& content_dims() const { return content_dims_; }

  const Schema& schema() const { return schema_; }

 private:
  void validate_schema() {
    const auto n = node_types_.size();
    for (NodeId v = 0; v < n; ++v) {
      if (node_types_[v] >= type_names_.size()) {
        std::ostringstream os;
        os << "node " << v << " has undeclared type id " << node_types_[v];
        throw SchemaError(os.str());
      }
    }
    for (std::size_t i = 0; i < type_names_.size(); ++i) {
      if (type_names_[i].empty()) throw SchemaError("empty type label");
      for (std::size_t j = 0; j < i; ++j)
        if (type_names_[i] == type_names_[j])
          throw SchemaError("duplicate type label '" + type_names_[i] + "'");
    }
    std::vector<RelationId> relations;
    for (const auto& e : edges_) {
      if (e.src >= n || e.dst >= n) {
        std::ostringstream os;
        os << "edge " << e.src << " -> " << e.dst << " references an undeclared node";
        throw SchemaError(os.str());
      }
      relations.push_back(e.relation);
    }
    std::sort(relations.begin(), relations.end());
    relations.erase(std::unique(relations.begin(), relations.end()), relations.end());
    num_relations_ = relations.size();
    if (type_names_.size() <= 1 && num_relations_ <= 1)
      throw SchemaError("graph is not heterogeneous: needs more than one node type or relation type");

    if (!content_.empty() && content_.size() != n)
      throw SchemaError("content table size does not match node count");
    for (NodeId v = 0; v < content_.size(); ++v) {
      for (const auto& slot : content_[v]) {
        if (slot.type >= content_dims_.size()) content_dims_.resize(slot.type + 1, 0);
        auto& dim = content_dims_[slot.type];
        if (slot.values.empty()) throw SchemaError("empty content vector");
        if (dim == 0) {
          dim = slot.values.size();
        } else if (dim != slot.values.size()) {
          std::ostringstream os;
          os << "content type " << slot.type << " has dimension " << dim << " but node " << v
             << " supplies " << slot.values.size();
          throw SchemaError(os.str());
        }
      }
    }
  }

  void build_indices() {
    const auto n = node_types_.size();
    std::vector<std::vector<NodeId>> adj(n);
    std::vector<std::vector<bool>> pair_seen(type_names_.size(),
                                             std::vector<bool>(type_names_.size(), false));
    for (const auto& e : edges_) {
      adj[e.src].push_back(e.dst);
      if (e.src != e.dst) adj[e.dst].push_back(e.src);
      pair_seen[node_types_[e.src]][node_types_[e.dst]] = true;
      pair_seen[node_types_[e.dst]][node_types_[e.src]] = true;
    }
    offsets_.assign(n + 1, 0);
    for (NodeId v = 0; v < n; ++v) {
      auto& a = adj[v];
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
      offsets_[v + 1] = offsets_[v] + a.size();
    }
    adjacency_.reserve(offsets_[n]);
    for (auto& a : adj) adjacency_.insert(adjacency_.end(), a.begin(), a.end());

    by_type_.assign(type_names_.size(), {});
    for (NodeId v = 0; v < n; ++v) by_type_[node_types_[v]].push_back(v);

    std::vector<Mpu> mpus;
    Schema probe(type_names_, {});
    for (TypeId a = 0; a < type_names_.size(); ++a)
      for (TypeId b = a; b < type_names_.size(); ++b)
        if (pair_seen[a][b]) mpus.push_back(probe.canonical(a, b));
    schema_ = Schema(type_names_, std::move(mpus));
  }

  std::vector<std::string> type_names_;
  std::vector<TypeId> node_types_;
  std::vector<Edge> edges_;
  std::vector<std::vector<ContentSlot>> content_;
  std::vector<std::size_t> content_dims_;
  std::size_t num_relations_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
  std::vector<std::vector<NodeId>> by_type_;
  Schema schema_;
};

/// One MPU per unordered type pair connected by at least one edge, sorted by
/// label pair.
inline std::vector<Mpu> enumerate_mpus(const HetGraph& g) { return g.schema().mpus(); }

/// Nodes of the two MPU types and the edges between them. Node ids are the
/// parent graph's ids; adjacency is only populated for member nodes.
class MpuSubgraph {
 public:
  MpuSubgraph() = default;
  MpuSubgraph(Mpu mpu, std::size_t parent_nodes, std::vector<NodeId> members, std::vector<Edge> edges)
      : mpu_(mpu), members_(std::move(members)), edges_(std::move(edges)) {
    std::vector<std::vector<NodeId>> adj(parent_nodes);
    for (const auto& e : edges_) {
      adj[e.src].push_back(e.dst);
      if (e.src != e.dst) adj[e.dst].push_back(e.src);
    }
    offsets_.assign(parent_nodes + 1, 0);
    for (std::size_t v = 0; v < parent_nodes; ++v) {
      auto& a = adj[v];
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
      offsets_[v + 1] = offsets_[v] + a.size();
    }
    adjacency_.reserve(offsets_[parent_nodes]);
    for (auto& a : adj) adjacency_.insert(adjacency_.end(), a.begin(), a.end());
    is_member_.assign(parent_nodes, false);
    for (auto v : members_) is_member_[v] = true;
  }

  const Mpu& mpu() const { return mpu_; }
  /// Member node ids, ascending.
  std::span<const NodeId> nodes() const { return members_; }
  std::span<const Edge> edges() const { return edges_; }
  std::size_t num_nodes() const { return members_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t parent_size() const { return is_member_.size(); }
  bool contains(NodeId v) const { return v < is_member_.size() && is_member_[v]; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_.at(v), adjacency_.data() + offsets_.at(v + 1)};
  }
  std::size_t degree(NodeId v) const { return offsets_.at(v + 1) - offsets_.at(v); }

 private:
  Mpu mpu_;
  std::vector<NodeId> members_;
  std::vector<Edge> edges_;
  std::vector<bool> is_member_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
};

inline MpuSubgraph induce_mpu_subgraph(const HetGraph& g, const Mpu& u) {
  if (!g.schema().has_mpu(u)) {
    const auto name = u.first < g.num_types() && u.second < g.num_types()
                          ? g.schema().mpu_name(u)
                          : std::string("(?)");
    throw SchemaError("MPU " + name + " is not present in the graph");
  }
  std::vector<NodeId> members;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (u.contains(g.type_of(v))) members.push_back(v);
  std::vector<Edge> edges;
  for (const auto& e : g.edges())
    if (g.schema().canonical(g.type_of(e.src), g.type_of(e.dst)) == u) edges.push_back(e);
  return MpuSubgraph(u, g.num_nodes(), std::move(members), std::move(edges));
}

/// A meta-path step: the MPU plus the direction it is traversed in.
struct PathUnit {
  Mpu mpu;
  TypeId source = 0;
  TypeId target = 0;
};

class MetaPath {
 public:
  MetaPath() = default;
  MetaPath(std::vector<TypeId> types, std::vector<PathUnit> units, std::string text)
      : types_(std::move(types)), units_(std::move(units)), text_(std::move(text)) {}

  const std::vector<TypeId>& types() const { return types_; }
  const std::vector<PathUnit>& units() const { return units_; }
  TypeId anchor_type() const { return types_.front(); }
  TypeId end_type() const { return types_.back(); }
  const std::string& text() const { return text_; }

  /// Reads the same forwards and backwards with an odd number of types
  /// (e.g. MAM, AMDMA).
  bool symmetric() const {
    return types_.size() >= 3 && types_.size() % 2 == 1 &&
           std::equal(types_.begin(), types_.end(), types_.rbegin());
  }

  /// Units that take part in cascaded integration: the first half for
  /// symmetric paths, all units otherwise.
  std::span<const PathUnit> integration_units() const {
    if (symmetric()) return {units_.data(), (types_.size() - 1) / 2};
    return units_;
  }

  friend bool operator==(const MetaPath& a, const MetaPath& b) { return a.types_ == b.types_; }

 private:
  std::vector<TypeId> types_;
  std::vector<PathUnit> units_;
  std::string text_;
};

inline std::string render_meta_path(const Schema& schema, std::span<const TypeId> types) {
  const bool compact = schema.single_char_labels();
  std::string out;
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (i > 0 && !compact) out += '-';
    out += schema.type_name(types[i]);
  }
  return out;
}

/// Parses "MAM" (single-letter labels) or "M-A-M" (any labels).
inline MetaPath parse_meta_path(std::string_view text, const Schema& schema) {
  std::vector<std::string> tokens;
  if (text.find('-') != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      const auto pos = text.find('-', start);
      tokens.emplace_back(text.substr(start, pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  } else {
    for (char c : text) tokens.emplace_back(1, c);
  }
  if (tokens.size() < 2)
    throw ParseError("meta-path '" + std::string(text) + "' needs at least two node types");

  std::vector<TypeId> types;
  for (const auto& tok : tokens) {
    auto t = schema.find_type(tok);
    if (!t) throw ParseError("unknown node type '" + tok + "' in meta-path '" + std::string(text) + "'");
    types.push_back(*t);
  }
  std::vector<PathUnit> units;
  for (std::size_t i = 0; i + 1 < types.size(); ++i) {
    const Mpu m = schema.canonical(types[i], types[i + 1]);
    if (!schema.has_mpu(m))
      throw ConnectivityError("no edges connect " + schema.type_name(types[i]) + " and " +
                              schema.type_name(types[i + 1]) + " in meta-path '" + std::string(text) + "'");
    units.push_back(PathUnit{m, types[i], types[i + 1]});
  }
  auto rendered = render_meta_path(schema, types);
  return MetaPath(std::move(types), std::move(units), std::move(rendered));
}

inline MetaPath parse_meta_path(std::string_view text, const HetGraph& g) {
  return parse_meta_path(text, g.schema());
}

/// The reverse traversal of a path (AMD -> DMA).
inline MetaPath reversed(const MetaPath& p, const Schema& schema) {
  std::vector<TypeId> types(p.types().rbegin(), p.types().rend());
  return parse_meta_path(render_meta_path(schema, types), schema);
}

enum class IntegrationMode { kCascaded, kCumulative };

struct QueryPlan {
  IntegrationMode mode = IntegrationMode::kCascaded;
  std::vector<MetaPath> paths;
  TypeId anchor_type = 0;

  static QueryPlan make(IntegrationMode mode, std::vector<MetaPath> paths) {
    if (paths.empty()) throw QueryError("query plan needs at least one meta-path");
    if (mode == IntegrationMode::kCascaded && paths.size() != 1)
      throw QueryError("cascaded integration takes exactly one meta-path");
    const TypeId anchor = paths.front().anchor_type();
    for (const auto& p : paths)
      if (p.anchor_type() != anchor)
        throw QueryError("meta-path '" + p.text() + "' does not start with the anchor type");
    return QueryPlan{mode, std::move(paths), anchor};
  }
};

inline std::optional<IntegrationMode> parse_mode(std::string_view s) {
  if (s == "cascaded") return IntegrationMode::kCascaded;
  if (s == "cumulative") return IntegrationMode::kCumulative;
  return std::nullopt;
}

}  // namespace hetembed
