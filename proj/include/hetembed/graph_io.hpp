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

// Graph file formats.
//
// HGB-style directory:
//   node.dat       node_id \t name \t type_id [\t f,f,f[;f,f,...]]
//   link.dat       src \t dst \t relation_id [\t weight]
//   link.dat.test  optional, same layout, merged when present
//   schema.dat     optional sidecar, type_id \t label
// Multiple content slots per node are separated by ';'. Slot j of a node of
// type t gets its own content type, so dimensions only need to agree per
// (type, slot).
//
// Edge list:
//   #types A M D
//   #node <id> <label>           optional, declares isolated nodes
//   src_id src_label dst_id dst_label

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hetembed/common.hpp"
#include "hetembed/hetgraph.hpp"
#include "hetembed/log.hpp"

namespace hetembed {

enum class GraphFormat { kHgb, kEdgeList };

inline std::optional<GraphFormat> parse_graph_format(std::string_view s) {
  if (s == "hgb") return GraphFormat::kHgb;
  if (s == "edge-list" || s == "edgelist") return GraphFormat::kEdgeList;
  return std::nullopt;
}

struct LoadOptions {
  bool include_test_links = true;
};

namespace io_detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\n')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

template <typename T>
T parse_uint(std::string_view s, const std::string& where) {
  s = trim(s);
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError(where + ": expected a non-negative integer, got '" + std::string(s) + "'");
  return v;
}

inline double parse_double(std::string_view s, const std::string& where) {
  s = trim(s);
  // std::from_chars for double is unavailable on some standard libraries.
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw FormatError(where + ": expected a number, got '" + tmp + "'");
  return v;
}

inline std::string where(const std::filesystem::path& p, std::size_t line) {
  return p.filename().string() + ":" + std::to_string(line);
}

/// Checks that ids are exactly 0..N-1, each once.
inline void require_dense(const std::vector<NodeId>& ids, const std::string& file) {
  std::vector<bool> seen(ids.size(), false);
  for (auto id : ids) {
    if (id >= ids.size())
      throw FormatError(file + ": node ids must be dense 0..N-1 (found " + std::to_string(id) +
                        " with N = " + std::to_string(ids.size()) + ")");
    if (seen[id]) throw FormatError(file + ": duplicate node id " + std::to_string(id));
    seen[id] = true;
  }
}

inline void read_links(const std::filesystem::path& file, std::vector<Edge>& edges) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open " + file.string());
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() < 3)
      throw FormatError(where(file, lineno) + ": link lines need src, dst and relation columns");
    const auto w = where(file, lineno);
    edges.push_back(Edge{parse_uint<NodeId>(cols[0], w), parse_uint<NodeId>(cols[1], w),
                         parse_uint<RelationId>(cols[2], w)});
  }
}

}  // namespace io_detail

inline HetGraph load_hgb(const std::filesystem::path& dir, const LoadOptions& opts = {}) {
  using namespace io_detail;
  const auto node_file = dir / "node.dat";
  const auto link_file = dir / "link.dat";
  std::ifstream in(node_file);
  if (!in) throw FormatError("cannot open " + node_file.string());

  struct RawNode {
    NodeId id;
    TypeId type;
    std::vector<std::vector<double>> slots;
  };
  std::vector<RawNode> raw;
  std::string line_buf;
  std::size_t lineno = 0;
  TypeId max_type = 0;
  while (std::getline(in, line_buf)) {
    ++lineno;
    const auto line = trim(line_buf);
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    const auto w = where(node_file, lineno);
    if (cols.size() < 3) throw FormatError(w + ": node lines need id, name and type columns");
    RawNode node{parse_uint<NodeId>(cols[0], w), parse_uint<TypeId>(cols[2], w), {}};
    if (cols.size() >= 4 && !trim(cols[3]).empty()) {
      for (auto slot : split(trim(cols[3]), ';')) {
        std::vector<double> values;
        for (auto f : split(slot, ',')) values.push_back(parse_double(f, w));
        node.slots.push_back(std::move(values));
      }
    }
    max_type = std::max(max_type, node.type);
    raw.push_back(std::move(node));
  }

  std::vector<NodeId> ids;
  ids.reserve(raw.size());
  for (const auto& r : raw) ids.push_back(r.id);
  require_dense(ids, node_file.filename().string());

  // Labels: sidecar if present, otherwise the decimal type id.
  const std::size_t num_types = raw.empty() ? 0 : max_type + 1;
  std::vector<std::string> labels(num_types);
  const auto schema_file = dir / "schema.dat";
  if (std::filesystem::exists(schema_file)) {
    std::ifstream sin(schema_file);
    std::size_t sl = 0;
    std::string s;
    while (std::getline(sin, s)) {
      ++sl;
      const auto line = trim(s);
      if (line.empty() || line.front() == '#') continue;
      const auto cols = split_ws(line);
      if (cols.size() != 2) throw FormatError(where(schema_file, sl) + ": expected 'type_id label'");
      const auto t = parse_uint<TypeId>(cols[0], where(schema_file, sl));
      if (t >= labels.size()) labels.resize(t + 1);
      labels[t] = std::string(cols[1]);
    }
    for (std::size_t t = 0; t < labels.size(); ++t)
      if (labels[t].empty())
        throw SchemaError("schema.dat does not declare a label for type id " + std::to_string(t));
  } else {
    log::warn("no schema.dat in ", dir.string(), "; using type ids as labels");
    for (std::size_t t = 0; t < labels.size(); ++t) labels[t] = std::to_string(t);
  }

  std::vector<TypeId> node_types(raw.size());
  std::map<std::pair<TypeId, std::size_t>, ContentTypeId> content_ids;
  for (const auto& r : raw)
    for (std::size_t j = 0; j < r.slots.size(); ++j) content_ids.emplace(std::pair{r.type, j}, 0);
  ContentTypeId next = 0;
  for (auto& [key, id] : content_ids) id = next++;

  std::vector<std::vector<ContentSlot>> content;
  if (!content_ids.empty()) content.resize(raw.size());
  for (auto& r : raw) {
    node_types[r.id] = r.type;
    for (std::size_t j = 0; j < r.slots.size(); ++j)
      content[r.id].push_back(ContentSlot{content_ids.at({r.type, j}), std::move(r.slots[j])});
  }

  std::vector<Edge> edges;
  read_links(link_file, edges);
  const auto test_file = dir / "link.dat.test";
  if (opts.include_test_links && std::filesystem::exists(test_file)) read_links(test_file, edges);
  if (edges.empty()) log::warn("graph in ", dir.string(), " has no edges");

  HetGraph g(std::move(labels), std::move(node_types), std::move(edges), std::move(content));
  log::info("loaded ", g.num_nodes(), " nodes, ", g.num_edges(), " edges from ", dir.string());
  return g;
}

inline HetGraph load_edge_list(const std::filesystem::path& file) {
  using namespace io_detail;
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open " + file.string());
  std::vector<std::string> labels;
  std::map<NodeId, TypeId> node_type;
  std::vector<std::pair<NodeId, NodeId>> pairs;
  bool have_header = false;

  auto type_id = [&](std::string_view label, const std::string& w) -> TypeId {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return static_cast<TypeId>(i);
    throw SchemaError(w + ": unknown type label '" + std::string(label) + "'");
  };
  auto declare = [&](NodeId id, TypeId t, const std::string& w) {
    auto [it, inserted] = node_type.emplace(id, t);
    if (!inserted && it->second != t)
      throw SchemaError(w + ": node " + std::to_string(id) + " declared with two types");
  };

  std::string buf;
  std::size_t lineno = 0;
  while (std::getline(in, buf)) {
    ++lineno;
    const auto line = trim(buf);
    if (line.empty()) continue;
    const auto w = where(file, lineno);
    const auto cols = split_ws(line);
    if (cols.front() == "#types") {
      if (have_header) throw FormatError(w + ": duplicate #types header");
      have_header = true;
      for (std::size_t i = 1; i < cols.size(); ++i) {
        if (std::find(labels.begin(), labels.end(), cols[i]) != labels.end())
          throw SchemaError(w + ": duplicate type label '" + std::string(cols[i]) + "'");
        labels.emplace_back(cols[i]);
      }
      continue;
    }
    if (cols.front() == "#node") {
      if (!have_header) throw FormatError(w + ": #types header must come first");
      if (cols.size() != 3) throw FormatError(w + ": expected '#node <id> <label>'");
      declare(parse_uint<NodeId>(cols[1], w), type_id(cols[2], w), w);
      continue;
    }
    if (cols.front().front() == '#') continue;
    if (!have_header) throw FormatError(w + ": #types header must come first");
    if (cols.size() != 4) throw FormatError(w + ": expected 'src_id src_type dst_id dst_type'");
    const auto s = parse_uint<NodeId>(cols[0], w);
    const auto d = parse_uint<NodeId>(cols[2], w);
    declare(s, type_id(cols[1], w), w);
    declare(d, type_id(cols[3], w), w);
    pairs.emplace_back(s, d);
  }
  if (!have_header) throw FormatError(file.string() + ": missing #types header");

  std::vector<NodeId> ids;
  for (const auto& [id, t] : node_type) ids.push_back(id);
  require_dense(ids, file.filename().string());
  std::vector<TypeId> types(node_type.size());
  for (const auto& [id, t] : node_type) types[id] = t;

  // Relation id derived from the canonical type pair.
  Schema probe(labels, {});
  const auto T = static_cast<RelationId>(labels.size());
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [s, d] : pairs) {
    const Mpu m = probe.canonical(types[s], types[d]);
    edges.push_back(Edge{s, d, m.first * T + m.second});
  }
  if (edges.empty()) log::warn("graph in ", file.string(), " has no edges");
  return HetGraph(std::move(labels), std::move(types), std::move(edges));
}

inline HetGraph load_graph(const std::filesystem::path& path, GraphFormat format,
                           const LoadOptions& opts = {}) {
  if (!std::filesystem::exists(path)) throw FormatError("no such file or directory: " + path.string());
  return format == GraphFormat::kHgb ? load_hgb(path, opts) : load_edge_list(path);
}

namespace io_detail {

inline void write_doubles(std::ostream& os, const std::vector<double>& v) {
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v[i]);
    os.write(buf, p - buf);
  }
}

}  // namespace io_detail

/// Writes node.dat, link.dat and schema.dat into `dir` (created if needed).
inline void write_hgb(const std::filesystem::path& dir, const HetGraph& g) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "node.dat", std::ios::binary);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      out << v << '\t' << g.type_name(g.type_of(v)) << v << '\t' << g.type_of(v);
      const auto slots = g.content(v);
      if (!slots.empty()) {
        out << '\t';
        for (std::size_t j = 0; j < slots.size(); ++j) {
          if (j) out << ';';
          io_detail::write_doubles(out, slots[j].values);
        }
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "link.dat", std::ios::binary);
    for (const auto& e : g.edges()) out << e.src << '\t' << e.dst << '\t' << e.relation << '\n';
  }
  {
    std::ofstream out(dir / "schema.dat", std::ios::binary);
    for (TypeId t = 0; t < g.num_types(); ++t) out << t << '\t' << g.type_name(t) << '\n';
  }
}

/// node_id \t label lines.
inline std::vector<std::pair<NodeId, int>> load_labels(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open " + file.string());
  std::vector<std::pair<NodeId, int>> out;
  std::string buf;
  std::size_t lineno = 0;
  while (std::getline(in, buf)) {
    ++lineno;
    const auto line = io_detail::trim(buf);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = io_detail::split_ws(line);
    const auto w = io_detail::where(file, lineno);
    if (cols.size() < 2) throw FormatError(w + ": expected 'node_id label'");
    out.emplace_back(io_detail::parse_uint<NodeId>(cols[0], w),
                     static_cast<int>(io_detail::parse_uint<unsigned>(cols[1], w)));
  }
  return out;
}

inline std::string summarize(const HetGraph& g) {
  std::ostringstream os;
  os << "nodes\t" << g.num_nodes() << "\nedges\t" << g.num_edges() << "\nrelations\t"
     << g.num_relations() << '\n';
  for (TypeId t = 0; t < g.num_types(); ++t)
    os << "type\t" << g.type_name(t) << '\t' << g.nodes_of_type(t).size() << '\n';
  for (const auto& m : enumerate_mpus(g)) os << "mpu\t" << g.schema().mpu_name(m) << '\n';
  return os.str();
}

}  // namespace hetembed
