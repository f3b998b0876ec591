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

// Planted-community heterogeneous graphs for tests and demos.
//
// Types form a chain (t0 - t1 - ... - tn). Each type's nodes are split into
// contiguous, equally sized communities; an edge between adjacent-type nodes
// appears with probability p_in inside a community and p_out across.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "hetembed/common.hpp"
#include "hetembed/graph_io.hpp"
#include "hetembed/hetgraph.hpp"
#include "hetembed/rng.hpp"

namespace hetembed {

struct SyntheticConfig {
  std::vector<std::string> types{"A", "M"};
  std::vector<std::size_t> sizes{100, 100};
  std::size_t communities = 2;
  double p_in = 0.3;
  double p_out = 0.02;
  std::uint64_t seed = 0;

  void validate() const {
    if (types.size() < 2) throw ConfigError("synthetic graph needs at least 2 node types");
    if (sizes.size() != types.size()) throw ConfigError("one size per node type is required");
    if (communities < 1) throw ConfigError("communities must be >= 1");
    for (auto s : sizes)
      if (s < communities) throw ConfigError("every type needs at least one node per community");
    if (!(p_in >= 0 && p_in <= 1 && p_out >= 0 && p_out <= 1))
      throw ConfigError("edge probabilities must lie in [0, 1]");
  }
};

struct SyntheticGraph {
  HetGraph graph;
  std::vector<int> community;  // per node
};

inline SyntheticGraph generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  std::vector<TypeId> node_types;
  std::vector<int> community;
  std::vector<std::vector<NodeId>> by_type(cfg.types.size());
  for (TypeId t = 0; t < cfg.types.size(); ++t) {
    const auto n = cfg.sizes[t];
    for (std::size_t i = 0; i < n; ++i) {
      by_type[t].push_back(static_cast<NodeId>(node_types.size()));
      node_types.push_back(t);
      community.push_back(static_cast<int>(i * cfg.communities / n));
    }
  }
  Rng rng(cfg.seed, {fnv1a64("synthetic")});
  std::vector<Edge> edges;
  for (TypeId t = 0; t + 1 < cfg.types.size(); ++t) {
    for (NodeId u : by_type[t]) {
      for (NodeId v : by_type[t + 1]) {
        const double p = community[u] == community[v] ? cfg.p_in : cfg.p_out;
        if (rng.bernoulli(p)) edges.push_back({u, v, t});
      }
    }
  }
  SyntheticGraph out;
  out.graph = HetGraph(cfg.types, std::move(node_types), std::move(edges));
  out.community = std::move(community);
  return out;
}

/// Writes node.dat, link.dat, schema.dat, label.dat (community per node)
/// and counts.dat (the generator's own node and edge counts).
inline void write_synthetic(const std::filesystem::path& dir, const SyntheticGraph& s) {
  write_hgb(dir, s.graph);
  {
    std::ofstream out(dir / "label.dat", std::ios::binary);
    for (NodeId v = 0; v < s.community.size(); ++v) out << v << '\t' << s.community[v] << '\n';
  }
  std::ofstream out(dir / "counts.dat", std::ios::binary);
  out << "nodes\t" << s.graph.num_nodes() << "\nedges\t" << s.graph.num_edges() << '\n';
}

}  // namespace hetembed
