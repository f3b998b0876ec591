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

// MPU-restricted random walk with restart, top-k neighbor grouping and
// skip-gram triple generation.
//
// Every walk draws from its own stream keyed by (seed, MPU, start node, walk
// index), so the corpus is identical regardless of thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hetembed/common.hpp"
#include "hetembed/hetgraph.hpp"
#include "hetembed/log.hpp"
#include "hetembed/rng.hpp"

namespace hetembed {

struct WalkConfig {
  double restart_prob = 0.5;
  std::size_t walk_length = 30;
  std::size_t walks_per_node = 10;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t default_k = 10;
  std::map<TypeId, std::size_t> k_per_type;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::size_t k_for(TypeId t) const {
    auto it = k_per_type.find(t);
    return it == k_per_type.end() ? default_k : it->second;
  }

  void validate() const {
    if (!(restart_prob >= 0.0 && restart_prob < 1.0))
      throw ConfigError("restart probability must lie in [0, 1)");
    if (walk_length < 1) throw ConfigError("walk_length must be >= 1");
    if (window < 1) throw ConfigError("window must be >= 1");
    if (negatives < 1) throw ConfigError("negatives must be >= 1");
    if (walks_per_node < 1) throw ConfigError("walks_per_node must be >= 1");
    if (default_k < 1) throw ConfigError("k must be >= 1");
    for (const auto& [t, k] : k_per_type)
      if (k < 1) throw ConfigError("k must be >= 1 for every type");
  }
};

using Walk = std::vector<NodeId>;

/// Walks ordered by (start node, walk index); walk[0] is the start node.
struct WalkCorpus {
  std::vector<Walk> walks;

  bool empty() const { return walks.empty(); }
  friend bool operator==(const WalkCorpus&, const WalkCorpus&) = default;
};

/// Stream key separating the RNG streams of different MPUs.
inline std::uint64_t mpu_stream(const Mpu& m) {
  return (static_cast<std::uint64_t>(m.first) << 32) | m.second;
}

inline WalkCorpus run_rwr(const MpuSubgraph& sub, const WalkConfig& cfg) {
  cfg.validate();
  if (sub.num_nodes() == 0 || sub.num_edges() == 0)
    throw SamplingError("cannot walk an empty MPU subgraph");

  std::vector<NodeId> starts;
  std::size_t skipped = 0;
  for (auto v : sub.nodes()) {
    if (sub.degree(v) == 0) {
      ++skipped;
    } else {
      starts.push_back(v);
    }
  }
  if (skipped > 0)
    log::warn(skipped, " degree-0 node(s) skipped while walking MPU (", sub.mpu().first, ",",
              sub.mpu().second, ")");

  const auto stream = mpu_stream(sub.mpu());
  WalkCorpus corpus;
  corpus.walks.resize(starts.size() * cfg.walks_per_node);

  auto walk_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      const NodeId start = starts[s];
      for (std::size_t w = 0; w < cfg.walks_per_node; ++w) {
        Rng rng(cfg.seed, {stream, start, w});
        Walk& walk = corpus.walks[s * cfg.walks_per_node + w];
        walk.reserve(cfg.walk_length);
        walk.push_back(start);
        NodeId cur = start;
        while (walk.size() < cfg.walk_length) {
          if (rng.bernoulli(cfg.restart_prob)) {
            cur = start;
          } else {
            const auto nbrs = sub.neighbors(cur);
            cur = nbrs[rng.index(nbrs.size())];
          }
          walk.push_back(cur);
        }
      }
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, starts.size()));
  if (threads == 1) {
    walk_range(0, starts.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (starts.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const auto lo = std::min(starts.size(), t * chunk);
      const auto hi = std::min(starts.size(), lo + chunk);
      pool.emplace_back(walk_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return corpus;
}

/// One walk per line, space separated node ids.
inline void write_corpus(std::ostream& os, const WalkCorpus& corpus) {
  for (const auto& walk : corpus.walks) {
    for (std::size_t i = 0; i < walk.size(); ++i) {
      if (i) os << ' ';
      os << walk[i];
    }
    os << '\n';
  }
}

struct Neighbor {
  NodeId id = 0;
  std::uint64_t count = 0;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Orders by visit count descending, then id ascending.
inline bool by_frequency(const Neighbor& a, const Neighbor& b) {
  return a.count != b.count ? a.count > b.count : a.id < b.id;
}

/// Top-k RWR neighbors per (node, type) for one MPU.
class NeighborTable {
 public:
  NeighborTable() = default;
  NeighborTable(Mpu mpu, std::size_t parent_nodes) : mpu_(mpu), lists_(parent_nodes) {}

  const Mpu& mpu() const { return mpu_; }
  std::size_t size() const { return lists_.size(); }

  std::span<const Neighbor> neighbors(NodeId v, TypeId t) const {
    if (!mpu_.contains(t) || v >= lists_.size()) return {};
    return lists_[v][slot(t)];
  }

  void set(NodeId v, TypeId t, std::vector<Neighbor> list) {
    if (!mpu_.contains(t)) throw SamplingError("type is not part of this MPU");
    lists_.at(v)[slot(t)] = std::move(list);
  }

  /// Union of both per-type lists, most frequent first (ties by id).
  std::vector<Neighbor> merged(NodeId v) const {
    if (v >= lists_.size()) return {};
    std::vector<Neighbor> out(lists_[v][0].begin(), lists_[v][0].end());
    if (!mpu_.self_pair()) out.insert(out.end(), lists_[v][1].begin(), lists_[v][1].end());
    std::sort(out.begin(), out.end(), by_frequency);
    return out;
  }

  friend bool operator==(const NeighborTable&, const NeighborTable&) = default;

 private:
  std::size_t slot(TypeId t) const { return t == mpu_.first ? 0 : 1; }

  Mpu mpu_;
  std::vector<std::array<std::vector<Neighbor>, 2>> lists_;
};

/// For each start node, the k most visited nodes of each MPU type over that
/// node's walks. The start node itself is never listed.
inline NeighborTable build_neighbor_table(const WalkCorpus& corpus, const HetGraph& g, const Mpu& mpu,
                                          const WalkConfig& cfg) {
  NeighborTable table(mpu, g.num_nodes());
  std::map<NodeId, std::vector<NodeId>> visits;
  for (const auto& walk : corpus.walks) {
    if (walk.empty()) continue;
    auto& v = visits[walk.front()];
    for (auto n : walk)
      if (n != walk.front()) v.push_back(n);
  }
  for (auto& [start, seen] : visits) {
    std::sort(seen.begin(), seen.end());
    std::array<std::vector<Neighbor>, 2> per_type;
    for (std::size_t i = 0; i < seen.size();) {
      std::size_t j = i;
      while (j < seen.size() && seen[j] == seen[i]) ++j;
      const TypeId t = g.type_of(seen[i]);
      if (mpu.contains(t)) per_type[t == mpu.first ? 0 : 1].push_back(Neighbor{seen[i], j - i});
      i = j;
    }
    for (int s = 0; s < (mpu.self_pair() ? 1 : 2); ++s) {
      auto& list = per_type[s];
      const TypeId t = s == 0 ? mpu.first : mpu.second;
      std::sort(list.begin(), list.end(), by_frequency);
      if (list.size() > cfg.k_for(t)) list.resize(cfg.k_for(t));
      table.set(start, t, std::move(list));
    }
  }
  return table;
}

/// Draws node ids with probability proportional to count^0.75.
class UnigramSampler {
 public:
  UnigramSampler() = default;
  UnigramSampler(std::span<const NodeId> ids, std::span<const std::uint64_t> counts,
                 double power = 0.75) {
    double total = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (counts[i] == 0) continue;
      total += std::pow(static_cast<double>(counts[i]), power);
      ids_.push_back(ids[i]);
      cdf_.push_back(total);
    }
    for (auto& c : cdf_) c /= total;
  }

  std::size_t support() const { return ids_.size(); }

  NodeId draw(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return ids_[static_cast<std::size_t>(it - cdf_.begin())];
  }

  /// Probability of drawing `id` (0 when outside the support).
  double probability(NodeId id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i)
      if (ids_[i] == id) return cdf_[i] - (i == 0 ? 0.0 : cdf_[i - 1]);
    return 0.0;
  }

 private:
  std::vector<NodeId> ids_;
  std::vector<double> cdf_;
};

struct Triple {
  NodeId center = 0;
  NodeId context = 0;
  NodeId negative = 0;
  friend bool operator==(const Triple&, const Triple&) = default;
};

struct TripleSet {
  Mpu mpu;
  std::vector<Triple> triples;
  std::size_t positive_pairs = 0;
};

/// Skip-gram pairs within `window` positions plus `negatives` same-type
/// negatives per pair. Positions holding the same node as the center (e.g.
/// after a restart) do not form pairs.
inline TripleSet sample_triples(const WalkCorpus& corpus, const MpuSubgraph& sub, const HetGraph& g,
                                const WalkConfig& cfg) {
  cfg.validate();
  if (corpus.empty()) throw SamplingError("cannot sample triples from an empty corpus");
  const Mpu& mpu = sub.mpu();

  std::vector<std::uint64_t> counts(g.num_nodes(), 0);
  for (const auto& walk : corpus.walks)
    for (auto n : walk) ++counts[n];

  std::array<UnigramSampler, 2> samplers;
  for (int s = 0; s < (mpu.self_pair() ? 1 : 2); ++s) {
    const TypeId t = s == 0 ? mpu.first : mpu.second;
    const auto ids = g.nodes_of_type(t);
    std::vector<std::uint64_t> c;
    c.reserve(ids.size());
    for (auto v : ids) c.push_back(counts[v]);
    samplers[s] = UnigramSampler(ids, c);
  }
  auto sampler_for = [&](TypeId t) -> const UnigramSampler& {
    const auto& s = samplers[t == mpu.first ? 0 : 1];
    if (s.support() < 2)
      throw SamplingError("negative sampling impossible: type '" + g.type_name(t) +
                          "' has fewer than two sampled nodes in MPU " + g.schema().mpu_name(mpu));
    return s;
  };

  TripleSet out;
  out.mpu = mpu;
  const auto stream = mpu_stream(mpu);
  const auto window = static_cast<std::ptrdiff_t>(cfg.window);
  for (std::size_t w = 0; w < corpus.walks.size(); ++w) {
    const auto& walk = corpus.walks[w];
    Rng rng(cfg.seed, {stream, 0x6E6567ULL, w});
    const auto len = static_cast<std::ptrdiff_t>(walk.size());
    for (std::ptrdiff_t i = 0; i < len; ++i) {
      for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - window);
           j <= std::min(len - 1, i + window); ++j) {
        if (j == i || walk[j] == walk[i]) continue;
        const NodeId b = walk[j];
        const auto& sampler = sampler_for(g.type_of(b));
        ++out.positive_pairs;
        for (std::size_t k = 0; k < cfg.negatives; ++k) {
          NodeId neg = sampler.draw(rng);
          while (neg == b) neg = sampler.draw(rng);
          out.triples.push_back(Triple{walk[i], b, neg});
        }
      }
    }
  }
  return out;
}

/// Walks, neighbor table and triples for one MPU.
struct MpuSample {
  Mpu mpu;
  WalkCorpus corpus;
  NeighborTable table;
  TripleSet triples;
};

inline MpuSample sample_mpu(const HetGraph& g, const Mpu& mpu, const WalkConfig& cfg) {
  const auto sub = induce_mpu_subgraph(g, mpu);
  MpuSample s;
  s.mpu = mpu;
  s.corpus = run_rwr(sub, cfg);
  s.table = build_neighbor_table(s.corpus, g, mpu, cfg);
  s.triples = sample_triples(s.corpus, sub, g, cfg);
  return s;
}

}  // namespace hetembed
