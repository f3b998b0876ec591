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

// Meta-path reconstruction from frozen MPU embeddings.
//
// Inter-MPU weights per node:
//   β^ψ_a = softmax over a's MPUs of LeakyReLU(q · Zi^ψ_a)
// Cascaded integration multiplies the weighted unit embeddings along the
// path elementwise; cumulative integration averages cascaded results over
// several paths. Symmetric paths (AMA, AMDMA) use their first half.
//
// Units after the first do not contain the anchor node, so their factor is
// relayed through bridge nodes: the top-k neighbors, of the type shared by
// consecutive units, reached from the previous step's bridges. The factor is
// the mean of β_b Zi_b over bridges b.
//
// Nothing here mutates the store.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hetembed/autodiff.hpp"
#include "hetembed/common.hpp"
#include "hetembed/hetgraph.hpp"
#include "hetembed/log.hpp"
#include "hetembed/store.hpp"

namespace hetembed {

using Vec = std::vector<double>;

/// Softmax of LeakyReLU(q · z) over the given embeddings. Uniform when
/// attention is disabled. Returns one weight per embedding.
inline Vec inter_mpu_weights(std::span<const std::span<const double>> zi, std::span<const double> q,
                             double slope, bool enabled = true) {
  if (zi.empty()) throw QueryError("inter-MPU attention over no MPUs");
  const auto n = zi.size();
  if (!enabled) return Vec(n, 1.0 / static_cast<double>(n));
  Vec logits(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (zi[i].size() != q.size()) throw DimensionError("inter-MPU attention: dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) s += q[k] * zi[i][k];
    logits[i] = s > 0 ? s : slope * s;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (auto& l : logits) z += (l = std::exp(l - mx));
  for (auto& l : logits) l /= z;
  return logits;
}

struct MpuWeights {
  std::vector<std::size_t> mpus;  // store indices
  Vec beta;
};

/// β for node `a` recomputed from the store's Zi and q.
inline MpuWeights inter_mpu_attention(const EmbeddingStore& store, NodeId a, double slope, bool enabled = true) {
  if (a >= store.num_nodes()) throw QueryError("node " + std::to_string(a) + " is not in the store");
  MpuWeights w;
  w.mpus = store.mpus_of(a);
  if (w.mpus.empty()) throw QueryError("node " + std::to_string(a) + " belongs to no MPU");
  std::vector<std::span<const double>> rows;
  for (auto m : w.mpus) rows.push_back(store.zi(m, a));
  w.beta = inter_mpu_weights(rows, store.inter_attention().values(), slope, enabled);
  return w;
}

namespace semantics_detail {

inline void axpy(double a, std::span<const double> x, Vec& y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

}  // namespace semantics_detail

/// Zw factors for every integration unit of `path`, starting at `a`.
inline std::vector<Vec> relay_chain(const EmbeddingStore& store, NodeId a, const MetaPath& path) {
  if (a >= store.num_nodes()) throw QueryError("node " + std::to_string(a) + " is not in the store");
  if (store.type_of(a) != path.anchor_type())
    throw QueryError("node " + std::to_string(a) + " is not of the path's anchor type");
  const auto units = path.integration_units();
  std::vector<std::size_t> idx;
  for (const auto& u : units) idx.push_back(store.require_mpu(u.mpu));

  std::vector<Vec> chain;
  std::vector<NodeId> bridges{a};
  for (std::size_t k = 0; k < units.size(); ++k) {
    const auto m = idx[k];
    if (k > 0) {
      const TypeId shared = units[k].source;
      const auto& prev_table = store.table(idx[k - 1]);
      std::vector<NodeId> next;
      for (auto b : bridges)
        for (const auto& nb : prev_table.neighbors(b, shared)) next.push_back(nb.id);
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      bridges = std::move(next);
    }
    Vec zw(store.dim(), 0.0);
    std::size_t used = 0;
    for (auto b : bridges) {
      if (!store.member(m, b)) continue;
      semantics_detail::axpy(store.beta(m, b), store.zi(m, b), zw);
      ++used;
    }
    if (used == 0) {
      log::warn("meta-path ", path.text(), ": no bridge nodes for unit ", k + 1, " from node ", a,
                "; factor is zero");
    } else if (used > 1) {
      for (auto& x : zw) x /= static_cast<double>(used);
    }
    chain.push_back(std::move(zw));
  }
  return chain;
}

/// Zw factor of unit `step` (1-based) of `path` for node `a`.
inline Vec relay_embedding(const EmbeddingStore& store, NodeId a, const MetaPath& path, std::size_t step) {
  if (step < 1 || step > path.integration_units().size())
    throw QueryError("relay step " + std::to_string(step) + " is outside the path");
  auto chain = relay_chain(store, a, path);
  return std::move(chain[step - 1]);
}

/// Elementwise product of a path's Zw chain.
inline Vec chain_product(const EmbeddingStore& store, NodeId a, const MetaPath& path) {
  auto chain = relay_chain(store, a, path);
  Vec z = std::move(chain.front());
  for (std::size_t k = 1; k < chain.size(); ++k)
    for (std::size_t i = 0; i < z.size(); ++i) z[i] *= chain[k][i];
  return z;
}

/// Z^φ_a for one anchor node under a plan.
inline Vec integrate(const EmbeddingStore& store, const QueryPlan& plan, NodeId a) {
  if (plan.paths.empty()) throw QueryError("empty query plan");
  if (plan.mode == IntegrationMode::kCascaded) {
    if (plan.paths.size() != 1) throw QueryError("cascaded integration takes exactly one meta-path");
    return chain_product(store, a, plan.paths.front());
  }
  Vec z(store.dim(), 0.0);
  for (const auto& p : plan.paths) {
    const auto term = chain_product(store, a, p);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += term[i];
  }
  const double inv = 1.0 / static_cast<double>(plan.paths.size());
  for (auto& x : z) x *= inv;
  return z;
}

/// Embeddings of every anchor-type node, ascending id.
struct MetaPathEmbedding {
  TypeId type = 0;
  std::vector<NodeId> nodes;
  ad::Tensor rows;  // {nodes.size(), d}

  std::span<const double> of(NodeId v) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), v);
    if (it == nodes.end() || *it != v) throw QueryError("node " + std::to_string(v) + " has no embedding");
    return rows.row(static_cast<std::size_t>(it - nodes.begin()));
  }
};

inline MetaPathEmbedding integrate_all(const EmbeddingStore& store, const QueryPlan& plan) {
  MetaPathEmbedding out;
  out.type = plan.anchor_type;
  const auto nodes = store.nodes_of_type(plan.anchor_type);
  out.nodes.assign(nodes.begin(), nodes.end());
  out.rows = ad::Tensor({out.nodes.size(), store.dim()});
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    const auto z = integrate(store, plan, out.nodes[i]);
    std::copy(z.begin(), z.end(), out.rows.row(i).begin());
  }
  return out;
}

inline MetaPathEmbedding cascaded_integrate(const EmbeddingStore& store, const QueryPlan& plan) {
  if (plan.mode != IntegrationMode::kCascaded) throw QueryError("plan is not cascaded");
  return integrate_all(store, plan);
}

inline MetaPathEmbedding cumulative_integrate(const EmbeddingStore& store, const QueryPlan& plan) {
  if (plan.mode != IntegrationMode::kCumulative) throw QueryError("plan is not cumulative");
  return integrate_all(store, plan);
}

/// Σ_ψ β^ψ_a Zi^ψ_a over all of a's MPUs.
inline Vec metapath_free_embedding(const EmbeddingStore& store, NodeId a) {
  if (a >= store.num_nodes()) throw QueryError("node " + std::to_string(a) + " is not in the store");
  const auto mpus = store.mpus_of(a);
  if (mpus.empty()) throw QueryError("node " + std::to_string(a) + " belongs to no MPU");
  Vec z(store.dim(), 0.0);
  for (auto m : mpus) semantics_detail::axpy(store.beta(m, a), store.zi(m, a), z);
  return z;
}

}  // namespace hetembed
