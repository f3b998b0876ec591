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

// Frozen per-MPU embeddings plus everything needed to answer meta-path
// queries without the model: node types, neighbor tables, the inter-MPU
// attention vector and precomputed per-node MPU weights.

#include <atomic>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hetembed/autodiff.hpp"
#include "hetembed/common.hpp"
#include "hetembed/hetgraph.hpp"
#include "hetembed/sampler.hpp"

namespace hetembed {

class EmbeddingStore {
 public:
  struct MpuBlock {
    Mpu mpu;
    ad::Tensor zi;                  // {N, d}; rows of non-member nodes are zero
    std::vector<double> beta;       // per node, 0 for non-members
    NeighborTable table;
  };

  EmbeddingStore() = default;
  EmbeddingStore(Schema schema, std::vector<TypeId> node_types, std::size_t dim, ad::Tensor q,
                 std::vector<MpuBlock> blocks)
      : schema_(std::move(schema)),
        node_types_(std::move(node_types)),
        dim_(dim),
        q_(std::move(q)),
        blocks_(std::move(blocks)),
        reads_(std::make_unique<std::atomic<std::uint64_t>[]>(blocks_.size())) {
    by_type_.assign(schema_.num_types(), {});
    for (NodeId v = 0; v < node_types_.size(); ++v) by_type_.at(node_types_[v]).push_back(v);
    for (const auto& b : blocks_) {
      if (b.zi.rank() != 2 || b.zi.shape()[0] != node_types_.size() || b.zi.shape()[1] != dim_)
        throw DimensionError("embedding block has shape " + ad::shape_str(b.zi.shape()));
    }
    reset_access_counters();
  }

  EmbeddingStore(EmbeddingStore&&) noexcept = default;
  EmbeddingStore& operator=(EmbeddingStore&&) noexcept = default;

  const Schema& schema() const { return schema_; }
  std::size_t dim() const { return dim_; }
  std::size_t num_nodes() const { return node_types_.size(); }
  TypeId type_of(NodeId v) const { return node_types_.at(v); }
  const std::vector<TypeId>& node_types() const { return node_types_; }
  std::span<const NodeId> nodes_of_type(TypeId t) const { return by_type_.at(t); }
  const ad::Tensor& inter_attention() const { return q_; }

  std::size_t num_mpus() const { return blocks_.size(); }
  const Mpu& mpu(std::size_t m) const { return blocks_.at(m).mpu; }
  std::optional<std::size_t> find_mpu(const Mpu& u) const {
    for (std::size_t m = 0; m < blocks_.size(); ++m)
      if (blocks_[m].mpu == u) return m;
    return std::nullopt;
  }
  std::size_t require_mpu(const Mpu& u) const {
    auto m = find_mpu(u);
    if (!m) throw QueryError("MPU " + schema_.mpu_name(u) + " has no trained embeddings in the store");
    return *m;
  }

  /// Whether `v` has a Zi in MPU `m` (its type belongs to the unit).
  bool member(std::size_t m, NodeId v) const { return blocks_.at(m).mpu.contains(type_of(v)); }

  /// MPU indices whose types include `v`'s type.
  std::vector<std::size_t> mpus_of(NodeId v) const {
    std::vector<std::size_t> out;
    for (std::size_t m = 0; m < blocks_.size(); ++m)
      if (member(m, v)) out.push_back(m);
    return out;
  }

  /// Zi row of `v` in MPU `m`. Counted by the access instrumentation.
  std::span<const double> zi(std::size_t m, NodeId v) const {
    reads_[m].fetch_add(1, std::memory_order_relaxed);
    return blocks_.at(m).zi.row(v);
  }

  /// β of MPU `m` for node `v`. Counted by the access instrumentation.
  double beta(std::size_t m, NodeId v) const {
    reads_[m].fetch_add(1, std::memory_order_relaxed);
    return blocks_.at(m).beta.at(v);
  }

  const NeighborTable& table(std::size_t m) const { return blocks_.at(m).table; }
  const MpuBlock& block(std::size_t m) const { return blocks_.at(m); }

  std::uint64_t access_count(std::size_t m) const { return reads_[m].load(); }
  void reset_access_counters() const {
    for (std::size_t m = 0; m < blocks_.size(); ++m) reads_[m].store(0);
  }

 private:
  Schema schema_;
  std::vector<TypeId> node_types_;
  std::vector<std::vector<NodeId>> by_type_;
  std::size_t dim_ = 0;
  ad::Tensor q_;
  std::vector<MpuBlock> blocks_;
  std::unique_ptr<std::atomic<std::uint64_t>[]> reads_;
};

}  // namespace hetembed
