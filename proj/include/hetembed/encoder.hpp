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

// Node content encoding and intra-MPU aggregation.
//
//   H_an = W_n C_an + b_n                      per content slot
//   Ĥ_a  = mean_n BiLSTM(H_a)_n                 content-level BiLSTM
//   Q_a  = mean_b BiLSTM(Ĥ_{N_a})_b             neighbor-level BiLSTM
//   α_ab = softmax_b LeakyReLU(u · [Q_a ; Q_b])
//   Zi_a = Σ_b α_ab Q_b
//
// Slots are fed in ascending content-type order and neighbors in descending
// RWR frequency (ties by id). A node without content uses its own learned
// vector as its only slot. Empty neighbor sets give Q_a = Ĥ_a and
// Zi_a = 0.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hetembed/autodiff.hpp"
#include "hetembed/common.hpp"
#include "hetembed/hetgraph.hpp"
#include "hetembed/init.hpp"
#include "hetembed/log.hpp"
#include "hetembed/lstm.hpp"
#include "hetembed/rng.hpp"
#include "hetembed/sampler.hpp"

namespace hetembed {

struct ModelConfig {
  std::size_t dim = 128;
  double leaky_slope = 0.01;
  bool intra_attention = true;
  bool inter_attention = true;
  /// Keeps the content projections at their initial values.
  bool freeze_projection = false;

  void validate() const {
    if (dim < 2 || dim % 2 != 0) throw ConfigError("embedding dimension must be even and >= 2");
    if (!(leaky_slope >= 0.0)) throw ConfigError("LeakyReLU slope must be >= 0");
  }
};

/// Affine map into the shared space for one content type.
struct Projection {
  ad::Parameter weight;  // {d, d_n}
  ad::Parameter bias;    // {d}
};

/// All trainable state. Parameter addresses stay fixed for the model's
/// lifetime, so tapes may bind them by pointer.
class Model {
 public:
  Model() = default;

  /// Builds and Xavier-initializes parameters for a graph's content types,
  /// node count and MPUs.
  Model(const HetGraph& g, ModelConfig cfg, std::uint64_t seed)
      : Model(g.content_dims(), g.num_nodes(), enumerate_mpus(g), std::move(cfg), seed) {}

  Model(const std::vector<std::size_t>& content_dims, std::size_t num_nodes, std::vector<Mpu> mpus,
        ModelConfig cfg, std::uint64_t seed)
      : config_(std::move(cfg)), mpus_(std::move(mpus)) {
    config_.validate();
    const auto d = config_.dim;
    Rng rng(seed, {0x696E6974ULL});
    projections_.resize(content_dims.size());
    for (std::size_t n = 0; n < content_dims.size(); ++n) {
      const auto dn = content_dims[n];
      auto& p = projections_[n];
      p.weight = ad::Parameter("proj" + std::to_string(n) + ".w", ad::xavier_uniform({d, dn}, dn, d, rng));
      p.bias = ad::Parameter("proj" + std::to_string(n) + ".b", ad::Tensor({d}));
      p.weight.frozen = p.bias.frozen = config_.freeze_projection;
    }
    node_embedding_ = ad::Parameter("node_embedding", ad::xavier_uniform({num_nodes, d}, num_nodes, d, rng));
    content_lstm_ = BiLstm("content_lstm", d, d / 2);
    content_lstm_.init_xavier(rng);
    neighbor_lstm_ = BiLstm("neighbor_lstm", d, d / 2);
    neighbor_lstm_.init_xavier(rng);
    intra_.reserve(mpus_.size());
    for (std::size_t m = 0; m < mpus_.size(); ++m)
      intra_.emplace_back("intra_attention" + std::to_string(m), ad::xavier_uniform({2 * d}, 2 * d, 1, rng));
    inter_ = ad::Parameter("inter_attention", ad::xavier_uniform({d}, d, 1, rng));
  }

  const ModelConfig& config() const { return config_; }
  ModelConfig& mutable_config() { return config_; }
  std::size_t dim() const { return config_.dim; }
  const std::vector<Mpu>& mpus() const { return mpus_; }

  std::size_t mpu_index(const Mpu& m) const {
    auto it = std::find(mpus_.begin(), mpus_.end(), m);
    if (it == mpus_.end()) throw SchemaError("MPU is not part of this model");
    return static_cast<std::size_t>(it - mpus_.begin());
  }

  Projection& projection(ContentTypeId n) {
    if (n >= projections_.size())
      throw ConfigError("no projection for content type " + std::to_string(n));
    return projections_[n];
  }
  std::size_t num_projections() const { return projections_.size(); }
  ad::Parameter& node_embedding() { return node_embedding_; }
  BiLstm& content_lstm() { return content_lstm_; }
  BiLstm& neighbor_lstm() { return neighbor_lstm_; }
  ad::Parameter& intra_attention(std::size_t mpu) { return intra_.at(mpu); }
  ad::Parameter& inter_attention() { return inter_; }
  const ad::Parameter& inter_attention() const { return inter_; }

  /// Every parameter in a fixed order (used by the optimizer and checkpoints).
  std::vector<ad::Parameter*> parameters() {
    std::vector<ad::Parameter*> out;
    for (auto& p : projections_) {
      out.push_back(&p.weight);
      out.push_back(&p.bias);
    }
    out.push_back(&node_embedding_);
    for (auto* p : content_lstm_.parameters()) out.push_back(p);
    for (auto* p : neighbor_lstm_.parameters()) out.push_back(p);
    for (auto& p : intra_) out.push_back(&p);
    out.push_back(&inter_);
    return out;
  }

  void zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
  }

 private:
  ModelConfig config_;
  std::vector<Mpu> mpus_;
  std::vector<Projection> projections_;
  ad::Parameter node_embedding_;
  BiLstm content_lstm_;
  BiLstm neighbor_lstm_;
  std::vector<ad::Parameter> intra_;
  ad::Parameter inter_;
};

/// H_an for every content slot of a node, ascending content type.
inline std::vector<ad::Var> project_content(ad::Tape& tape, std::span<const ContentSlot> slots, Model& model) {
  std::vector<const ContentSlot*> ordered;
  for (const auto& s : slots) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ContentSlot* a, const ContentSlot* b) { return a->type < b->type; });
  std::vector<ad::Var> out;
  for (const auto* s : ordered) {
    auto& proj = model.projection(s->type);
    const auto x = tape.constant(ad::Tensor::vector(s->values));
    out.push_back(ad::add(ad::matvec(tape.param(proj.weight), x), tape.param(proj.bias)));
  }
  return out;
}

/// Ĥ_a from projected slots.
inline ad::Var aggregate_content(std::span<const ad::Var> projected, BiLstm& lstm) {
  return bilstm_mean(projected, lstm);
}

/// Q_a from the content embeddings of a node's neighbors in sequence order.
inline ad::Var aggregate_neighbors(std::span<const ad::Var> neighbor_content, BiLstm& lstm) {
  return bilstm_mean(neighbor_content, lstm);
}

struct IntraAttention {
  ad::Var embedding;       // Zi_a
  ad::Tensor weights;      // α over the neighbor sequence
};

/// Zi_a = Σ_b α_ab Q_b. With attention disabled α is uniform.
inline IntraAttention intra_mpu_attention(const ad::Var& q_self, std::span<const ad::Var> q_neighbors,
                                          const ad::Var& u, double slope, bool enabled = true) {
  if (q_neighbors.empty()) throw DimensionError("intra_mpu_attention needs at least one neighbor");
  const auto n = q_neighbors.size();
  const auto qn = ad::stack_rows(q_neighbors);
  if (!enabled) {
    return {ad::mean_rows(qn), ad::Tensor({n}, 1.0 / static_cast<double>(n))};
  }
  std::vector<ad::Var> pairs;
  pairs.reserve(n);
  for (const auto& qb : q_neighbors) pairs.push_back(ad::concat({q_self, qb}));
  const auto logits = ad::leaky_relu(ad::matvec(ad::stack_rows(pairs), u), slope);
  const auto alpha = ad::softmax(logits);
  return {ad::vecmat(alpha, qn), alpha.value()};
}

/// Forward pass over one tape with per-node caches, so each Ĥ and Q is
/// built once per tape.
class Encoder {
 public:
  Encoder(Model& model, const HetGraph& g, ad::Tape& tape) : model_(model), graph_(g), tape_(tape) {}

  ad::Tape& tape() { return tape_; }
  Model& model() { return model_; }

  /// Ĥ_a.
  ad::Var content(NodeId v) {
    if (auto it = content_.find(v); it != content_.end()) return it->second;
    std::vector<ad::Var> slots = project_content(tape_, graph_.content(v), model_);
    if (slots.empty()) {
      if (!node_table_) node_table_ = tape_.param(model_.node_embedding());
      slots.push_back(ad::row(*node_table_, v));
    }
    auto h = aggregate_content(slots, model_.content_lstm());
    content_.emplace(v, h);
    return h;
  }

  /// Q_a within an MPU; falls back to Ĥ_a when the node has no neighbors.
  ad::Var neighbor_summary(std::size_t mpu, const NeighborTable& table, NodeId v) {
    const auto key = cache_key(mpu, v);
    if (auto it = summary_.find(key); it != summary_.end()) return it->second;
    const auto nbrs = table.merged(v);
    ad::Var q;
    if (nbrs.empty()) {
      q = content(v);
    } else {
      std::vector<ad::Var> seq;
      seq.reserve(nbrs.size());
      for (const auto& nb : nbrs) seq.push_back(content(nb.id));
      q = aggregate_neighbors(seq, model_.neighbor_lstm());
    }
    summary_.emplace(key, q);
    return q;
  }

  /// Zi_a plus the attention weights used to form it.
  IntraAttention embed(std::size_t mpu, const NeighborTable& table, NodeId v) {
    const auto key = cache_key(mpu, v);
    if (auto it = embedded_.find(key); it != embedded_.end()) return it->second;
    const auto nbrs = table.merged(v);
    IntraAttention out;
    if (nbrs.empty()) {
      log::debug("node ", v, " has no neighbors in MPU ", mpu, "; using a zero embedding");
      out.embedding = tape_.constant(ad::Tensor({model_.dim()}));
    } else {
      std::vector<ad::Var> qs;
      qs.reserve(nbrs.size());
      for (const auto& nb : nbrs) qs.push_back(neighbor_summary(mpu, table, nb.id));
      out = intra_mpu_attention(neighbor_summary(mpu, table, v), qs, u(mpu), model_.config().leaky_slope,
                                model_.config().intra_attention);
    }
    embedded_.emplace(key, out);
    return out;
  }

 private:
  static std::uint64_t cache_key(std::size_t mpu, NodeId v) {
    return (static_cast<std::uint64_t>(mpu) << 32) | v;
  }

  ad::Var u(std::size_t mpu) {
    if (auto it = u_.find(mpu); it != u_.end()) return it->second;
    auto var = tape_.param(model_.intra_attention(mpu));
    u_.emplace(mpu, var);
    return var;
  }

  Model& model_;
  const HetGraph& graph_;
  ad::Tape& tape_;
  std::optional<ad::Var> node_table_;
  std::unordered_map<NodeId, ad::Var> content_;
  std::unordered_map<std::uint64_t, ad::Var> summary_;
  std::unordered_map<std::uint64_t, IntraAttention> embedded_;
  std::map<std::size_t, ad::Var> u_;
};

}  // namespace hetembed
