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

// Negative-sampling training of the encoder and freezing of per-MPU
// embeddings.
//
// Loss per triple <a, b, b'>:
//   -[log σ(Zi_a · Zi_b) + log σ(-Zi_a · Zi_b')]
// averaged over a batch. Batches cycle over MPUs round-robin so every unit
// trains each epoch. Early stopping watches the loss on a held-out slice of
// each MPU's triples; the best parameters are restored before freezing.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hetembed/autodiff.hpp"
#include "hetembed/common.hpp"
#include "hetembed/encoder.hpp"
#include "hetembed/hetgraph.hpp"
#include "hetembed/log.hpp"
#include "hetembed/rng.hpp"
#include "hetembed/sampler.hpp"
#include "hetembed/semantics.hpp"
#include "hetembed/store.hpp"

namespace hetembed {

struct TrainConfig {
  ModelConfig model;
  double learning_rate = 0.01;
  std::size_t max_epochs = 200;
  std::size_t patience = 20;
  std::size_t batch_size = 512;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double validation_fraction = 0.05;
  std::uint64_t seed = 0;

  void validate() const {
    model.validate();
    if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (patience < 1 || patience > max_epochs) throw ConfigError("patience must lie in [1, max_epochs]");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(adam_beta1 > 0 && adam_beta1 < 1 && adam_beta2 > 0 && adam_beta2 < 1))
      throw ConfigError("Adam betas must lie in (0, 1)");
    if (!(adam_eps > 0)) throw ConfigError("adam_eps must be > 0");
    if (!(validation_fraction >= 0 && validation_fraction < 1))
      throw ConfigError("validation_fraction must lie in [0, 1)");
  }
};

/// Canonical `key = value` rendering of a run's numeric configuration. The
/// config hash is taken over this text.
inline std::string canonical_config(const TrainConfig& t, const WalkConfig& w) {
  std::ostringstream os;
  os.precision(17);
  os << "adam_beta1 = " << t.adam_beta1 << '\n'
     << "adam_beta2 = " << t.adam_beta2 << '\n'
     << "adam_eps = " << t.adam_eps << '\n'
     << "batch_size = " << t.batch_size << '\n'
     << "dim = " << t.model.dim << '\n'
     << "freeze_projection = " << t.model.freeze_projection << '\n'
     << "inter_attention = " << t.model.inter_attention << '\n'
     << "intra_attention = " << t.model.intra_attention << '\n'
     << "k = " << w.default_k << '\n';
  for (const auto& [type, k] : w.k_per_type) os << "k." << type << " = " << k << '\n';
  os << "leaky_slope = " << t.model.leaky_slope << '\n'
     << "learning_rate = " << t.learning_rate << '\n'
     << "max_epochs = " << t.max_epochs << '\n'
     << "negatives = " << w.negatives << '\n'
     << "patience = " << t.patience << '\n'
     << "restart_prob = " << w.restart_prob << '\n'
     << "seed = " << t.seed << '\n'
     << "validation_fraction = " << t.validation_fraction << '\n'
     << "walk_length = " << w.walk_length << '\n'
     << "walk_seed = " << w.seed << '\n'
     << "walks_per_node = " << w.walks_per_node << '\n'
     << "window = " << w.window << '\n';
  return os.str();
}

inline std::uint64_t config_hash(const TrainConfig& t, const WalkConfig& w) {
  return fnv1a64(canonical_config(t, w));
}

/// Process-wide count of optimizer updates applied to any parameter set.
inline std::atomic<std::uint64_t>& parameter_update_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

struct AdamState {
  std::vector<ad::Tensor> m;
  std::vector<ad::Tensor> v;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update. Frozen parameters are skipped.
inline void adam_step(std::span<ad::Parameter* const> params, AdamState& state, double lr, double beta1 = 0.9,
                      double beta2 = 0.999, double eps = 1e-8) {
  if (state.m.empty()) {
    for (auto* p : params) {
      state.m.emplace_back(p->value.shape());
      state.v.emplace_back(p->value.shape());
    }
  }
  if (state.m.size() != params.size()) throw DimensionError("adam_step: parameter count changed");
  ++state.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    if (p.frozen) continue;
    if (p.grad.shape() != p.value.shape()) throw DimensionError("adam_step: gradient shape mismatch for " + p.name);
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < p.value.numel(); ++k) {
      const double g = p.grad[k];
      m[k] = beta1 * m[k] + (1.0 - beta1) * g;
      v[k] = beta2 * v[k] + (1.0 - beta2) * g * g;
      p.value[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
    }
  }
  parameter_update_counter().fetch_add(1, std::memory_order_relaxed);
}

/// -[log σ(pos) + log σ(-neg)] for one triple's dot products.
inline double triple_loss(double pos_dot, double neg_dot) {
  return -(ad::log_sigmoid_value(pos_dot) + ad::log_sigmoid_value(-neg_dot));
}

/// Mean negative-sampling loss of a batch of triples from one MPU.
inline ad::Var batch_loss(Encoder& enc, std::size_t mpu, const NeighborTable& table, std::span<const Triple> batch) {
  if (batch.empty()) throw TrainingError("empty batch");
  std::vector<NodeId> nodes;
  nodes.reserve(batch.size() * 3);
  for (const auto& t : batch) {
    nodes.push_back(t.center);
    nodes.push_back(t.context);
    nodes.push_back(t.negative);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::unordered_map<NodeId, std::size_t> pos;
  std::vector<ad::Var> rows;
  rows.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    pos.emplace(nodes[i], i);
    rows.push_back(enc.embed(mpu, table, nodes[i]).embedding);
  }
  const auto z = ad::stack_rows(rows);
  std::vector<std::size_t> ia, ib, in;
  for (const auto& t : batch) {
    ia.push_back(pos.at(t.center));
    ib.push_back(pos.at(t.context));
    in.push_back(pos.at(t.negative));
  }
  const auto za = ad::gather_rows(z, std::move(ia));
  const auto pos_dot = ad::rowwise_dot(za, ad::gather_rows(z, std::move(ib)));
  const auto neg_dot = ad::rowwise_dot(za, ad::gather_rows(z, std::move(in)));
  const auto ll = ad::add(ad::log_sigmoid(pos_dot), ad::log_sigmoid(ad::neg(neg_dot)));
  return ad::neg(ad::mean(ll));
}

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

/// Sampled data for every MPU of a graph, in schema order.
struct SampledGraph {
  std::vector<MpuSample> mpus;
};

inline SampledGraph sample_graph(const HetGraph& g, const WalkConfig& cfg) {
  SampledGraph s;
  for (const auto& m : enumerate_mpus(g)) s.mpus.push_back(sample_mpu(g, m, cfg));
  return s;
}

/// Zi of every member node of every MPU plus per-node β, as a frozen store.
inline EmbeddingStore freeze(Model& model, const HetGraph& g, const SampledGraph& sampled) {
  ad::Tape tape(false);
  Encoder enc(model, g, tape);
  const auto d = model.dim();
  const auto n = g.num_nodes();
  std::vector<EmbeddingStore::MpuBlock> blocks;
  std::size_t empty = 0;
  for (std::size_t m = 0; m < sampled.mpus.size(); ++m) {
    const auto& s = sampled.mpus[m];
    EmbeddingStore::MpuBlock b;
    b.mpu = s.mpu;
    b.zi = ad::Tensor({n, d});
    b.beta.assign(n, 0.0);
    b.table = s.table;
    const auto mi = model.mpu_index(s.mpu);
    for (NodeId v = 0; v < n; ++v) {
      if (!s.mpu.contains(g.type_of(v))) continue;
      if (s.table.merged(v).empty()) ++empty;
      const auto zi = enc.embed(mi, s.table, v).embedding.value();
      std::copy(zi.values().begin(), zi.values().end(), b.zi.row(v).begin());
    }
    blocks.push_back(std::move(b));
  }
  if (empty > 0) log::warn(empty, " (MPU, node) pair(s) have no sampled neighbors; their embeddings are zero");

  const auto& q = model.inter_attention().value;
  for (NodeId v = 0; v < n; ++v) {
    std::vector<std::size_t> mine;
    std::vector<std::span<const double>> rows;
    for (std::size_t m = 0; m < blocks.size(); ++m) {
      if (!blocks[m].mpu.contains(g.type_of(v))) continue;
      mine.push_back(m);
      rows.push_back(blocks[m].zi.row(v));
    }
    if (mine.empty()) continue;
    const auto beta = inter_mpu_weights(rows, q.values(), model.config().leaky_slope, model.config().inter_attention);
    for (std::size_t i = 0; i < mine.size(); ++i) blocks[mine[i]].beta[v] = beta[i];
  }
  return EmbeddingStore(g.schema(), g.node_types(), d, q, std::move(blocks));
}

struct TrainingRun {
  Model model;
  SampledGraph sampled;
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
  EmbeddingStore store;
  std::uint64_t config_hash = 0;
  double seconds = 0.0;
};

namespace trainer_detail {

struct Split {
  std::vector<Triple> train;
  std::vector<Triple> validation;
};

inline Split split_triples(const TripleSet& set, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(set.triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed, {mpu_stream(set.mpu), 0x73706C6974ULL});
  rng.shuffle(order);
  auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(order.size())));
  if (fraction > 0 && held == 0 && order.size() >= 2) held = 1;
  Split s;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < held ? s.validation : s.train).push_back(set.triples[order[i]]);
  return s;
}

inline double max_abs_grad(Model& model) {
  double mx = 0.0;
  for (auto* p : model.parameters())
    for (double g : p->grad.values()) mx = std::max(mx, std::abs(g));
  return mx;
}

}  // namespace trainer_detail

/// Mean loss over a set of triples per MPU, without recording gradients.
inline double evaluate_loss(Model& model, const HetGraph& g, const SampledGraph& sampled,
                            const std::vector<std::vector<Triple>>& triples) {
  ad::Tape tape(false);
  Encoder enc(model, g, tape);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t m = 0; m < sampled.mpus.size(); ++m) {
    if (triples[m].empty()) continue;
    const auto l = batch_loss(enc, model.mpu_index(sampled.mpus[m].mpu), sampled.mpus[m].table, triples[m]);
    total += l.item() * static_cast<double>(triples[m].size());
    count += triples[m].size();
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

inline TrainingRun train(const HetGraph& g, const TrainConfig& cfg, const WalkConfig& walk_cfg,
                         SampledGraph sampled) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  TrainingRun run;
  run.config_hash = config_hash(cfg, walk_cfg);
  run.model = Model(g, cfg.model, cfg.seed);
  Model& model = run.model;

  const auto nm = sampled.mpus.size();
  std::vector<std::vector<Triple>> train_set(nm), val_set(nm);
  std::vector<std::size_t> mpu_ids(nm);
  for (std::size_t m = 0; m < nm; ++m) {
    auto split = trainer_detail::split_triples(sampled.mpus[m].triples, cfg.validation_fraction, cfg.seed);
    train_set[m] = std::move(split.train);
    val_set[m] = std::move(split.validation);
    mpu_ids[m] = model.mpu_index(sampled.mpus[m].mpu);
  }
  const bool have_validation =
      std::any_of(val_set.begin(), val_set.end(), [](const auto& v) { return !v.empty(); });

  auto params = model.parameters();
  AdamState adam;
  Model best = model;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t waited = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::vector<std::vector<Triple>> order = train_set;
    std::size_t max_batches = 0;
    for (std::size_t m = 0; m < nm; ++m) {
      Rng rng(cfg.seed, {0x65706F6368ULL, epoch, m});
      rng.shuffle(order[m]);
      max_batches = std::max(max_batches, (order[m].size() + cfg.batch_size - 1) / cfg.batch_size);
    }
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    std::size_t batch_no = 0;
    for (std::size_t bi = 0; bi < max_batches; ++bi) {
      for (std::size_t m = 0; m < nm; ++m) {
        const auto lo = bi * cfg.batch_size;
        if (lo >= order[m].size()) continue;
        const auto hi = std::min(order[m].size(), lo + cfg.batch_size);
        ++batch_no;
        model.zero_grad();
        ad::Tape tape;
        tape.set_checked(false);
        Encoder enc(model, g, tape);
        const auto loss = batch_loss(enc, mpu_ids[m], sampled.mpus[m].table,
                                     std::span<const Triple>(order[m].data() + lo, hi - lo));
        tape.backward(loss);
        if (!std::isfinite(loss.item())) {
          std::ostringstream os;
          os << "non-finite loss at epoch " << epoch << ", batch " << batch_no
             << ", max |grad| = " << trainer_detail::max_abs_grad(model);
          throw TrainingError(os.str());
        }
        adam_step(params, adam, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
        epoch_loss += loss.item() * static_cast<double>(hi - lo);
        seen += hi - lo;
      }
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = seen ? epoch_loss / static_cast<double>(seen) : 0.0;
    stats.validation_loss = have_validation ? evaluate_loss(model, g, sampled, val_set) : stats.train_loss;
    run.history.push_back(stats);
    log::info("epoch ", epoch, " train_loss ", stats.train_loss, " validation_loss ", stats.validation_loss);

    if (stats.validation_loss < best_loss) {
      best_loss = stats.validation_loss;
      best = model;
      run.best_epoch = epoch;
      waited = 0;
    } else if (++waited >= cfg.patience) {
      log::info("early stop after epoch ", epoch, " (best epoch ", run.best_epoch, ")");
      break;
    }
  }
  model = best;
  run.store = freeze(model, g, sampled);
  run.sampled = std::move(sampled);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

/// Samples every MPU, then trains.
inline TrainingRun train(const HetGraph& g, const TrainConfig& cfg, const WalkConfig& walk_cfg) {
  return train(g, cfg, walk_cfg, sample_graph(g, walk_cfg));
}

}  // namespace hetembed
