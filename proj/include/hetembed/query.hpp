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

// Query serving over a frozen store: top-K retrieval, link-prediction and
// retrieval evaluation, and the retrain-vs-reconstruct benchmark.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hetembed/common.hpp"
#include "hetembed/hetgraph.hpp"
#include "hetembed/log.hpp"
#include "hetembed/metrics.hpp"
#include "hetembed/rng.hpp"
#include "hetembed/semantics.hpp"
#include "hetembed/store.hpp"
#include "hetembed/trainer.hpp"

namespace hetembed {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Cosine similarity; 0 when either vector is zero.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

/// Type reached at the end of every path in the plan.
inline TypeId target_type(const QueryPlan& plan) {
  if (plan.paths.empty()) throw QueryError("empty query plan");
  const auto t = plan.paths.front().end_type();
  for (const auto& p : plan.paths)
    if (p.end_type() != t) throw QueryError("meta-paths in a plan must end at the same node type");
  return t;
}

/// The same plan traversed from the target side.
inline QueryPlan reversed(const QueryPlan& plan, const Schema& schema) {
  std::vector<MetaPath> paths;
  for (const auto& p : plan.paths) paths.push_back(reversed(p, schema));
  return QueryPlan::make(plan.mode, std::move(paths));
}

/// Anchor-side and target-side embeddings of a plan. For plans whose paths
/// are all symmetric both sides share one table.
struct PlanEmbeddings {
  MetaPathEmbedding anchor;
  MetaPathEmbedding target;
};

inline PlanEmbeddings embed_plan(const EmbeddingStore& store, const QueryPlan& plan) {
  PlanEmbeddings e;
  e.anchor = integrate_all(store, plan);
  const auto back = reversed(plan, store.schema());
  bool same = true;
  for (std::size_t i = 0; i < plan.paths.size(); ++i) same = same && back.paths[i] == plan.paths[i];
  e.target = same ? e.anchor : integrate_all(store, back);
  return e;
}

struct ScoredNode {
  NodeId id = 0;
  double score = 0.0;
  friend bool operator==(const ScoredNode&, const ScoredNode&) = default;
};

struct RankedResult {
  NodeId query = 0;
  std::size_t k = 0;
  std::vector<ScoredNode> items;
};

/// Orders by score descending, then id ascending; keeps the first k.
inline std::vector<ScoredNode> rank_top(std::vector<ScoredNode> all, std::size_t k) {
  const auto n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    [](const ScoredNode& a, const ScoredNode& b) {
                      return a.score != b.score ? a.score > b.score : a.id < b.id;
                    });
  all.resize(n);
  return all;
}

/// Top-K target-type nodes by cosine similarity to the query under a plan.
inline RankedResult topk(const PlanEmbeddings& emb, NodeId a, long long k) {
  if (k <= 0) throw QueryError("K must be positive, got " + std::to_string(k));
  const auto za = emb.anchor.of(a);
  if (std::all_of(za.begin(), za.end(), [](double x) { return x == 0.0; }))
    log::warn("query node ", a, " has a zero embedding; ranking falls back to id order");
  std::vector<ScoredNode> all;
  all.reserve(emb.target.nodes.size());
  for (std::size_t i = 0; i < emb.target.nodes.size(); ++i) {
    const auto c = emb.target.nodes[i];
    if (c == a) continue;
    all.push_back({c, cosine(za, emb.target.rows.row(i))});
  }
  RankedResult r;
  r.query = a;
  r.k = static_cast<std::size_t>(k);
  r.items = rank_top(std::move(all), r.k);
  return r;
}

inline RankedResult topk(const EmbeddingStore& store, const QueryPlan& plan, NodeId a, long long k) {
  if (k <= 0) throw QueryError("K must be positive, got " + std::to_string(k));
  if (a >= store.num_nodes()) throw QueryError("node " + std::to_string(a) + " is not in the store");
  if (store.type_of(a) != plan.anchor_type)
    throw QueryError("node " + std::to_string(a) + " is not of the meta-path's anchor type");
  for (const auto& p : plan.paths)
    for (const auto& u : p.units()) store.require_mpu(u.mpu);
  return topk(embed_plan(store, plan), a, k);
}

/// For every anchor-type node, the set of nodes reachable along one
/// instance of the path (the node itself excluded).
inline std::vector<std::vector<NodeId>> path_neighbors(const HetGraph& g, const MetaPath& path) {
  const auto n = g.num_nodes();
  std::vector<std::vector<NodeId>> out(n);
  std::vector<std::uint32_t> mark(n, 0);
  std::uint32_t stamp = 0;
  for (NodeId a : g.nodes_of_type(path.anchor_type())) {
    std::vector<NodeId> frontier{a};
    for (std::size_t step = 1; step < path.types().size(); ++step) {
      ++stamp;
      std::vector<NodeId> next;
      for (NodeId u : frontier)
        for (NodeId w : g.neighbors(u))
          if (g.type_of(w) == path.types()[step] && mark[w] != stamp) {
            mark[w] = stamp;
            next.push_back(w);
          }
      frontier = std::move(next);
    }
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::remove(frontier.begin(), frontier.end(), a), frontier.end());
    out[a] = std::move(frontier);
  }
  return out;
}

struct LinkEvalConfig {
  std::size_t mrr_negatives = 100;
  std::uint64_t seed = 0;
};

struct LinkEvalResult {
  LinkScores scores;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Pairs joined by an instance of the plan's first path are positives, all
/// other distinct anchor/target pairs are negatives. Scores are dot
/// products. AUC is exact over all pairs; MRR ranks each positive against
/// up to `mrr_negatives` negatives of the same anchor drawn with a seeded
/// RNG.
inline LinkEvalResult evaluate_links(const HetGraph& g, const PlanEmbeddings& emb, const MetaPath& path,
                                     const LinkEvalConfig& cfg = {}) {
  const auto nbrs = path_neighbors(g, path);
  const bool same_type = path.anchor_type() == path.end_type();
  std::vector<double> pos, neg;
  double rr = 0.0;
  std::size_t rr_count = 0;
  for (std::size_t i = 0; i < emb.anchor.nodes.size(); ++i) {
    const auto a = emb.anchor.nodes[i];
    const auto za = emb.anchor.rows.row(i);
    const auto& linked = nbrs[a];
    std::vector<double> a_pos, a_neg;
    std::size_t li = 0;
    for (std::size_t j = 0; j < emb.target.nodes.size(); ++j) {
      const auto c = emb.target.nodes[j];
      if (c == a) continue;
      while (li < linked.size() && linked[li] < c) ++li;
      const bool is_pos = li < linked.size() && linked[li] == c;
      const double s = dot(za, emb.target.rows.row(j));
      (is_pos ? a_pos : a_neg).push_back(s);
      // Unordered pairs count once when both ends share a type.
      if (same_type && c < a) continue;
      (is_pos ? pos : neg).push_back(s);
    }
    if (a_pos.empty() || a_neg.empty()) continue;
    Rng rng(cfg.seed, {fnv1a64("mrr"), a});
    if (a_neg.size() > cfg.mrr_negatives) {
      rng.shuffle(a_neg);
      a_neg.resize(cfg.mrr_negatives);
    }
    for (double p : a_pos) {
      rr += reciprocal_rank(p, a_neg);
      ++rr_count;
    }
  }
  if (pos.empty() || neg.empty())
    throw QueryError("link evaluation under '" + path.text() + "' needs both linked and unlinked pairs");
  LinkEvalResult r;
  r.scores.auc = auc_rank_sum(pos, neg);
  r.scores.mrr = rr_count ? rr / static_cast<double>(rr_count) : 0.0;
  r.positives = pos.size();
  r.negatives = neg.size();
  return r;
}

struct RetrievalResult {
  double recall = 0.0;
  double ndcg = 0.0;
  std::size_t queries = 0;
};

/// Mean Recall@K / NDCG@K of top-K lists. A node's relevant set is the
/// target nodes sharing its label when labels are given, otherwise its
/// path neighbors.
inline RetrievalResult evaluate_retrieval(const HetGraph& g, const PlanEmbeddings& emb, const MetaPath& path,
                                          std::size_t k, const std::unordered_map<NodeId, int>* labels = nullptr) {
  if (k == 0) throw QueryError("K must be positive");
  std::vector<std::vector<NodeId>> nbrs;
  if (!labels) nbrs = path_neighbors(g, path);
  RetrievalResult r;
  for (NodeId a : emb.anchor.nodes) {
    std::unordered_set<NodeId> relevant;
    if (labels) {
      auto it = labels->find(a);
      if (it == labels->end()) continue;
      for (NodeId c : emb.target.nodes) {
        auto jt = labels->find(c);
        if (c != a && jt != labels->end() && jt->second == it->second) relevant.insert(c);
      }
    } else {
      relevant.insert(nbrs[a].begin(), nbrs[a].end());
    }
    if (relevant.empty()) continue;
    const auto res = topk(emb, a, static_cast<long long>(k));
    std::vector<NodeId> ids;
    for (const auto& s : res.items) ids.push_back(s.id);
    const auto m = recall_ndcg(ids, relevant, k);
    r.recall += m.recall;
    r.ndcg += m.ndcg;
    ++r.queries;
  }
  if (r.queries == 0) throw QueryError("no query node has a relevant set");
  r.recall /= static_cast<double>(r.queries);
  r.ndcg /= static_cast<double>(r.queries);
  return r;
}

struct BenchReport {
  double retrain_seconds = 0.0;
  std::vector<double> reconstruct_seconds;  // per path
  double ratio = 0.0;                        // retrain / slowest reconstruction
  std::uint64_t reconstruction_updates = 0;
};

/// Times a full retrain against read-only reconstruction of each path from
/// the frozen store, and counts optimizer updates during reconstruction.
inline BenchReport bench_adhoc(const EmbeddingStore& store, const HetGraph& g, const std::vector<QueryPlan>& plans,
                               const TrainConfig& tcfg, const WalkConfig& wcfg) {
  if (plans.empty()) throw QueryError("bench needs at least one meta-path");
  BenchReport r;
  const auto t0 = std::chrono::steady_clock::now();
  { auto run = train(g, tcfg, wcfg); }
  r.retrain_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto before = parameter_update_counter().load();
  double slowest = 0.0;
  for (const auto& plan : plans) {
    const auto t1 = std::chrono::steady_clock::now();
    auto e = embed_plan(store, plan);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
    r.reconstruct_seconds.push_back(s);
    slowest = std::max(slowest, s);
  }
  r.reconstruction_updates = parameter_update_counter().load() - before;
  r.ratio = slowest > 0 ? r.retrain_seconds / slowest : std::numeric_limits<double>::infinity();
  return r;
}

/// `node_id \t v0,v1,...` per row, shortest round-trip formatting.
inline void write_embeddings(std::ostream& os, std::span<const NodeId> nodes, const ad::Tensor& rows) {
  char buf[32];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    os << nodes[i] << '\t';
    const auto r = rows.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) os << ',';
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), r[j]);
      os.write(buf, p - buf);
    }
    os << '\n';
  }
}

}  // namespace hetembed
