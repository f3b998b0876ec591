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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "hetembed/metrics.hpp"
#include "hetembed/query.hpp"

namespace hetembed {
namespace {

using ad::Tensor;

// Brute-force references, written independently of the library.
double ref_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return wins / static_cast<double>(pos.size() * neg.size());
}

double ref_mrr(const std::vector<double>& pos, const std::vector<double>& neg) {
  // Expected rank of each positive when ties are broken uniformly at random.
  double total = 0;
  for (double p : pos) {
    std::vector<double> all = neg;
    all.push_back(p);
    std::sort(all.begin(), all.end(), std::greater<>());
    const auto first = std::find(all.begin(), all.end(), p) - all.begin();
    const auto last = all.rend() - std::find(all.rbegin(), all.rend(), p) - 1;
    total += 1.0 / ((static_cast<double>(first + last) / 2.0) + 1.0);
  }
  return total / static_cast<double>(pos.size());
}

std::pair<double, double> ref_recall_ndcg(const std::vector<NodeId>& ranked, const std::vector<NodeId>& relevant,
                                          std::size_t k) {
  std::vector<double> gains;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i)
    gains.push_back(std::count(relevant.begin(), relevant.end(), ranked[i]) ? 1.0 : 0.0);
  double dcg = 0, idcg = 0;
  for (std::size_t i = 0; i < gains.size(); ++i) dcg += gains[i] / std::log2(i + 2.0);
  std::vector<double> ideal(relevant.size(), 1.0);
  ideal.resize(std::max(ideal.size(), k), 0.0);
  for (std::size_t i = 0; i < k; ++i) idcg += ideal[i] / std::log2(i + 2.0);
  const double hits = std::accumulate(gains.begin(), gains.end(), 0.0);
  return {hits / static_cast<double>(relevant.size()), dcg / idcg};
}

TEST(Metrics, RecallNdcgWorkedValues) {
  const std::vector<NodeId> ranked{5, 7, 9};
  auto m = recall_ndcg(ranked, {5, 7}, 3);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.ndcg, 1.0);
  m = recall_ndcg(std::span(ranked).first(2), {7}, 2);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_DOUBLE_EQ(m.ndcg, 1.0 / std::log2(3.0));
  EXPECT_NEAR(m.ndcg, 0.6309, 1e-4);
  m = recall_ndcg(ranked, {1, 2}, 3);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.ndcg, 0.0);
  EXPECT_THROW(recall_ndcg(ranked, {}, 3), QueryError);
  EXPECT_THROW(recall_ndcg(ranked, {5}, 0), QueryError);
}

TEST(Metrics, LinkWorkedValues) {
  auto s = link_auc_mrr(std::vector<double>{0.9}, std::vector<double>{0.1, 0.2});
  EXPECT_EQ(s.auc, 1.0);
  EXPECT_EQ(s.mrr, 1.0);
  s = link_auc_mrr(std::vector<double>{0.1}, std::vector<double>{0.9});
  EXPECT_EQ(s.auc, 0.0);
  EXPECT_EQ(s.mrr, 0.5);
  EXPECT_EQ(auc_pairwise(std::vector<double>{1, 2}, std::vector<double>{2, 0}), 0.625);
  EXPECT_THROW(link_auc_mrr(std::vector<double>{}, std::vector<double>{1}), QueryError);
}

TEST(Metrics, RandomInstancesMatchBruteForce) {
  Rng rng(2024, {});
  for (int trial = 0; trial < 100; ++trial) {
    const auto np = 1 + rng.index(25), nn = 1 + rng.index(25);
    std::vector<double> pos(np), neg(nn);
    // Coarse values so ties happen.
    for (auto& x : pos) x = static_cast<double>(rng.index(10)) / 4.0;
    for (auto& x : neg) x = static_cast<double>(rng.index(10)) / 4.0;
    EXPECT_NEAR(auc_rank_sum(pos, neg), ref_auc(pos, neg), 1e-12);
    EXPECT_NEAR(auc_pairwise(pos, neg), ref_auc(pos, neg), 1e-12);
    EXPECT_NEAR(link_auc_mrr(pos, neg).mrr, ref_mrr(pos, neg), 1e-9);

    const auto n = 1 + rng.index(50);
    std::vector<NodeId> ranked(n);
    std::iota(ranked.begin(), ranked.end(), 100);
    rng.shuffle(ranked);
    std::vector<NodeId> relevant;
    std::unordered_set<NodeId> rel_set;
    for (NodeId v = 100; v < 100 + n + 5; ++v)
      if (rng.bernoulli(0.3)) {
        relevant.push_back(v);
        rel_set.insert(v);
      }
    if (relevant.empty()) {
      relevant.push_back(100);
      rel_set.insert(100);
    }
    const auto k = 1 + rng.index(n);
    const auto got = recall_ndcg(ranked, rel_set, k);
    const auto [rr, nd] = ref_recall_ndcg(ranked, relevant, k);
    EXPECT_NEAR(got.recall, rr, 1e-9);
    EXPECT_NEAR(got.ndcg, nd, 1e-9);
  }
}

TEST(Metrics, F1Cases) {
  const std::vector<int> truth{0, 0, 1, 1};
  auto f = f1_scores(truth, std::vector<int>{0, 0, 0, 0});
  EXPECT_DOUBLE_EQ(f.micro, 0.5);
  EXPECT_DOUBLE_EQ(f.macro, 1.0 / 3.0);
  f = f1_scores(truth, truth);
  EXPECT_EQ(f.micro, 1.0);
  EXPECT_EQ(f.macro, 1.0);
  const std::vector<int> t3{0, 1, 2, 2, 1, 0, 2}, p3{0, 2, 2, 1, 1, 0, 0};
  const auto a = f1_scores(t3, p3);
  auto perm = [](std::vector<int> v) {
    for (auto& x : v) x = (x + 1) % 3;
    return v;
  };
  const auto b = f1_scores(perm(t3), perm(p3));
  EXPECT_DOUBLE_EQ(a.micro, b.micro);
  EXPECT_DOUBLE_EQ(a.macro, b.macro);
}

TEST(Metrics, ClassifySeparableAndErrors) {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  Rng rng(1, {});
  for (int i = 0; i < 60; ++i) {
    const int c = i % 2;
    x.push_back({(c ? 3.0 : -3.0) + rng.uniform(-0.5, 0.5), rng.uniform(-1, 1)});
    y.push_back(c ? 7 : 4);
  }
  const auto f = classify(x, y, {});
  EXPECT_EQ(f.micro, 1.0);
  EXPECT_EQ(f.macro, 1.0);
  std::vector<int> one(60, 1);
  EXPECT_THROW(classify(x, one, {}), QueryError);
}

MetaPathEmbedding emb_of(TypeId t, std::vector<NodeId> ids, std::vector<std::vector<double>> rows) {
  MetaPathEmbedding e;
  e.type = t;
  e.nodes = std::move(ids);
  e.rows = Tensor({e.nodes.size(), rows.front().size()});
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), e.rows.row(i).begin());
  return e;
}

TEST(TopK, OrderedByCosine) {
  PlanEmbeddings pe;
  pe.anchor = emb_of(0, {0}, {{2, 0}});
  pe.target = emb_of(1, {1, 2, 3}, {{0, 5}, {1, std::sqrt(3.0)}, {4, 0}});
  const auto r = topk(pe, 0, 2);
  ASSERT_EQ(r.items.size(), 2u);
  EXPECT_EQ(r.items[0].id, 3u);
  EXPECT_NEAR(r.items[0].score, 1.0, 1e-15);
  EXPECT_EQ(r.items[1].id, 2u);
  EXPECT_NEAR(r.items[1].score, 0.5, 1e-15);
  EXPECT_THROW(topk(pe, 0, 0), QueryError);
  EXPECT_THROW(topk(pe, 0, -3), QueryError);
}

TEST(TopK, ZeroQueryFallsBackToIdOrder) {
  PlanEmbeddings pe;
  pe.anchor = emb_of(0, {0}, {{0, 0}});
  pe.target = emb_of(1, {4, 2, 9}, {{1, 1}, {3, 0}, {0, 2}});
  const auto r = topk(pe, 0, 10);
  ASSERT_EQ(r.items.size(), 3u);
  EXPECT_EQ(r.items[0].id, 2u);
  EXPECT_EQ(r.items[1].id, 4u);
  EXPECT_EQ(r.items[2].id, 9u);
  for (const auto& s : r.items) EXPECT_EQ(s.score, 0.0);
}

TEST(TopK, EightNodeExhaustive) {
  Rng rng(8, {});
  std::vector<NodeId> ids(8);
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<std::vector<double>> rows(8, std::vector<double>(3));
  for (auto& r : rows)
    for (auto& x : r) x = rng.uniform(-1, 1);
  PlanEmbeddings pe;
  pe.anchor = emb_of(0, ids, rows);
  pe.target = pe.anchor;
  for (NodeId a = 0; a < 8; ++a) {
    std::vector<std::pair<double, NodeId>> ref;
    for (NodeId c = 0; c < 8; ++c) {
      if (c == a) continue;
      double d = 0, na = 0, nc = 0;
      for (int k = 0; k < 3; ++k) {
        d += rows[a][k] * rows[c][k];
        na += rows[a][k] * rows[a][k];
        nc += rows[c][k] * rows[c][k];
      }
      ref.push_back({-d / std::sqrt(na * nc), c});
    }
    std::sort(ref.begin(), ref.end());
    const auto r = topk(pe, a, 7);
    ASSERT_EQ(r.items.size(), 7u);
    for (std::size_t i = 0; i < 7; ++i) {
      EXPECT_EQ(r.items[i].id, ref[i].second);
      EXPECT_NEAR(r.items[i].score, -ref[i].first, 1e-12);
    }
    for (const auto& s : r.items) {
      const auto back = topk(pe, s.id, 7);
      auto it = std::find_if(back.items.begin(), back.items.end(), [&](const ScoredNode& x) { return x.id == a; });
      ASSERT_NE(it, back.items.end());
      EXPECT_EQ(it->score, s.score);
    }
  }
}

TrainingRun ring_run() {
  TrainConfig t;
  t.model.dim = 4;
  t.max_epochs = 2;
  t.patience = 2;
  t.seed = 1;
  WalkConfig w;
  w.walk_length = 8;
  w.walks_per_node = 3;
  w.default_k = 2;
  return train(testing::ring_graph(12), t, w);
}

TEST(Store, TopKValidation) {
  const auto g = testing::ring_graph(12);
  const auto run = ring_run();
  const auto plan = QueryPlan::make(IntegrationMode::kCascaded, {parse_meta_path("AMA", g)});
  EXPECT_THROW(topk(run.store, plan, 1, 5), QueryError);   // node 1 is an M
  EXPECT_THROW(topk(run.store, plan, 99, 5), QueryError);
  const auto r1 = topk(run.store, plan, 0, 3), r2 = topk(run.store, plan, 0, 3);
  ASSERT_EQ(r1.items.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r1.items[i].id, r2.items[i].id);
    EXPECT_EQ(r1.items[i].score, r2.items[i].score);
    EXPECT_EQ(g.type_of(r1.items[i].id), 0u);
    EXPECT_NE(r1.items[i].id, 0u);
    if (i) {
      EXPECT_LE(r1.items[i].score, r1.items[i - 1].score);
    }
  }
}

TEST(LinkEval, CountsAndAucMatchBruteForce) {
  const auto g = testing::ring_graph(12);
  const auto run = ring_run();
  const auto path = parse_meta_path("AMA", g);
  const auto emb = embed_plan(run.store, QueryPlan::make(IntegrationMode::kCascaded, {path}));
  const auto res = evaluate_links(g, emb, path);
  std::vector<double> pos, neg;
  const auto as = emb.anchor.nodes;
  for (std::size_t i = 0; i < as.size(); ++i)
    for (std::size_t j = i + 1; j < as.size(); ++j) {
      bool linked = false;
      for (NodeId m : g.neighbors(as[i]))
        for (NodeId x : g.neighbors(m)) linked = linked || x == as[j];
      const double s = dot(emb.anchor.rows.row(i), emb.anchor.rows.row(j));
      (linked ? pos : neg).push_back(s);
    }
  EXPECT_EQ(res.positives, pos.size());
  EXPECT_EQ(res.negatives, neg.size());
  EXPECT_NEAR(res.scores.auc, ref_auc(pos, neg), 1e-12);
  EXPECT_GE(res.scores.mrr, 0.0);
  EXPECT_LE(res.scores.mrr, 1.0);
}

TEST(Retrieval, PathNeighborsAsRelevant) {
  const auto g = testing::ring_graph(12);
  const auto run = ring_run();
  const auto path = parse_meta_path("AMA", g);
  const auto emb = embed_plan(run.store, QueryPlan::make(IntegrationMode::kCascaded, {path}));
  const auto r = evaluate_retrieval(g, emb, path, 5);
  EXPECT_EQ(r.queries, 6u);
  EXPECT_GE(r.recall, 0.0);
  EXPECT_LE(r.recall, 1.0);
  EXPECT_THROW(evaluate_retrieval(g, emb, path, 0), QueryError);
}

TEST(Bench, ReconstructionDoesNoUpdates) {
  const auto g = testing::ring_graph(12);
  auto run = ring_run();
  TrainConfig t;
  t.model.dim = 4;
  t.max_epochs = 2;
  t.patience = 2;
  WalkConfig w;
  w.walk_length = 8;
  w.walks_per_node = 3;
  const std::vector<QueryPlan> plans{QueryPlan::make(IntegrationMode::kCascaded, {parse_meta_path("MAM", g)})};
  const auto rep = bench_adhoc(run.store, g, plans, t, w);
  EXPECT_EQ(rep.reconstruction_updates, 0u);
  EXPECT_GT(rep.retrain_seconds, 0.0);
  ASSERT_EQ(rep.reconstruct_seconds.size(), 1u);
  const auto e1 = embed_plan(run.store, plans[0]), e2 = embed_plan(run.store, plans[0]);
  EXPECT_EQ(e1.anchor.rows, e2.anchor.rows);
}

TEST(Export, RoundTripsExactly) {
  Tensor rows = Tensor::matrix(2, 3, {0.1, -1.0 / 3.0, 1e-300, 2.5, 0, -7});
  const std::vector<NodeId> ids{3, 8};
  std::ostringstream os;
  write_embeddings(os, ids, rows);
  std::istringstream in(os.str());
  std::string line;
  std::size_t r = 0;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    EXPECT_EQ(std::stoul(line.substr(0, tab)), ids[r]);
    std::stringstream vals(line.substr(tab + 1));
    std::string cell;
    std::size_t c = 0;
    while (std::getline(vals, cell, ',')) EXPECT_EQ(std::stod(cell), rows.at(r, c++));
    EXPECT_EQ(c, 3u);
    ++r;
  }
  EXPECT_EQ(r, 2u);
}

}  // namespace
}  // namespace hetembed
