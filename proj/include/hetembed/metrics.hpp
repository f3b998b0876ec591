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

// Ranking, link-prediction and classification metrics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <unordered_set>
#include <vector>

#include "hetembed/common.hpp"
#include "hetembed/rng.hpp"

namespace hetembed {

struct RecallNdcg {
  double recall = 0.0;
  double ndcg = 0.0;
};

/// Binary-gain Recall@K and NDCG@K of a ranked id list.
inline RecallNdcg recall_ndcg(std::span<const NodeId> ranked, const std::unordered_set<NodeId>& relevant,
                              std::size_t k) {
  if (relevant.empty()) throw QueryError("recall/NDCG need a non-empty relevant set");
  if (k == 0) throw QueryError("K must be positive");
  const auto n = std::min(k, ranked.size());
  std::size_t hits = 0;
  double dcg = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (relevant.count(ranked[r])) {
      ++hits;
      dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    }
  }
  double ideal = 0.0;
  for (std::size_t r = 0; r < std::min(k, relevant.size()); ++r) ideal += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return {static_cast<double>(hits) / static_cast<double>(relevant.size()), dcg / ideal};
}

/// Exact P(pos > neg) over all pairs, ties counted half. O(P log P + N log N).
inline double auc_rank_sum(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw QueryError("AUC needs non-empty positive and negative score lists");
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> all;
  all.reserve(pos.size() + neg.size());
  for (double s : pos) all.push_back({s, true});
  for (double s : neg) all.push_back({s, false});
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.score < b.score; });
  // Mann-Whitney U with mid-ranks for ties.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (all[k].positive) rank_sum += mid;
    i = j;
  }
  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

/// Same quantity by explicit pair counting; O(P N).
inline double auc_pairwise(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw QueryError("AUC needs non-empty positive and negative score lists");
  double wins = 0.0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

/// Reciprocal rank of a positive among its negatives; ties share the mean
/// of the ranks they span.
inline double reciprocal_rank(double pos, std::span<const double> negs) {
  std::size_t above = 0, tied = 0;
  for (double n : negs) {
    if (n > pos) ++above;
    else if (n == pos) ++tied;
  }
  const double rank = static_cast<double>(above) + 1.0 + static_cast<double>(tied) / 2.0;
  return 1.0 / rank;
}

struct LinkScores {
  double auc = 0.0;
  double mrr = 0.0;
};

/// AUC over all (pos, neg) pairs; MRR of each positive against the whole
/// negative list.
inline LinkScores link_auc_mrr(std::span<const double> pos, std::span<const double> neg) {
  LinkScores s;
  s.auc = auc_rank_sum(pos, neg);
  double rr = 0.0;
  for (double p : pos) rr += reciprocal_rank(p, neg);
  s.mrr = rr / static_cast<double>(pos.size());
  return s;
}

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
};

/// Micro and macro F1 over the classes present in truth or prediction.
inline F1Scores f1_scores(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw DimensionError("f1: label and prediction counts differ");
  if (truth.empty()) throw QueryError("f1: empty evaluation set");
  std::set<int> classes(truth.begin(), truth.end());
  classes.insert(predicted.begin(), predicted.end());
  std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
  double macro = 0.0;
  for (int c : classes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool t = truth[i] == c, p = predicted[i] == c;
      tp += t && p;
      fp += !t && p;
      fn += t && !p;
    }
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
    const double denom = 2.0 * static_cast<double>(tp) + static_cast<double>(fp + fn);
    macro += denom > 0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  }
  F1Scores s;
  const double denom = 2.0 * static_cast<double>(tp_all) + static_cast<double>(fp_all + fn_all);
  s.micro = denom > 0 ? 2.0 * static_cast<double>(tp_all) / denom : 0.0;
  s.macro = macro / static_cast<double>(classes.size());
  return s;
}

struct ClassifyConfig {
  double train_fraction = 0.8;
  std::size_t epochs = 300;
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

/// Multinomial logistic regression by full-batch gradient descent on frozen
/// embeddings, evaluated on a seeded held-out split.
inline F1Scores classify(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                         const ClassifyConfig& cfg = {}) {
  if (x.size() != y.size()) throw DimensionError("classify: embedding and label counts differ");
  std::map<int, std::size_t> cls;
  for (int c : y) cls.emplace(c, 0);
  if (cls.size() < 2) throw QueryError("classify needs at least 2 classes");
  std::size_t ci = 0;
  for (auto& [c, i] : cls) i = ci++;
  const auto k = cls.size();
  const auto d = x.empty() ? 0 : x.front().size();

  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed, {fnv1a64("classify")});
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(x.size())));
  if (n_train == 0 || n_train >= x.size()) throw QueryError("classify: split leaves an empty train or test set");
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::vector<bool> seen(k, false);
  for (auto i : train) seen[cls.at(y[i])] = true;
  for (const auto& [c, i] : cls)
    if (!seen[i]) throw QueryError("classify: class " + std::to_string(c) + " is absent from the train split");

  // Standardize features with train statistics.
  std::vector<double> mu(d, 0.0), sd(d, 0.0);
  for (auto i : train)
    for (std::size_t j = 0; j < d; ++j) mu[j] += x[i][j];
  for (auto& m : mu) m /= static_cast<double>(train.size());
  for (auto i : train)
    for (std::size_t j = 0; j < d; ++j) sd[j] += (x[i][j] - mu[j]) * (x[i][j] - mu[j]);
  for (auto& s : sd) s = std::sqrt(s / static_cast<double>(train.size())) + 1e-12;
  auto feat = [&](std::size_t i, std::size_t j) { return (x[i][j] - mu[j]) / sd[j]; };

  std::vector<double> w(k * d, 0.0), b(k, 0.0), p(k);
  auto probs = [&](std::size_t i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      double z = b[c];
      for (std::size_t j = 0; j < d; ++j) z += w[c * d + j] * feat(i, j);
      p[c] = z;
      mx = std::max(mx, z);
    }
    double s = 0.0;
    for (auto& v : p) s += (v = std::exp(v - mx));
    for (auto& v : p) v /= s;
  };
  std::vector<double> gw(k * d), gb(k);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (auto i : train) {
      probs(i);
      const auto t = cls.at(y[i]);
      for (std::size_t c = 0; c < k; ++c) {
        const double r = p[c] - (c == t ? 1.0 : 0.0);
        gb[c] += r;
        for (std::size_t j = 0; j < d; ++j) gw[c * d + j] += r * feat(i, j);
      }
    }
    const double inv = 1.0 / static_cast<double>(train.size());
    for (std::size_t c = 0; c < k; ++c) {
      b[c] -= cfg.learning_rate * gb[c] * inv;
      for (std::size_t j = 0; j < d; ++j)
        w[c * d + j] -= cfg.learning_rate * (gw[c * d + j] * inv + cfg.l2 * w[c * d + j]);
    }
  }
  std::vector<int> idx_to_class(k);
  for (const auto& [c, i] : cls) idx_to_class[i] = c;
  std::vector<int> truth, pred;
  for (auto i : test) {
    probs(i);
    truth.push_back(y[i]);
    pred.push_back(idx_to_class[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())]);
  }
  return f1_scores(truth, pred);
}

}  // namespace hetembed
