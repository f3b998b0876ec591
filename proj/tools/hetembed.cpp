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


// Command-line front end: ingest, train, query, eval, bench, gen-synthetic.
//
// Exit status: 0 on success, 2 on usage errors, 1 on runtime failures.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "hetembed.hpp"

namespace fs = std::filesystem;
using namespace hetembed;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string graph;
  std::string format;
  std::string labels;
  std::string out;
  std::string ckpt;
  std::vector<std::string> paths;
  std::string mode = "cascaded";
  long long k = 20;
  std::optional<long long> node;
  std::string task;
  std::string corpus_dir;
  std::string export_file;
  bool no_intra = false;
  bool no_inter = false;
  // gen-synthetic
  std::string types = "A,M";
  std::string sizes = "100,100";
  std::size_t communities = 2;
  double p_in = 0.3;
  double p_out = 0.02;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

void announce(const std::string& command, std::uint64_t hash, std::uint64_t seed) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  std::cerr << "hetembed " << command << ": config_hash=" << buf << " seed=" << seed << '\n';
}

RunConfig build_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (!o.graph.empty()) c.graph = o.graph;
  if (!o.format.empty()) c.format = o.format;
  if (!o.labels.empty()) c.labels = o.labels;
  if (o.no_intra) c.train.model.intra_attention = false;
  if (o.no_inter) c.train.model.inter_attention = false;
  return c;
}

HetGraph load(const RunConfig& c) {
  if (c.graph.empty()) throw UsageError("--graph is required (or 'graph = ...' in the config file)");
  const auto fmt = parse_graph_format(c.format);
  if (!fmt) throw UsageError("unknown --format '" + c.format + "' (expected hgb or edgelist)");
  return load_graph(c.graph, *fmt);
}

QueryPlan make_plan(const Options& o, const Schema& schema) {
  if (o.paths.empty()) throw UsageError("--path is required");
  const auto mode = parse_mode(o.mode);
  if (!mode) throw UsageError("unknown --mode '" + o.mode + "' (expected cascaded or cumulative)");
  std::vector<MetaPath> paths;
  for (const auto& p : o.paths) paths.push_back(parse_meta_path(p, schema));
  return QueryPlan::make(*mode, std::move(paths));
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

int cmd_ingest(const Options& o) {
  auto c = build_config(o);
  const auto g = load(c);
  announce("ingest", fnv1a64(describe(c)), c.seed);
  const auto text = summarize(g);
  std::cout << text;
  if (!o.out.empty()) {
    std::ofstream out(o.out, std::ios::binary);
    out << text;
  }
  return 0;
}

int cmd_train(const Options& o) {
  require(o.out, "--out");
  auto c = build_config(o);
  const auto g = load(c);
  c.resolve(g.schema());
  echo(c);
  announce("train", config_hash(c.train, c.walk), c.seed);
  auto sampled = sample_graph(g, c.walk);
  if (!o.corpus_dir.empty()) {
    fs::create_directories(o.corpus_dir);
    for (const auto& s : sampled.mpus) {
      const auto name = g.type_name(s.mpu.first) + "-" + g.type_name(s.mpu.second) + ".walks";
      std::ofstream out(fs::path(o.corpus_dir) / name, std::ios::binary);
      write_corpus(out, s.corpus);
    }
  }
  auto run = train(g, c.train, c.walk, std::move(sampled));
  for (const auto& h : run.history)
    std::cout << "epoch\t" << h.epoch << "\ttrain_loss\t" << h.train_loss << "\tvalidation_loss\t"
              << h.validation_loss << '\n';
  std::cout << "best_epoch\t" << run.best_epoch << '\n';
  Checkpoint ck{run.config_hash, c.seed, canonical_config(c.train, c.walk), std::move(run.model),
                std::move(run.store)};
  save_checkpoint(o.out, ck);
  if (!o.export_file.empty()) {
    std::ofstream out(o.export_file, std::ios::binary);
    std::vector<NodeId> nodes(ck.store.num_nodes());
    ad::Tensor rows({nodes.size(), ck.store.dim()});
    for (NodeId v = 0; v < nodes.size(); ++v) {
      nodes[v] = v;
      if (ck.store.mpus_of(v).empty()) continue;
      const auto z = metapath_free_embedding(ck.store, v);
      std::copy(z.begin(), z.end(), rows.row(v).begin());
    }
    write_embeddings(out, nodes, rows);
  }
  return 0;
}

int cmd_query(const Options& o) {
  require(o.ckpt, "--ckpt");
  if (o.k <= 0) throw UsageError("--k must be positive");
  auto ck = load_checkpoint(o.ckpt);
  announce("query", ck.config_hash, ck.seed);
  const auto plan = make_plan(o, ck.store.schema());
  if (!o.export_file.empty()) {
    const auto emb = integrate_all(ck.store, plan);
    std::ofstream out(o.export_file, std::ios::binary);
    write_embeddings(out, emb.nodes, emb.rows);
  }
  if (!o.node) {
    if (o.export_file.empty()) throw UsageError("--node is required unless --export is given");
    return 0;
  }
  if (*o.node < 0) throw UsageError("--node must be a non-negative id");
  const auto res = topk(ck.store, plan, static_cast<NodeId>(*o.node), o.k);
  std::cout << "# query " << res.query << " path";
  for (const auto& p : plan.paths) std::cout << ' ' << p.text();
  std::cout << " k " << res.k << '\n';
  for (std::size_t i = 0; i < res.items.size(); ++i)
    std::cout << i + 1 << '\t' << res.items[i].id << '\t' << res.items[i].score << '\n';
  return 0;
}

std::unordered_map<NodeId, int> label_map(const std::string& file) {
  std::unordered_map<NodeId, int> m;
  for (const auto& [v, l] : load_labels(file)) m[v] = l;
  return m;
}

int cmd_eval(const Options& o) {
  require(o.ckpt, "--ckpt");
  require(o.task, "--task");
  auto ck = load_checkpoint(o.ckpt);
  announce("eval", ck.config_hash, ck.seed);
  auto c = build_config(o);
  std::cout.precision(6);
  if (o.task == "link" || o.task == "retrieval") {
    const auto g = load(c);
    const auto plan = make_plan(o, g.schema());
    const auto emb = embed_plan(ck.store, plan);
    if (o.task == "link") {
      const auto r = evaluate_links(g, emb, plan.paths.front(), {100, ck.seed});
      std::cout << "task = link\npath = " << plan.paths.front().text() << "\nauc = " << r.scores.auc
                << "\nmrr = " << r.scores.mrr << "\npositives = " << r.positives << "\nnegatives = " << r.negatives
                << '\n';
    } else {
      if (o.k <= 0) throw UsageError("--k must be positive");
      std::unordered_map<NodeId, int> labels;
      if (!c.labels.empty()) labels = label_map(c.labels);
      const auto r = evaluate_retrieval(g, emb, plan.paths.front(), static_cast<std::size_t>(o.k),
                                        c.labels.empty() ? nullptr : &labels);
      std::cout << "task = retrieval\npath = " << plan.paths.front().text() << "\nk = " << o.k
                << "\nrecall_at_k = " << r.recall << "\nndcg_at_k = " << r.ndcg << "\nqueries = " << r.queries
                << '\n';
    }
    return 0;
  }
  if (o.task == "class") {
    require(c.labels, "--labels");
    const auto labels = load_labels(c.labels);
    std::optional<MetaPathEmbedding> emb;
    if (!o.paths.empty()) emb = integrate_all(ck.store, make_plan(o, ck.store.schema()));
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (const auto& [v, l] : labels) {
      if (v >= ck.store.num_nodes()) throw FormatError("label for unknown node " + std::to_string(v));
      if (emb) {
        if (ck.store.type_of(v) != emb->type) continue;
        const auto row = emb->of(v);
        x.emplace_back(row.begin(), row.end());
      } else {
        x.push_back(metapath_free_embedding(ck.store, v));
      }
      y.push_back(l);
    }
    ClassifyConfig cc;
    cc.seed = ck.seed;
    const auto f = classify(x, y, cc);
    std::cout << "task = class\nmicro_f1 = " << f.micro << "\nmacro_f1 = " << f.macro << '\n';
    return 0;
  }
  throw UsageError("unknown --task '" + o.task + "' (expected link, class or retrieval)");
}

int cmd_bench(const Options& o) {
  require(o.ckpt, "--ckpt");
  auto ck = load_checkpoint(o.ckpt);
  auto c = build_config(o);
  const auto g = load(c);
  c.resolve(g.schema());
  announce("bench", config_hash(c.train, c.walk), c.seed);
  if (o.paths.empty()) throw UsageError("--path is required");
  const auto mode = parse_mode(o.mode);
  if (!mode) throw UsageError("unknown --mode '" + o.mode + "'");
  std::vector<QueryPlan> plans;
  if (*mode == IntegrationMode::kCumulative) {
    plans.push_back(make_plan(o, g.schema()));
  } else {
    for (const auto& p : o.paths) plans.push_back(QueryPlan::make(*mode, {parse_meta_path(p, g)}));
  }
  const auto r = bench_adhoc(ck.store, g, plans, c.train, c.walk);
  std::cout << "retrain_seconds = " << r.retrain_seconds << '\n';
  for (std::size_t i = 0; i < plans.size(); ++i) {
    std::cout << "reconstruct_seconds." << plans[i].paths.front().text() << " = " << r.reconstruct_seconds[i] << '\n';
  }
  std::cout << "speedup = " << r.ratio << "\nreconstruction_parameter_updates = " << r.reconstruction_updates << '\n';
  return 0;
}

int cmd_gen_synthetic(const Options& o) {
  require(o.out, "--out");
  SyntheticConfig sc;
  sc.types = split_list(o.types);
  sc.sizes.clear();
  for (const auto& s : split_list(o.sizes)) {
    try {
      sc.sizes.push_back(std::stoul(s));
    } catch (const std::exception&) {
      throw UsageError("--sizes expects comma-separated integers");
    }
  }
  sc.communities = o.communities;
  sc.p_in = o.p_in;
  sc.p_out = o.p_out;
  sc.seed = o.seed.value_or(0);
  std::ostringstream desc;
  desc << o.types << ';' << o.sizes << ';' << sc.communities << ';' << sc.p_in << ';' << sc.p_out;
  announce("gen-synthetic", fnv1a64(desc.str()), sc.seed);
  const auto s = generate_synthetic(sc);
  write_synthetic(o.out, s);
  std::cout << summarize(s.graph);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous graph embedding with reusable meta-path units"};
  app.require_subcommand(1);
  Options o;

  auto add_seed = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Random seed");
  };
  auto add_graph = [&](CLI::App* c) {
    c->add_option("--graph", o.graph, "HGB directory or edge-list file");
    c->add_option("--format", o.format, "Graph format: hgb or edgelist");
  };
  auto add_plan = [&](CLI::App* c) {
    c->add_option("--path", o.paths, "Meta-path, e.g. AMA (repeatable)");
    c->add_option("--mode", o.mode, "cascaded or cumulative");
  };

  auto* ingest = app.add_subcommand("ingest", "Load and validate a graph, print a summary");
  ingest->add_option("--config", o.config, "key = value config file");
  add_graph(ingest);
  ingest->add_option("--out", o.out, "Also write the summary here");

  auto* train_cmd = app.add_subcommand("train", "Sample, train and write a checkpoint");
  train_cmd->add_option("--config", o.config, "key = value config file");
  add_seed(train_cmd);
  add_graph(train_cmd);
  train_cmd->add_option("--out", o.out, "Checkpoint file");
  train_cmd->add_option("--corpus", o.corpus_dir, "Directory for walk corpora, one file per MPU");
  train_cmd->add_option("--export", o.export_file, "Write meta-path-free embeddings of every node");
  train_cmd->add_flag("--no-intra-attn", o.no_intra, "Uniform weights over sampled neighbors");
  train_cmd->add_flag("--no-inter-attn", o.no_inter, "Uniform weights over MPUs");

  auto* query = app.add_subcommand("query", "Top-K similar nodes under a meta-path");
  query->add_option("--ckpt", o.ckpt, "Checkpoint file");
  add_plan(query);
  query->add_option("--node", o.node, "Query node id");
  query->add_option("--k", o.k, "Number of results");
  query->add_option("--export", o.export_file, "Write the plan's embeddings of every anchor-type node");

  auto* eval = app.add_subcommand("eval", "Link prediction, classification or retrieval metrics");
  eval->add_option("--config", o.config, "key = value config file");
  eval->add_option("--ckpt", o.ckpt, "Checkpoint file");
  add_graph(eval);
  add_plan(eval);
  eval->add_option("--task", o.task, "link, class or retrieval");
  eval->add_option("--labels", o.labels, "node_id label file");
  eval->add_option("--k", o.k, "Cutoff for retrieval metrics");

  auto* bench = app.add_subcommand("bench", "Full retraining versus reconstruction from the store");
  bench->add_option("--config", o.config, "key = value config file");
  add_seed(bench);
  bench->add_option("--ckpt", o.ckpt, "Checkpoint file");
  add_graph(bench);
  add_plan(bench);
  bench->add_flag("--no-intra-attn", o.no_intra, "Uniform weights over sampled neighbors");
  bench->add_flag("--no-inter-attn", o.no_inter, "Uniform weights over MPUs");

  auto* gen = app.add_subcommand("gen-synthetic", "Write a planted two-community graph");
  add_seed(gen);
  gen->add_option("--out", o.out, "Output directory");
  gen->add_option("--types", o.types, "Comma-separated type labels (chained)");
  gen->add_option("--sizes", o.sizes, "Comma-separated node counts per type");
  gen->add_option("--communities", o.communities, "Communities per type");
  gen->add_option("--p-in", o.p_in, "Edge probability inside a community");
  gen->add_option("--p-out", o.p_out, "Edge probability across communities");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(o);
    if (*train_cmd) return cmd_train(o);
    if (*query) return cmd_query(o);
    if (*eval) return cmd_eval(o);
    if (*bench) return cmd_bench(o);
    if (*gen) return cmd_gen_synthetic(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
