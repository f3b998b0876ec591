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

// Line-based `key = value` run configuration.
//
// Blank lines and lines starting with '#' are ignored. Unknown keys are an
// error. Per-type neighbor counts use `k.<type label> = <n>`.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "hetembed/common.hpp"
#include "hetembed/encoder.hpp"
#include "hetembed/hetgraph.hpp"
#include "hetembed/log.hpp"
#include "hetembed/sampler.hpp"
#include "hetembed/trainer.hpp"

namespace hetembed {

struct RunConfig {
  WalkConfig walk;
  TrainConfig train;
  std::map<std::string, std::size_t> k_by_label;
  std::string graph;
  std::string format = "hgb";
  std::string labels;
  std::uint64_t seed = 0;

  /// Copies the run seed into the sampler and trainer and resolves
  /// per-type k against a schema.
  void resolve(const Schema& schema) {
    walk.seed = seed;
    train.seed = seed;
    walk.k_per_type.clear();
    for (const auto& [label, k] : k_by_label) {
      auto t = schema.find_type(label);
      if (!t) throw ConfigError("k." + label + ": unknown node type");
      walk.k_per_type[*t] = k;
    }
    walk.validate();
    train.validate();
  }
};

namespace config_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end)
    throw ConfigError("'" + std::string(key) + "': invalid value '" + std::string(v) + "'");
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + std::string(key) + "': expected a boolean, got '" + std::string(v) + "'");
}

}  // namespace config_detail

/// Applies one key/value pair. Throws ConfigError for unknown keys and
/// malformed values.
inline void set_config_value(RunConfig& c, std::string_view key, std::string_view value) {
  using config_detail::parse_bool;
  using config_detail::parse_number;
  auto sz = [&] { return parse_number<std::size_t>(key, value); };
  auto dbl = [&] { return parse_number<double>(key, value); };

  if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "graph") c.graph = value;
  else if (key == "format") c.format = value;
  else if (key == "labels") c.labels = value;
  else if (key == "restart_prob") c.walk.restart_prob = dbl();
  else if (key == "walk_length") c.walk.walk_length = sz();
  else if (key == "walks_per_node") c.walk.walks_per_node = sz();
  else if (key == "window") c.walk.window = sz();
  else if (key == "negatives") c.walk.negatives = sz();
  else if (key == "k") c.walk.default_k = sz();
  else if (key == "threads") c.walk.threads = sz();
  else if (key.starts_with("k.") && key.size() > 2) c.k_by_label[std::string(key.substr(2))] = sz();
  else if (key == "dim") c.train.model.dim = sz();
  else if (key == "leaky_slope") c.train.model.leaky_slope = dbl();
  else if (key == "intra_attention") c.train.model.intra_attention = parse_bool(key, value);
  else if (key == "inter_attention") c.train.model.inter_attention = parse_bool(key, value);
  else if (key == "freeze_projection") c.train.model.freeze_projection = parse_bool(key, value);
  else if (key == "learning_rate") c.train.learning_rate = dbl();
  else if (key == "max_epochs") c.train.max_epochs = sz();
  else if (key == "patience") c.train.patience = sz();
  else if (key == "batch_size") c.train.batch_size = sz();
  else if (key == "adam_beta1") c.train.adam_beta1 = dbl();
  else if (key == "adam_beta2") c.train.adam_beta2 = dbl();
  else if (key == "adam_eps") c.train.adam_eps = dbl();
  else if (key == "validation_fraction") c.train.validation_fraction = dbl();
  else throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

inline RunConfig parse_run_config(std::istream& in, const std::string& source = "config") {
  RunConfig c;
  std::string buf;
  std::size_t lineno = 0;
  while (std::getline(in, buf)) {
    ++lineno;
    const auto line = config_detail::trim(buf);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = config_detail::trim(line.substr(0, eq));
    const auto value = config_detail::trim(line.substr(eq + 1));
    try {
      set_config_value(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  return parse_run_config(in, file.string());
}

/// Every effective value, one `key = value` per line.
inline std::string describe(const RunConfig& c) {
  std::ostringstream os;
  os << "graph = " << c.graph << '\n' << "format = " << c.format << '\n';
  if (!c.labels.empty()) os << "labels = " << c.labels << '\n';
  os << canonical_config(c.train, c.walk);
  for (const auto& [label, k] : c.k_by_label) os << "k." << label << " = " << k << '\n';
  return os.str();
}

/// Logs every effective value at info level.
inline void echo(const RunConfig& c) {
  std::istringstream in(describe(c));
  std::string line;
  while (std::getline(in, line)) log::info("config ", line);
}

}  // namespace hetembed
