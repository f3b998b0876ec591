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

// Small graphs and helpers shared by the unit tests.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "hetembed/hetgraph.hpp"

namespace hetembed::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hetembed_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Types A=0, D=1, M=2. Actors 0-3, movies 4-6, directors 7-8.
///   a0-m4 a1-m4 a1-m5 a2-m5 a3-m6 a2-m6 ; m4-d7 m5-d7 m6-d8
inline HetGraph movie_graph() {
  std::vector<TypeId> types{0, 0, 0, 0, 2, 2, 2, 1, 1};
  std::vector<Edge> edges{{0, 4, 0}, {1, 4, 0}, {1, 5, 0}, {2, 5, 0}, {3, 6, 0},
                          {2, 6, 0}, {4, 7, 1}, {5, 7, 1}, {6, 8, 1}};
  return HetGraph({"A", "D", "M"}, types, edges);
}

/// Two types (A=0, M=1), `n` nodes alternating types, a ring of A-M edges
/// plus chords so every node has degree >= 2.
inline HetGraph ring_graph(std::size_t n = 10) {
  std::vector<TypeId> types(n);
  for (std::size_t i = 0; i < n; ++i) types[i] = static_cast<TypeId>(i % 2);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n), 0});
  for (std::size_t i = 0; i + 3 < n; i += 2) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(i + 3), 0});
  return HetGraph({"A", "M"}, types, edges);
}

}  // namespace hetembed::testing
