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

// Minimal leveled logger. Verbosity comes from HETEMBED_LOG
// (error | warn | info | debug), default warn. Tests can install a sink to
// capture messages.

#include <atomic>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hetembed::log {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

using Sink = std::function<void(Level, std::string_view)>;

namespace detail {

inline Level level_from_env() {
  const char* env = std::getenv("HETEMBED_LOG");
  if (env == nullptr) return Level::kWarn;
  const std::string_view v(env);
  if (v == "error") return Level::kError;
  if (v == "info") return Level::kInfo;
  if (v == "debug") return Level::kDebug;
  return Level::kWarn;
}

struct State {
  std::mutex mu;
  Level level = level_from_env();
  Sink sink;
  std::atomic<std::size_t> warnings{0};
};

inline State& state() {
  static State s;
  return s;
}

inline const char* tag(Level l) {
  switch (l) {
    case Level::kError: return "error";
    case Level::kWarn: return "warn";
    case Level::kInfo: return "info";
    case Level::kDebug: return "debug";
  }
  return "?";
}

}  // namespace detail

inline void set_level(Level l) {
  std::lock_guard lock(detail::state().mu);
  detail::state().level = l;
}

inline Level level() {
  std::lock_guard lock(detail::state().mu);
  return detail::state().level;
}

/// Replaces the sink and returns the previous one. An empty sink restores
/// the default (stderr).
inline Sink set_sink(Sink sink) {
  std::lock_guard lock(detail::state().mu);
  return std::exchange(detail::state().sink, std::move(sink));
}

/// Number of warnings emitted so far in this process.
inline std::size_t warning_count() { return detail::state().warnings.load(); }

template <typename... Args>
void write(Level l, const Args&... args) {
  auto& s = detail::state();
  if (l == Level::kWarn) ++s.warnings;
  std::lock_guard lock(s.mu);
  if (static_cast<int>(l) > static_cast<int>(s.level) && !s.sink) return;
  std::ostringstream os;
  (os << ... << args);
  if (s.sink) {
    s.sink(l, os.str());
  } else {
    std::cerr << "[" << detail::tag(l) << "] " << os.str() << '\n';
  }
}

template <typename... Args>
void error(const Args&... args) { write(Level::kError, args...); }
template <typename... Args>
void warn(const Args&... args) { write(Level::kWarn, args...); }
template <typename... Args>
void info(const Args&... args) { write(Level::kInfo, args...); }
template <typename... Args>
void debug(const Args&... args) { write(Level::kDebug, args...); }

/// RAII capture of log output, used by tests that assert on warnings.
class ScopedCapture {
 public:
  ScopedCapture() {
    prev_ = set_sink([this](Level l, std::string_view msg) {
      if (l == Level::kWarn) ++warnings_;
      messages_.emplace_back(msg);
    });
  }
  ~ScopedCapture() { set_sink(std::move(prev_)); }
  ScopedCapture(const ScopedCapture&) = delete;
  ScopedCapture& operator=(const ScopedCapture&) = delete;

  std::size_t warnings() const { return warnings_; }
  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(std::string_view needle) const {
    for (const auto& m : messages_)
      if (m.find(needle) != std::string::npos) return true;
    return false;
  }

 private:
  Sink prev_;
  std::size_t warnings_ = 0;
  std::vector<std::string> messages_;
};

}  // namespace hetembed::log
