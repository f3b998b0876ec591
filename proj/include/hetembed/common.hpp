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

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace hetembed {

using NodeId = std::uint32_t;
using TypeId = std::uint32_t;
using RelationId = std::uint32_t;
using ContentTypeId = std::uint32_t;

inline constexpr NodeId kInvalidNode = std::numeric_limits<NodeId>::max();

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Graph violates the declared schema (dangling endpoint, unknown label, ...).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Input file is syntactically malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// A meta-path step joins two types that share no edge.
class ConnectivityError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class QueryError : public Error {
 public:
  using Error::Error;
};

}  // namespace hetembed
