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

// Versioned binary checkpoints.
//
// Layout (all integers little-endian, doubles as IEEE-754 binary64 LE):
//   "HETEMBCK" | u32 version | u64 config_hash | u64 seed | str config_text
//   model:  u64 dim | f64 leaky_slope | u8 intra | u8 inter | u8 freeze_proj
//           u64 num_nodes | u64 n_content (u64 dim)* | u64 n_mpu (u32 a, u32 b)*
//           u64 n_tensor (str name | u64 rank | u64 dims* | f64 payload*)*
//   store:  u64 n_type (str label)* | u64 n_node (u32 type)* | tensor q
//           u64 n_block (u32 a | u32 b | tensor zi | u64 n | f64 beta*
//                        | per node, per side: u64 len (u32 id | u64 count)*)*
// A JSON manifest with the same header fields and tensor shapes is written
// next to the file as `<file>.json`. It is informational only.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "hetembed/autodiff.hpp"
#include "hetembed/common.hpp"
#include "hetembed/encoder.hpp"
#include "hetembed/hetgraph.hpp"
#include "hetembed/sampler.hpp"
#include "hetembed/store.hpp"
#include "json.hpp"

namespace hetembed {

inline constexpr char kCheckpointMagic[8] = {'H', 'E', 'T', 'E', 'M', 'B', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string config_text;
  Model model;
  EmbeddingStore store;
};

namespace ckpt_detail {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    buf_.append(s);
  }
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  void tensor(const ad::Tensor& t) {
    u64(t.rank());
    for (auto d : t.shape()) u64(d);
    for (double x : t.values()) f64(x);
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string bytes, std::string source) : buf_(std::move(bytes)), src_(std::move(source)) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf_[pos_++])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t count() {
    const auto n = u64();
    if (n > buf_.size()) fail("implausible element count");
    return static_cast<std::size_t>(n);
  }
  std::string str() {
    const auto n = count();
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  ad::Tensor tensor() {
    const auto rank = count();
    if (rank > 2) fail("tensor rank " + std::to_string(rank) + " is not supported");
    ad::Shape shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
      d = count();
      n *= d;
    }
    need(n * 8);
    ad::Tensor t(shape);
    for (std::size_t i = 0; i < n; ++i) t[i] = f64();
    return t;
  }
  bool done() const { return pos_ == buf_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(src_ + ": corrupt checkpoint at byte " + std::to_string(pos_) + ": " + what);
  }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) fail("unexpected end of file");
  }
  std::string buf_;
  std::string src_;
  std::size_t pos_ = 0;
};

inline std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

}  // namespace ckpt_detail

/// Serializes a checkpoint to bytes. Equal inputs give equal bytes.
inline std::string serialize(Checkpoint& ck) {
  ckpt_detail::Writer w;
  w.raw(kCheckpointMagic, sizeof kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u64(ck.config_hash);
  w.u64(ck.seed);
  w.str(ck.config_text);

  auto& m = ck.model;
  const auto& mc = m.config();
  w.u64(mc.dim);
  w.f64(mc.leaky_slope);
  w.u8(mc.intra_attention);
  w.u8(mc.inter_attention);
  w.u8(mc.freeze_projection);
  w.u64(m.node_embedding().value.shape()[0]);
  w.u64(m.num_projections());
  for (std::size_t n = 0; n < m.num_projections(); ++n) w.u64(m.projection(static_cast<ContentTypeId>(n)).weight.value.shape()[1]);
  w.u64(m.mpus().size());
  for (const auto& u : m.mpus()) {
    w.u32(u.first);
    w.u32(u.second);
  }
  const auto params = m.parameters();
  w.u64(params.size());
  for (auto* p : params) {
    w.str(p->name);
    w.tensor(p->value);
  }

  const auto& s = ck.store;
  w.u64(s.schema().num_types());
  for (const auto& t : s.schema().type_names()) w.str(t);
  w.u64(s.num_nodes());
  for (auto t : s.node_types()) w.u32(t);
  w.tensor(s.inter_attention());
  w.u64(s.num_mpus());
  for (std::size_t b = 0; b < s.num_mpus(); ++b) {
    const auto& blk = s.block(b);
    w.u32(blk.mpu.first);
    w.u32(blk.mpu.second);
    w.tensor(blk.zi);
    w.u64(blk.beta.size());
    for (double x : blk.beta) w.f64(x);
    const auto& table = blk.table;
    w.u64(table.size());
    for (NodeId v = 0; v < table.size(); ++v) {
      for (TypeId t : {blk.mpu.first, blk.mpu.second}) {
        const auto list = table.neighbors(v, t);
        w.u64(list.size());
        for (const auto& nb : list) {
          w.u32(nb.id);
          w.u64(nb.count);
        }
        if (blk.mpu.self_pair()) break;  // one list only
      }
    }
  }
  return w.bytes();
}

inline Checkpoint deserialize(std::string bytes, const std::string& source = "checkpoint") {
  ckpt_detail::Reader r(std::move(bytes), source);
  if (r.raw(sizeof kCheckpointMagic) != std::string(kCheckpointMagic, sizeof kCheckpointMagic))
    r.fail("bad magic bytes");
  const auto version = r.u32();
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version));
  Checkpoint ck;
  ck.config_hash = r.u64();
  ck.seed = r.u64();
  ck.config_text = r.str();

  ModelConfig mc;
  mc.dim = r.count();
  mc.leaky_slope = r.f64();
  mc.intra_attention = r.u8() != 0;
  mc.inter_attention = r.u8() != 0;
  mc.freeze_projection = r.u8() != 0;
  const auto num_nodes = r.count();
  std::vector<std::size_t> content_dims(r.count());
  for (auto& d : content_dims) d = r.count();
  std::vector<Mpu> mpus(r.count());
  for (auto& u : mpus) {
    u.first = r.u32();
    u.second = r.u32();
  }
  ck.model = Model(content_dims, num_nodes, mpus, mc, 0);
  auto params = ck.model.parameters();
  if (r.count() != params.size()) r.fail("parameter count does not match the model layout");
  for (auto* p : params) {
    const auto name = r.str();
    if (name != p->name) r.fail("expected parameter '" + p->name + "', found '" + name + "'");
    auto t = r.tensor();
    if (t.shape() != p->value.shape())
      r.fail("parameter '" + name + "' has shape " + ad::shape_str(t.shape()) + ", expected " +
             ad::shape_str(p->value.shape()));
    p->value = std::move(t);
    p->grad = ad::Tensor(p->value.shape());
  }

  std::vector<std::string> types(r.count());
  for (auto& t : types) t = r.str();
  std::vector<TypeId> node_types(r.count());
  for (auto& t : node_types) {
    t = r.u32();
    if (t >= types.size()) r.fail("node type out of range");
  }
  auto q = r.tensor();
  std::vector<EmbeddingStore::MpuBlock> blocks(r.count());
  for (auto& blk : blocks) {
    blk.mpu.first = r.u32();
    blk.mpu.second = r.u32();
    if (blk.mpu.first >= types.size() || blk.mpu.second >= types.size()) r.fail("MPU type out of range");
    blk.zi = r.tensor();
    blk.beta.resize(r.count());
    for (auto& b : blk.beta) b = r.f64();
    const auto n = r.count();
    blk.table = NeighborTable(blk.mpu, n);
    for (NodeId v = 0; v < n; ++v) {
      for (TypeId t : {blk.mpu.first, blk.mpu.second}) {
        std::vector<Neighbor> list(r.count());
        for (auto& nb : list) {
          nb.id = r.u32();
          nb.count = r.u64();
        }
        blk.table.set(v, t, std::move(list));
        if (blk.mpu.self_pair()) break;
      }
    }
  }
  if (!r.done()) r.fail("trailing bytes");
  std::vector<Mpu> schema_mpus;
  for (const auto& b : blocks) schema_mpus.push_back(b.mpu);
  ck.store = EmbeddingStore(Schema(types, std::move(schema_mpus)), std::move(node_types), mc.dim, std::move(q),
                            std::move(blocks));
  return ck;
}

/// Human-readable summary of a checkpoint.
inline nlohmann::ordered_json manifest(Checkpoint& ck) {
  nlohmann::ordered_json j;
  j["format"] = "hetembed-checkpoint";
  j["version"] = kCheckpointVersion;
  j["config_hash"] = ckpt_detail::hex(ck.config_hash);
  j["seed"] = ck.seed;
  j["dim"] = ck.model.dim();
  j["nodes"] = ck.store.num_nodes();
  j["types"] = ck.store.schema().type_names();
  auto& mpus = j["mpus"] = nlohmann::ordered_json::array();
  for (std::size_t m = 0; m < ck.store.num_mpus(); ++m) mpus.push_back(ck.store.schema().mpu_name(ck.store.mpu(m)));
  auto& tensors = j["parameters"] = nlohmann::ordered_json::array();
  for (auto* p : ck.model.parameters()) tensors.push_back({{"name", p->name}, {"shape", p->value.shape()}});
  j["config"] = ck.config_text;
  return j;
}

inline void save_checkpoint(const std::filesystem::path& file, Checkpoint& ck) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  const auto bytes = serialize(ck);
  {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot write " + file.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  std::ofstream js(file.string() + ".json", std::ios::binary);
  js << manifest(ck).dump(2) << '\n';
}

inline Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + file.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(std::move(bytes), file.string());
}

}  // namespace hetembed
