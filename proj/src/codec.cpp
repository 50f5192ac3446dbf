// Copyright 2026 The fedsparse Authors. All Rights Reserved.
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
// =============================================================================

#include "fedsparse/codec.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "fedsparse/error.hpp"

namespace fedsparse::codec {

namespace {

constexpr std::uint8_t kMagic[4] = {'F', 'S', 'U', '1'};

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <class T>
T get(std::span<const std::uint8_t> in, std::size_t off) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in[off + i]) << (8 * i));
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode(const SparseUpdate& u) {
  validate(u);
  if (!u.indices.empty() && u.indices.back() > std::numeric_limits<std::uint32_t>::max())
    throw InvalidArgument("index " + std::to_string(u.indices.back()) + " does not fit the 32-bit wire index");
  std::vector<std::uint8_t> out;
  out.reserve(encoded_size(u.nnz()));
  for (auto c : kMagic) out.push_back(c);
  out.push_back(kVersion);
  put<std::uint64_t>(out, u.dim);
  put<std::uint64_t>(out, u.nnz());
  put<std::uint32_t>(out, u.round);
  put<std::uint16_t>(out, u.client_id);
  for (auto j : u.indices) put<std::uint32_t>(out, static_cast<std::uint32_t>(j));
  for (double x : u.values) {
    const auto f = static_cast<float>(x);
    if (!std::isfinite(f)) throw InvalidArgument("value " + std::to_string(x) + " is not representable in binary32");
    put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

SparseUpdate decode(std::span<const std::uint8_t> bytes) {
  const std::size_t n = bytes.size();
  for (std::size_t i = 0; i < 4; ++i) {
    if (i >= n) throw CodecError("truncated: expected " + std::to_string(kHeaderBytes) + " header bytes, got " +
                                 std::to_string(n), n);
    if (bytes[i] != kMagic[i]) throw CodecError("bad magic, expected \"FSU1\"", 0);
  }
  if (n < kHeaderBytes)
    throw CodecError("truncated: expected " + std::to_string(kHeaderBytes) + " header bytes, got " + std::to_string(n),
                     n);
  if (bytes[4] != kVersion) throw CodecError("unsupported version " + std::to_string(bytes[4]), 4);

  SparseUpdate u;
  u.dim = get<std::uint64_t>(bytes, 5);
  const auto m = get<std::uint64_t>(bytes, 13);
  u.round = get<std::uint32_t>(bytes, 21);
  u.client_id = get<std::uint16_t>(bytes, 25);
  if (m > u.dim)
    throw CodecError("entry count " + std::to_string(m) + " exceeds dim " + std::to_string(u.dim), 13);
  if (m > (std::numeric_limits<std::size_t>::max() - kHeaderBytes) / kEntryBytes)
    throw CodecError("entry count " + std::to_string(m) + " overflows", 13);
  const std::size_t expected = encoded_size(static_cast<std::size_t>(m));
  if (n < expected)
    throw CodecError("truncated: expected " + std::to_string(expected) + " bytes, got " + std::to_string(n), n);
  if (n > expected)
    throw CodecError("trailing bytes: expected " + std::to_string(expected) + " bytes, got " + std::to_string(n),
                     expected);

  u.indices.resize(m);
  u.values.resize(m);
  const std::size_t values_at = kHeaderBytes + 4 * m;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t off = kHeaderBytes + 4 * k;
    const auto j = get<std::uint32_t>(bytes, off);
    if (j >= u.dim) throw CodecError("index " + std::to_string(j) + " >= dim " + std::to_string(u.dim), off);
    if (k > 0 && j <= u.indices[k - 1]) throw CodecError("indices not strictly increasing", off);
    u.indices[k] = j;
  }
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t off = values_at + 4 * k;
    const float f = std::bit_cast<float>(get<std::uint32_t>(bytes, off));
    if (!std::isfinite(f)) throw CodecError("non-finite value", off);
    u.values[k] = f;
  }
  return u;
}

SparseUpdate quantized(SparseUpdate u) {
  for (auto& x : u.values) x = static_cast<double>(static_cast<float>(x));
  return u;
}

std::size_t comm_bytes(std::span<const SparseUpdate> updates) {
  std::size_t total = 0;
  for (const auto& u : updates) total += encoded_size(u.nnz());
  return total;
}

void write_file(const std::filesystem::path& path, const SparseUpdate& u) {
  const auto bytes = encode(u);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

SparseUpdate read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

}  // namespace fedsparse::codec
