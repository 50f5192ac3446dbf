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

#pragma once

// FSU1 wire format, all fields little-endian:
//
//   offset  size  field
//   0       4     magic "FSU1"
//   4       1     version (1)
//   5       8     dim (u64)
//   13      8     entry count m (u64)
//   21      4     round (u32)
//   25      2     client_id (u16)
//   27      4m    indices (u32, strictly increasing, < dim)
//   27+4m   4m    values (IEEE-754 binary32)

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fedsparse/sparsify.hpp"

namespace fedsparse::codec {

inline constexpr std::size_t kHeaderBytes = 27;
inline constexpr std::size_t kEntryBytes = 8;
inline constexpr std::uint8_t kVersion = 1;

constexpr std::size_t encoded_size(std::size_t entries) { return kHeaderBytes + kEntryBytes * entries; }

std::vector<std::uint8_t> encode(const SparseUpdate& u);

// Throws CodecError carrying the failing byte offset.
SparseUpdate decode(std::span<const std::uint8_t> bytes);

// u with every value rounded through binary32, i.e. what decode(encode(u)) yields.
SparseUpdate quantized(SparseUpdate u);

// Total encoded length of a batch of uploads.
std::size_t comm_bytes(std::span<const SparseUpdate> updates);

void write_file(const std::filesystem::path& path, const SparseUpdate& u);
SparseUpdate read_file(const std::filesystem::path& path);

}  // namespace fedsparse::codec
