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

#include "fedsparse/update_json.hpp"

#include <limits>

#include "fedsparse/error.hpp"

namespace fedsparse {

nlohmann::json update_to_json(const SparseUpdate& u) {
  return {{"dim", u.dim},         {"round", u.round},     {"client_id", u.client_id},
          {"entries", u.nnz()},   {"indices", u.indices}, {"values", u.values}};
}

SparseUpdate update_from_json(const nlohmann::json& doc) {
  try {
    SparseUpdate u;
    u.dim = doc.at("dim").get<std::uint64_t>();
    const auto round = doc.at("round").get<std::uint64_t>();
    const auto client = doc.at("client_id").get<std::uint64_t>();
    if (round > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("round does not fit in 32 bits");
    if (client > std::numeric_limits<std::uint16_t>::max()) throw InvalidArgument("client_id does not fit in 16 bits");
    u.round = static_cast<std::uint32_t>(round);
    u.client_id = static_cast<std::uint16_t>(client);
    u.indices = doc.at("indices").get<std::vector<std::uint64_t>>();
    u.values = doc.at("values").get<std::vector<double>>();
    if (doc.contains("entries") && doc.at("entries").get<std::size_t>() != u.indices.size())
      throw InvalidArgument("entries does not match the number of indices");
    validate(u);
    return u;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed update document: ") + e.what());
  }
}

}  // namespace fedsparse
