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

#include "fedsparse/sparsify.hpp"
#include "json.hpp"

namespace fedsparse {

// {"dim", "round", "client_id", "entries", "indices": [...], "values": [...]}
nlohmann::json update_to_json(const SparseUpdate& u);
SparseUpdate update_from_json(const nlohmann::json& doc);

}  // namespace fedsparse
