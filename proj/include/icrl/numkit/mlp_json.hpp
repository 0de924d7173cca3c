/*
 * Copyright 2026 The icrl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string>

#include "icrl/numkit/mlp.hpp"
#include "json.hpp"

namespace icrl::numkit {

/// {"layer_sizes": [...], "activations": [...], "parameters": [{"shape": [r, c], "values": [...]}, ...]}
nlohmann::json mlp_to_json(const Mlp& net);
/// Throws std::invalid_argument on malformed input or shape disagreement.
Mlp mlp_from_json(const nlohmann::json& j);

/// FNV-1a over the compact dump of `j`; stable across platforms.
std::string json_fingerprint(const nlohmann::json& j);

}  // namespace icrl::numkit
