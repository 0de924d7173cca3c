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

#include <string>

#include "icrl/ivae/ivae.hpp"
#include "json.hpp"

namespace icrl::ivae {

nlohmann::json config_to_json(const IvaeConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
IvaeConfig config_from_json(const nlohmann::json& j);

/// {"format", "config", "config_hash", "obs_dim", "num_envs", "networks": {...}}
nlohmann::json model_to_json(const IvaeModel& model);
/// Throws std::invalid_argument if the stored hash does not match the config.
IvaeModel model_from_json(const nlohmann::json& j);

void save_checkpoint(const IvaeModel& model, const std::string& path);
IvaeModel load_checkpoint(const std::string& path);

}  // namespace icrl::ivae
