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
#include <vector>

#include "icrl/predictor/predictor.hpp"
#include "json.hpp"

namespace icrl::predictor {

nlohmann::json config_to_json(const TrainConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig config_from_json(const nlohmann::json& j);

/// Composed predictor plus the latent indices Phi was trained on.
struct PredictorBundle {
  PhiModel phi;
  WModel w;
  std::vector<std::size_t> parents;
};

/// {"format": "icrl-predictor/1", "task", "parents", "networks": {"phi", "w"}}
nlohmann::json bundle_to_json(const PredictorBundle& b);
PredictorBundle bundle_from_json(const nlohmann::json& j);

void save_bundle(const PredictorBundle& b, const std::string& path);
PredictorBundle load_bundle(const std::string& path);

}  // namespace icrl::predictor
