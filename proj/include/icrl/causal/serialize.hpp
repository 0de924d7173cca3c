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

#include "icrl/causal/rules.hpp"
#include "json.hpp"

namespace icrl::causal {

nlohmann::json to_json(const CITestResult& r);
nlohmann::json to_json(const AnmResult& r);
nlohmann::json to_json(const StructureVerdict& v);
/// {"parents", "fallback_used", "warning", "verdicts": [...]}
nlohmann::json to_json(const ParentReport& r);

nlohmann::json config_to_json(const CIConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
CIConfig config_from_json(const nlohmann::json& j);

}  // namespace icrl::causal
