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

#include "icrl/causal/serialize.hpp"

#include <set>

namespace icrl::causal {

nlohmann::json to_json(const CITestResult& r) {
  return {{"statistic", r.statistic},
          {"p_value", r.p_value},
          {"independent", r.independent},
          {"degenerate", r.degenerate},
          {"method", r.method}};
}

nlohmann::json to_json(const AnmResult& r) {
  return {{"preferred", to_string(r.preferred)},
          {"dependence", to_json(r.dependence)},
          {"x_to_y", to_json(r.x_to_y)},
          {"y_to_x", to_json(r.y_to_x)},
          {"deterministic_x_to_y", r.deterministic_x_to_y},
          {"deterministic_y_to_x", r.deterministic_y_to_x},
          {"reason", r.reason}};
}

namespace {

void put(nlohmann::json& j, const char* key, const std::optional<CITestResult>& r) {
  if (r) j[key] = to_json(*r);
}

}  // namespace

nlohmann::json to_json(const StructureVerdict& v) {
  const Evidence& ev = v.evidence;
  nlohmann::json e = {{"x_y", to_json(ev.x_y)}, {"x_e", to_json(ev.x_e)}, {"e_y", to_json(ev.e_y)}};
  put(e, "x_y_given_e", ev.x_y_given_e);
  put(e, "x_e_given_y", ev.x_e_given_y);
  put(e, "y_e_given_x", ev.y_e_given_x);
  if (ev.anm) e["anm"] = to_json(*ev.anm);
  if (ev.delta)
    e["delta"] = {{"x_to_y", ev.delta->delta_x_to_y},
                  {"y_to_x", ev.delta->delta_y_to_x},
                  {"preferred", to_string(ev.delta->preferred())}};
  if (ev.delta_error) e["delta_error"] = *ev.delta_error;
  nlohmann::json j = {{"status", to_string(v.status)}, {"rule", v.rule}, {"evidence", e}, {"trail", v.trail}};
  j["structure"] = v.tag ? nlohmann::json(semgen::to_string(*v.tag)) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const ParentReport& r) {
  nlohmann::json verdicts = nlohmann::json::array();
  for (const ParentVerdict& p : r.verdicts)
    verdicts.push_back({{"latent_index", p.latent_index},
                        {"is_parent", p.is_parent},
                        {"matched_rule", p.matched_rule},
                        {"verdict", to_json(p.verdict)}});
  return {{"parents", r.parents}, {"fallback_used", r.fallback_used}, {"warning", r.warning}, {"verdicts", verdicts}};
}

nlohmann::json config_to_json(const CIConfig& c) {
  return {{"alpha", c.alpha},       {"permutations", c.permutations}, {"max_rows", c.max_rows},
          {"min_rows", c.min_rows}, {"min_env_rows", c.min_env_rows}, {"seed", c.seed}};
}

CIConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("causal config must be a JSON object");
  static const std::set<std::string> known = {"alpha", "permutations", "max_rows", "min_rows", "min_env_rows", "seed"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw std::invalid_argument("unknown causal config key '" + key + "'");
  CIConfig c;
  try {
    c.alpha = j.value("alpha", c.alpha);
    c.permutations = j.value("permutations", c.permutations);
    c.max_rows = j.value("max_rows", c.max_rows);
    c.min_rows = j.value("min_rows", c.min_rows);
    c.min_env_rows = j.value("min_env_rows", c.min_env_rows);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed causal config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace icrl::causal
