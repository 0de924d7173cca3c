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

#include "icrl/numkit/mlp_json.hpp"

#include <cstdio>
#include <stdexcept>

namespace icrl::numkit {

nlohmann::json mlp_to_json(const Mlp& net) {
  nlohmann::json j;
  j["layer_sizes"] = net.spec().layer_sizes;
  auto& acts = j["activations"] = nlohmann::json::array();
  for (Activation a : net.spec().activations) acts.push_back(to_string(a));
  auto& params = j["parameters"] = nlohmann::json::array();
  for (const Tensor& p : net.parameters()) params.push_back({{"shape", p.shape()}, {"values", p.values()}});
  return j;
}

Mlp mlp_from_json(const nlohmann::json& j) {
  try {
    MlpSpec spec;
    spec.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    for (const auto& a : j.at("activations")) spec.activations.push_back(activation_from_string(a.get<std::string>()));
    std::vector<Tensor> params;
    for (const auto& p : j.at("parameters")) {
      const auto shape = p.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2) throw std::invalid_argument("parameter shape must have two entries");
      params.emplace_back(shape[0], shape[1], p.at("values").get<std::vector<double>>());
    }
    return Mlp(std::move(spec), std::move(params));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed network JSON: ") + e.what());
  }
}

std::string json_fingerprint(const nlohmann::json& j) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace icrl::numkit
