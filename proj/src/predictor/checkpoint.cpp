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

#include "icrl/predictor/checkpoint.hpp"

#include <fstream>
#include <set>

#include "icrl/numkit/mlp_json.hpp"

namespace icrl::predictor {

namespace {
constexpr const char* kFormat = "icrl-predictor/1";
}

nlohmann::json config_to_json(const TrainConfig& c) {
  return {{"hidden", c.hidden},         {"epochs", c.epochs}, {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate}, {"seed", c.seed},     {"task", semgen::to_string(c.task)}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("predictor config must be a JSON object");
  static const std::set<std::string> known = {"hidden", "epochs", "batch_size", "learning_rate", "seed", "task"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw std::invalid_argument("unknown predictor config key '" + key + "'");
  TrainConfig c;
  try {
    c.hidden = j.value("hidden", c.hidden);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.seed = j.value("seed", c.seed);
    if (j.contains("task")) c.task = semgen::task_from_string(j.at("task").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed predictor config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json bundle_to_json(const PredictorBundle& b) {
  return {{"format", kFormat},
          {"task", semgen::to_string(b.w.task)},
          {"parents", b.parents},
          {"networks", {{"phi", numkit::mlp_to_json(b.phi.net)}, {"w", numkit::mlp_to_json(b.w.net)}}}};
}

PredictorBundle bundle_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != kFormat) throw std::invalid_argument("not a predictor checkpoint");
    PredictorBundle b;
    b.phi.net = numkit::mlp_from_json(j.at("networks").at("phi"));
    b.w.net = numkit::mlp_from_json(j.at("networks").at("w"));
    b.w.task = semgen::task_from_string(j.at("task").get<std::string>());
    b.parents = j.at("parents").get<std::vector<std::size_t>>();
    if (b.phi.output_dim() != b.w.net.spec().input_dim() || b.parents.size() != b.phi.output_dim())
      throw std::invalid_argument("predictor checkpoint: Phi, w and parent list disagree");
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed predictor checkpoint: ") + e.what());
  }
}

void save_bundle(const PredictorBundle& b, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out << bundle_to_json(b).dump(1) << '\n';
}

PredictorBundle load_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  return bundle_from_json(j);
}

}  // namespace icrl::predictor
