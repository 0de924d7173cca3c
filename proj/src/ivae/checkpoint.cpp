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

#include "icrl/ivae/checkpoint.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "icrl/numkit/mlp_json.hpp"

namespace icrl::ivae {

namespace {
constexpr const char* kFormat = "icrl-ivae/1";
}

nlohmann::json config_to_json(const IvaeConfig& c) {
  return {{"latent_dim", c.latent_dim},
          {"hidden", c.hidden},
          {"decoder_variance", c.decoder_variance},
          {"prior", to_string(c.prior)},
          {"task", semgen::to_string(c.task)},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed}};
}

IvaeConfig config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"latent_dim", "hidden", "decoder_variance", "prior", "task",
                                              "epochs", "batch_size", "learning_rate", "seed"};
  if (!j.is_object()) throw std::invalid_argument("ivae config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw std::invalid_argument("unknown ivae config key '" + key + "'");
  IvaeConfig c;
  try {
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    c.hidden = j.value("hidden", c.hidden);
    c.decoder_variance = j.value("decoder_variance", c.decoder_variance);
    if (j.contains("prior")) c.prior = prior_mode_from_string(j.at("prior").get<std::string>());
    if (j.contains("task")) c.task = semgen::task_from_string(j.at("task").get<std::string>());
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed ivae config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json model_to_json(const IvaeModel& model) {
  const nlohmann::json cfg = config_to_json(model.config());
  nlohmann::json nets = {{"encoder", numkit::mlp_to_json(model.encoder_net())},
                         {"decoder", numkit::mlp_to_json(model.decoder_net())}};
  if (model.prior_net()) nets["prior"] = numkit::mlp_to_json(*model.prior_net());
  return {{"format", kFormat},
          {"config", cfg},
          {"config_hash", numkit::json_fingerprint(cfg)},
          {"obs_dim", model.obs_dim()},
          {"num_envs", model.num_envs()},
          {"networks", nets}};
}

IvaeModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != kFormat) throw std::invalid_argument("not an iVAE checkpoint");
    const nlohmann::json& cfg_json = j.at("config");
    if (numkit::json_fingerprint(cfg_json) != j.at("config_hash").get<std::string>())
      throw std::invalid_argument("checkpoint config hash mismatch");
    const IvaeConfig cfg = config_from_json(cfg_json);
    const auto& nets = j.at("networks");
    std::optional<numkit::Mlp> prior;
    if (nets.contains("prior")) prior = numkit::mlp_from_json(nets.at("prior"));
    return IvaeModel(cfg, j.at("obs_dim").get<std::size_t>(), j.at("num_envs").get<std::size_t>(), std::move(prior),
                     numkit::mlp_from_json(nets.at("encoder")), numkit::mlp_from_json(nets.at("decoder")));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed iVAE checkpoint: ") + e.what());
  }
}

void save_checkpoint(const IvaeModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out << model_to_json(model).dump(1) << '\n';
}

IvaeModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace icrl::ivae
