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

#include "icrl/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "icrl/causal/serialize.hpp"
#include "icrl/ivae/checkpoint.hpp"
#include "icrl/numkit/mlp_json.hpp"
#include "icrl/predictor/checkpoint.hpp"

namespace icrl::harness {

ExperimentConfig ExperimentConfig::defaults(semgen::MixingKind kind) {
  ExperimentConfig c;
  c.mixing = kind;
  const std::size_t hidden = kind == semgen::MixingKind::nonlinear ? 6 : 0;
  c.ivae.hidden = hidden;
  c.predictor.hidden = hidden;
  c.irm.train.hidden = hidden;
  return c;
}

void ExperimentConfig::validate() const {
  if (train_sigma3.size() < 2) throw std::invalid_argument("need at least 2 training environments");
  if (std::find(train_sigma3.begin(), train_sigma3.end(), test_sigma3) != train_sigma3.end())
    throw std::invalid_argument("test sigma3 must differ from every training sigma3");
  if (seeds.empty()) throw std::invalid_argument("need at least one seed");
  if (n_per_env == 0) throw std::invalid_argument("n_per_env must be positive");
  if (energy_grid < 2) throw std::invalid_argument("energy_grid must be at least 2");
  for (const auto& e : train_envs()) e.validate();
  test_env().validate();
  ivae.validate();
  causal.validate();
  predictor.validate();
  irm.validate();
}

std::vector<semgen::EnvSpec> ExperimentConfig::train_envs() const {
  std::vector<semgen::EnvSpec> out;
  for (double s3 : train_sigma3) out.push_back({sigma1, sigma2, s3});
  return out;
}

semgen::EnvSpec ExperimentConfig::test_env() const { return {sigma1, sigma2, test_sigma3}; }

namespace {

nlohmann::json strip(nlohmann::json j) {
  j.erase("seed");
  j.erase("task");
  return j;
}

void reject_seed_and_task(const nlohmann::json& j, const std::string& section) {
  for (const char* key : {"seed", "task"})
    if (j.contains(key))
      throw std::invalid_argument("'" + section + "." + key + "' is not configurable; set it at the top level");
}

}  // namespace

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json irm = strip(predictor::config_to_json(c.irm.train));
  irm["penalty_weight"] = c.irm.penalty_weight;
  irm["warmup_epochs"] = c.irm.warmup_epochs;
  return {{"mixing", semgen::to_string(c.mixing)},
          {"task", semgen::to_string(c.task)},
          {"sigma1", c.sigma1},
          {"sigma2", c.sigma2},
          {"train_sigma3", c.train_sigma3},
          {"test_sigma3", c.test_sigma3},
          {"n_per_env", c.n_per_env},
          {"seeds", c.seeds},
          {"phase2", c.phase2},
          {"run_erm", c.run_erm},
          {"run_irm", c.run_irm},
          {"energy_grid", c.energy_grid},
          {"ivae", strip(ivae::config_to_json(c.ivae))},
          {"causal", strip(causal::config_to_json(c.causal))},
          {"predictor", strip(predictor::config_to_json(c.predictor))},
          {"irm", irm},
          {"output_dir", c.output_dir}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  static const std::set<std::string> known = {
      "mixing", "task",     "sigma1",  "sigma2",      "train_sigma3", "test_sigma3", "n_per_env",  "seeds",    "phase2",
      "run_erm", "run_irm", "energy_grid", "ivae",    "causal",       "predictor",   "irm",        "output_dir"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  try {
    const auto kind = semgen::mixing_kind_from_string(j.value("mixing", std::string("nonlinear")));
    ExperimentConfig c = ExperimentConfig::defaults(kind);
    if (j.contains("task")) c.task = semgen::task_from_string(j.at("task").get<std::string>());
    c.sigma1 = j.value("sigma1", c.sigma1);
    c.sigma2 = j.value("sigma2", c.sigma2);
    c.train_sigma3 = j.value("train_sigma3", c.train_sigma3);
    c.test_sigma3 = j.value("test_sigma3", c.test_sigma3);
    c.n_per_env = j.value("n_per_env", c.n_per_env);
    c.seeds = j.value("seeds", c.seeds);
    c.phase2 = j.value("phase2", c.phase2);
    c.run_erm = j.value("run_erm", c.run_erm);
    c.run_irm = j.value("run_irm", c.run_irm);
    c.energy_grid = j.value("energy_grid", c.energy_grid);
    c.output_dir = j.value("output_dir", c.output_dir);
    // Sections merge over the mixing defaults.
    auto merged = [](nlohmann::json base, const nlohmann::json& over, const std::string& name) {
      if (!over.is_object()) throw std::invalid_argument("'" + name + "' must be a JSON object");
      reject_seed_and_task(over, name);
      base.update(over);
      return base;
    };
    if (j.contains("ivae")) c.ivae = ivae::config_from_json(merged(ivae::config_to_json(c.ivae), j.at("ivae"), "ivae"));
    if (j.contains("causal"))
      c.causal = causal::config_from_json(merged(causal::config_to_json(c.causal), j.at("causal"), "causal"));
    if (j.contains("predictor"))
      c.predictor = predictor::config_from_json(
          merged(predictor::config_to_json(c.predictor), j.at("predictor"), "predictor"));
    if (j.contains("irm")) {
      nlohmann::json over = j.at("irm");
      nlohmann::json base = predictor::config_to_json(c.irm.train);
      if (over.is_object()) {
        c.irm.penalty_weight = over.value("penalty_weight", c.irm.penalty_weight);
        c.irm.warmup_epochs = over.value("warmup_epochs", c.irm.warmup_epochs);
        over.erase("penalty_weight");
        over.erase("warmup_epochs");
      }
      c.irm.train = predictor::config_from_json(merged(base, over, "irm"));
    }
    c.ivae.task = c.task;
    c.predictor.task = c.task;
    c.irm.train.task = c.task;
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed experiment config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& c) {
  nlohmann::json j = to_json(c);
  j.erase("seeds");
  j.erase("output_dir");
  return numkit::json_fingerprint(j);
}

SeedPlan::SeedPlan(std::uint64_t seed)
    : mixing(numkit::derive_seed(seed, 1)),
      train_data(numkit::derive_seed(seed, 2)),
      test_data(numkit::derive_seed(seed, 3)),
      ivae(numkit::derive_seed(seed, 4)),
      causal(numkit::derive_seed(seed, 5)),
      phi(numkit::derive_seed(seed, 6)),
      w(numkit::derive_seed(seed, 7)),
      erm(numkit::derive_seed(seed, 8)),
      irm(numkit::derive_seed(seed, 9)),
      ablation(numkit::derive_seed(seed, 10)) {}

}  // namespace icrl::harness
