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

// Experiment configuration for the end-to-end runs and the seed plan that
// ties every phase's randomness to one experiment seed.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icrl/causal/ci_tests.hpp"
#include "icrl/ivae/ivae.hpp"
#include "icrl/predictor/predictor.hpp"
#include "icrl/semgen/semgen.hpp"
#include "json.hpp"

namespace icrl::harness {

struct ExperimentConfig {
  semgen::MixingKind mixing = semgen::MixingKind::nonlinear;
  semgen::Task task = semgen::Task::regression;
  double sigma1 = 1.0;
  double sigma2 = 0.0;
  std::vector<double> train_sigma3{0.2, 2.0};
  double test_sigma3 = 100.0;
  std::size_t n_per_env = 1000;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};

  /// Off: Phase 3 regresses on every latent (diagnostic ablation).
  bool phase2 = true;
  bool run_erm = true;
  bool run_irm = true;
  /// Side points of the Phi sweep over (X1, X2).
  std::size_t energy_grid = 50;

  // Per-phase settings. Their seed fields are overwritten from the seed plan.
  ivae::IvaeConfig ivae;
  causal::CIConfig causal;
  predictor::TrainConfig predictor;
  predictor::BaselineConfig irm;

  std::string output_dir = "out";

  /// Defaults for a mixing kind: linear networks (no hidden layer) for the
  /// identity and linear maps, one ReLU layer of 6 for the nonlinear map.
  static ExperimentConfig defaults(semgen::MixingKind kind);

  /// Throws std::invalid_argument: fewer than 2 training environments, a
  /// test sigma3 equal to a training one, no seeds, or bad phase settings.
  void validate() const;

  std::vector<semgen::EnvSpec> train_envs() const;
  semgen::EnvSpec test_env() const;
};

/// Every field, including the per-phase sections. Round-trips through from_json.
nlohmann::json to_json(const ExperimentConfig& c);
/// Starts from defaults(mixing) and applies the keys present; rejects unknown
/// keys and per-phase "seed" / "task" keys (both are set at the top level).
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
/// Fingerprint of to_json(c) without the seed list and output directory, so
/// per-seed reports of one experiment share it.
std::string config_hash(const ExperimentConfig& c);

/// Seeds for each step of one run, all derived from the experiment seed.
struct SeedPlan {
  std::uint64_t mixing, train_data, test_data, ivae, causal, phi, w, erm, irm, ablation;
  explicit SeedPlan(std::uint64_t seed);
};

}  // namespace icrl::harness
