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

// End-to-end runs: simulate, Phase 1 (iVAE), Phase 2 (parent discovery),
// Phase 3 (Phi and w), baselines and the analysis artifacts. Each phase is
// callable on its own so staged CLI runs reproduce the monolithic run.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "icrl/causal/rules.hpp"
#include "icrl/harness/config.hpp"
#include "icrl/ivae/ivae.hpp"
#include "icrl/predictor/predictor.hpp"
#include "json.hpp"

namespace icrl::harness {

/// Any failure inside a phase, tagged with the phase name.
class PhaseError : public std::runtime_error {
 public:
  PhaseError(std::string phase, const std::string& what);
  const std::string& phase() const { return phase_; }

 private:
  std::string phase_;
};

struct SimulatedData {
  semgen::MixingSpec mixing;
  semgen::Dataset train;
  /// Single held-out environment, labelled after the training environments.
  semgen::Dataset test;
};

SimulatedData simulate(const ExperimentConfig& cfg, std::uint64_t seed);

struct Phase1Result {
  ivae::IvaeTrainingResult training;
  ivae::LatentPosterior posterior;
  /// Present when the data carries the true latents.
  std::optional<ivae::MccResult> mcc;
};

Phase1Result run_phase1(const ExperimentConfig& cfg, std::uint64_t seed, const semgen::Dataset& train);

/// Parent discovery on the posterior means. An empty parent set is replaced by
/// the fallback choice; with phase 2 disabled every latent is a parent.
causal::ParentReport run_phase2(const ExperimentConfig& cfg, std::uint64_t seed, const numkit::Tensor& latents,
                                const semgen::Dataset& train);

struct Phase3Result {
  std::vector<std::size_t> inputs;
  predictor::PhiFit phi;
  predictor::WFit w;
  predictor::EvalResult train;
  predictor::EvalResult test;
};

/// Trains Phi on latents[:, inputs] and w on the same targets, then evaluates
/// w(Phi(O)) on both datasets.
Phase3Result run_phase3(const ExperimentConfig& cfg, std::uint64_t phi_seed, std::uint64_t w_seed,
                        const semgen::Dataset& train, const semgen::Dataset& test, const numkit::Tensor& latents,
                        const std::vector<std::size_t>& inputs);

struct BaselineRun {
  predictor::BaselineFit fit;
  predictor::EvalResult test;
};

/// Phi output swept over a grid of true latents mapped through the mixing.
struct EnergyGrid {
  std::vector<double> x1;
  std::vector<double> x2;
  /// Row i * x2.size() + j holds Phi(g(x1[i], x2[j])).
  numkit::Tensor phi;
  /// Mean range of Phi along one coordinate with the other held fixed,
  /// summed over Phi outputs.
  double x1_sensitivity = 0.0;
  double x2_sensitivity = 0.0;
};

/// Grid points sit at evenly spaced quantiles in [0.05, 0.95] of each true
/// latent's training marginal, so both sweeps cover the same quantile range.
EnergyGrid energy_sweep(const predictor::PhiModel& phi, const semgen::MixingSpec& mixing,
                        const numkit::Tensor& x_true, std::size_t grid);

struct SeedRun {
  std::uint64_t seed = 0;
  SimulatedData data;
  Phase1Result phase1;
  causal::ParentReport phase2;
  Phase3Result phase3;
  std::optional<Phase3Result> non_cause;
  std::optional<BaselineRun> erm;
  std::optional<BaselineRun> irm;
  std::optional<EnergyGrid> energy;
  /// Deterministic per-seed report.
  nlohmann::json report;
  /// Wall-clock seconds per phase, kept apart so the report stays byte-stable.
  nlohmann::json timing;
};

SeedRun run_seed(const ExperimentConfig& cfg, std::uint64_t seed);

nlohmann::json to_json(const predictor::EvalResult& r);
nlohmann::json phase1_json(const Phase1Result& r);
nlohmann::json phase3_json(const Phase3Result& r);

}  // namespace icrl::harness
