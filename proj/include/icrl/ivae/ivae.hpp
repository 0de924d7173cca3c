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

// Identifiable VAE with a conditionally factorized Gaussian prior.
//
//   prior      p(X | Y, E)    = N(0, diag(exp(lambda(Y, E))))
//   decoder    p(O | X)       = N(f(X), decoder_variance * I)
//   posterior  q(X | O, Y, E) = N(mu, diag(exp(log_variance)))
//
// Sign convention for ElboBreakdown, all per-row averages:
//   reconstruction = E_q[log p(O | X)]          (one reparameterized sample)
//   prior_term     = E_q[log p(X | Y, E)]       (same sample)
//   entropy_term   = E_q[log q(X | O, Y, E)]    (closed form, = -entropy)
//   total          = reconstruction + prior_term - entropy_term

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "icrl/numkit/mlp.hpp"
#include "icrl/numkit/tensor.hpp"
#include "icrl/semgen/semgen.hpp"

namespace icrl::ivae {

using numkit::Tensor;

/// `unconditional` is the plain-VAE ablation: standard-normal prior and an
/// encoder that sees O only.
enum class PriorMode { conditional, unconditional };
std::string to_string(PriorMode m);
PriorMode prior_mode_from_string(const std::string& s);

struct IvaeConfig {
  std::size_t latent_dim = 2;
  /// Width of the single ReLU hidden layer in every network; 0 gives linear networks.
  std::size_t hidden = 6;
  double decoder_variance = 0.01;
  PriorMode prior = PriorMode::conditional;
  /// Regression feeds Y raw to the conditioning vector, classification one-hot.
  semgen::Task task = semgen::Task::regression;

  std::size_t epochs = 300;
  std::size_t batch_size = 64;
  double learning_rate = 5e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

class IvaeModel {
 public:
  /// Fresh Glorot-initialized networks.
  IvaeModel(const IvaeConfig& config, std::size_t obs_dim, std::size_t num_envs);
  /// Assembles a model from existing networks (checkpoint loading). `prior`
  /// must be present exactly when the config asks for a conditional prior.
  IvaeModel(const IvaeConfig& config, std::size_t obs_dim, std::size_t num_envs, std::optional<numkit::Mlp> prior,
            numkit::Mlp encoder, numkit::Mlp decoder);

  const IvaeConfig& config() const { return config_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t num_envs() const { return num_envs_; }
  std::size_t latent_dim() const { return config_.latent_dim; }
  /// Columns of the (Y, E) conditioning vector.
  std::size_t cond_dim() const;

  const std::optional<numkit::Mlp>& prior_net() const { return prior_; }
  const numkit::Mlp& encoder_net() const { return encoder_; }
  const numkit::Mlp& decoder_net() const { return decoder_; }

  /// Every trainable tensor: prior (if any), then encoder, then decoder.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;

  /// [Y or one-hot(Y), one-hot(E)]. Throws ShapeError / invalid_argument on
  /// misaligned rows or labels outside the training range.
  Tensor encode_conditioning(const Tensor& Y, std::span<const int> E) const;
  /// Encoder input for observations O under conditioning U.
  Tensor encoder_input(const Tensor& O, const Tensor& U) const;

 private:
  void check() const;

  IvaeConfig config_;
  std::size_t obs_dim_ = 0;
  std::size_t num_envs_ = 0;
  std::optional<numkit::Mlp> prior_;
  numkit::Mlp encoder_;
  numkit::Mlp decoder_;
};

struct ElboBreakdown {
  double reconstruction = 0.0;
  double prior_term = 0.0;
  double entropy_term = 0.0;
  double total = 0.0;
};

/// Draws the reparameterization noise from `rng`.
ElboBreakdown elbo(const IvaeModel& model, const semgen::Dataset& batch, numkit::Rng& rng);
/// Uses the given standard-normal noise (rows x latent_dim).
ElboBreakdown elbo(const IvaeModel& model, const semgen::Dataset& batch, const Tensor& noise);

struct ElboGradients {
  ElboBreakdown value;
  /// d total / d parameter, aligned with IvaeModel::parameters().
  std::vector<Tensor> gradients;
};
ElboGradients elbo_gradients(const IvaeModel& model, const semgen::Dataset& batch, const Tensor& noise);

/// Closed-form E_q[log q] for one diagonal-Gaussian posterior row.
double gaussian_log_q_expectation(std::span<const double> log_variance);

struct LatentPosterior {
  Tensor mean;
  Tensor log_variance;
};

LatentPosterior infer_latents(const IvaeModel& model, const Tensor& O, const Tensor& Y, std::span<const int> E);

class TrainingDivergenceError : public std::runtime_error {
 public:
  TrainingDivergenceError(std::size_t step, const std::string& what);
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct IvaeTrainingResult {
  IvaeModel model;
  /// Full-data ELBO under fixed evaluation noise: entry 0 at initialization,
  /// then one entry per epoch.
  std::vector<double> elbo_curve;
  std::vector<std::string> warnings;
};

/// Minibatch Adam ascent on the ELBO; deterministic given config.seed.
/// Throws TrainingDivergenceError carrying the optimizer step on a non-finite loss.
IvaeTrainingResult train_ivae(const semgen::Dataset& data, const IvaeConfig& config);

struct MccResult {
  double score = 0.0;
  /// permutation[i] is the X_hat column matched to X_true column i.
  std::vector<std::size_t> permutation;
  /// |Spearman| between the matched pairs, per true column.
  std::vector<double> matched;
  /// k x k |Spearman|; row = true column, column = estimated column.
  Tensor correlation;
};

MccResult mcc_score(const Tensor& X_true, const Tensor& X_hat);

/// Maximum-weight perfect matching on a square matrix (Hungarian method).
/// Returns assignment[row] = column.
std::vector<std::size_t> max_weight_assignment(const Tensor& weights);

}  // namespace icrl::ivae
