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

// Phase-3 predictors: a representation Phi: O -> parent latents and a head
// w: parents -> Y, trained as two separate regressions and composed as w(Phi(O)).
// Also the single-network ERM and IRMv1 baselines.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "icrl/numkit/mlp.hpp"
#include "icrl/numkit/tensor.hpp"
#include "icrl/semgen/semgen.hpp"

namespace icrl::predictor {

using numkit::Tensor;

struct TrainConfig {
  /// Width of the single ReLU hidden layer; 0 gives a linear model.
  std::size_t hidden = 6;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double learning_rate = 5e-3;
  std::uint64_t seed = 0;
  /// Loss of the Y-predicting networks: squared error or cross-entropy on a
  /// logit output. Phi is always a regression.
  semgen::Task task = semgen::Task::regression;

  void validate() const;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, const std::string& what);
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct PhiModel {
  numkit::Mlp net;
  std::size_t output_dim() const { return net.spec().output_dim(); }
  Tensor apply(const Tensor& O) const;
};

struct WModel {
  numkit::Mlp net;
  semgen::Task task = semgen::Task::regression;
  /// Predictions: the regression value, or P(Y = 1) for classification.
  Tensor apply(const Tensor& parents) const;
};

/// Full-data training loss at initialization, then after every epoch.
using LossCurve = std::vector<double>;

struct PhiFit {
  PhiModel model;
  LossCurve loss_curve;
};

struct WFit {
  WModel model;
  LossCurve loss_curve;
};

/// Regresses the parent latents on O with pooled squared error.
PhiFit train_phi(const Tensor& O, const Tensor& parent_latents, const TrainConfig& config);
/// Fits Y from the parent latents; the loss follows config.task.
WFit train_w(const Tensor& parent_latents, const Tensor& Y, const TrainConfig& config);

/// w(Phi(O)). Throws numkit::ShapeError if the pieces do not fit together.
Tensor predict(const PhiModel& phi, const WModel& w, const Tensor& O);

struct EvalResult {
  semgen::Task task = semgen::Task::regression;
  /// MSE (regression) or accuracy at threshold 0.5 (classification).
  std::map<int, double> per_env;
  std::map<int, std::size_t> per_env_rows;
  /// Row-weighted combination of per_env.
  double pooled = 0.0;
};

EvalResult evaluate(const Tensor& y_hat, const Tensor& Y, std::span<const int> E, semgen::Task task);

struct BaselineConfig {
  TrainConfig train;
  /// Weight of the IRMv1 penalty once the warm-up is over.
  double penalty_weight = 100.0;
  /// Epochs trained with the penalty weight held at 0.
  std::size_t warmup_epochs = 10;

  void validate() const;
};

struct BaselineModel {
  numkit::Mlp net;
  semgen::Task task = semgen::Task::regression;
  Tensor apply(const Tensor& O) const;
};

struct BaselineFit {
  BaselineModel model;
  LossCurve loss_curve;
  /// IRMv1 penalty of every minibatch step (empty for ERM).
  std::vector<double> penalty_curve;
  EvalResult train_eval;
};

/// One network O -> Y minimizing the pooled risk.
BaselineFit erm_baseline(const semgen::Dataset& data, const TrainConfig& config);
/// Pooled risk plus weight * sum_e (d/dc R^e(c * f) at c = 1)^2.
BaselineFit irmv1_baseline(const semgen::Dataset& data, const BaselineConfig& config);

struct ObjectiveResult {
  double value = 0.0;
  /// Unweighted IRMv1 penalty; 0 without environment labels.
  double penalty = 0.0;
  /// One per network parameter, in parameter order.
  std::vector<Tensor> gradients;
};

/// The training objective on one batch: mean risk under the task's loss, plus
/// penalty_weight times the IRMv1 penalty when `env` labels are given.
ObjectiveResult objective(const numkit::Mlp& net, const Tensor& X, const Tensor& T, semgen::Task task,
                          std::span<const int> env = {}, double penalty_weight = 0.0);

}  // namespace icrl::predictor
