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

#include "icrl/predictor/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "icrl/numkit/adam.hpp"
#include "icrl/numkit/tape.hpp"

namespace icrl::predictor {

namespace nk = numkit;
using nk::Var;

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
}

void BaselineConfig::validate() const {
  train.validate();
  if (!(penalty_weight >= 0.0)) throw std::invalid_argument("penalty_weight must be nonnegative");
}

DivergenceError::DivergenceError(std::size_t step, const std::string& what)
    : std::runtime_error("training diverged at step " + std::to_string(step) + ": " + what), step_(step) {}

namespace {

enum class Loss { squared, logistic };

Loss loss_for(semgen::Task t) { return t == semgen::Task::classification ? Loss::logistic : Loss::squared; }

nk::Mlp make_net(std::size_t in, std::size_t hidden, std::size_t out, std::uint64_t seed) {
  nk::Rng rng(nk::derive_seed(seed, 1));
  std::vector<std::size_t> sizes = hidden ? std::vector<std::size_t>{in, hidden, out} : std::vector<std::size_t>{in, out};
  return nk::Mlp(nk::MlpSpec::make(sizes, nk::Activation::relu), rng);
}

// softplus(z) = relu(z) + log(1 + exp(-|z|)), stable for large |z|.
Var softplus(Var z) {
  const Var pos = nk::relu(z);
  const Var abs = nk::add(pos, nk::relu(nk::scale(z, -1.0)));
  return nk::add(pos, nk::log(nk::add_scalar(nk::exp(nk::scale(abs, -1.0)), 1.0)));
}

// Per-row loss summed over output columns, averaged over rows.
Var risk(Var out, Var target, Loss loss) {
  const double n = static_cast<double>(out.value().rows());
  if (loss == Loss::squared) return nk::scale(nk::sum(nk::square(nk::subtract(out, target))), 1.0 / n);
  // Cross-entropy on logits: softplus(z) - y z.
  return nk::scale(nk::sum(nk::subtract(softplus(out), nk::multiply(target, out))), 1.0 / n);
}

// sum_e (dR^e(c * out)/dc at c = 1)^2, using the closed-form derivative:
// 2 mean((out - y) out) for squared error, mean((sigmoid(out) - y) out) for cross-entropy.
Var irm_penalty(nk::Tape& tape, Var out, Var target, std::span<const int> env, Loss loss) {
  const Var r = loss == Loss::squared ? nk::scale(nk::multiply(nk::subtract(out, target), out), 2.0)
                                      : nk::multiply(nk::subtract(nk::sigmoid(out), target), out);
  std::vector<int> levels(env.begin(), env.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  Var total = tape.constant(Tensor::scalar(0.0));
  for (int level : levels) {
    Tensor mask(env.size(), 1, 0.0);
    double count = 0.0;
    for (std::size_t i = 0; i < env.size(); ++i)
      if (env[i] == level) {
        mask(i, 0) = 1.0;
        count += 1.0;
      }
    const Var grad_e = nk::scale(nk::sum(nk::multiply(r, tape.constant(std::move(mask)))), 1.0 / count);
    total = nk::add(total, nk::square(grad_e));
  }
  return total;
}

struct Objective {
  Loss loss = Loss::squared;
  std::span<const int> env;  // empty: no penalty
  double penalty_weight = 0.0;
  std::size_t warmup_epochs = 0;
};

struct Trace {
  LossCurve loss_curve;
  std::vector<double> penalty_curve;
};

double full_risk(const nk::Mlp& net, const Tensor& X, const Tensor& T, Loss loss) {
  nk::Tape tape;
  const std::vector<Var> params = net.bind(tape);
  return risk(net.forward(tape.constant(X), params), tape.constant(T), loss).value().item();
}

ObjectiveResult objective_of(const nk::Mlp& net, const Tensor& X, const Tensor& T, Loss loss_kind,
                             std::span<const int> env, double weight) {
  nk::Tape tape;
  const std::vector<Var> bound = net.bind(tape);
  const Var out = net.forward(tape.constant(X), bound);
  const Var target = tape.constant(T);
  Var loss = risk(out, target, loss_kind);
  ObjectiveResult result;
  if (!env.empty()) {
    const Var pen = irm_penalty(tape, out, target, env, loss_kind);
    result.penalty = pen.value().item();
    if (weight > 0.0) loss = nk::add(loss, nk::scale(pen, weight));
  }
  result.value = loss.value().item();
  nk::Gradients grads = tape.backward(loss);
  for (Var p : bound) result.gradients.push_back(grads.take(p));
  return result;
}

// Minibatch Adam on `net`; shuffling uses stream 2 of the seed.
Trace fit(nk::Mlp& net, const Tensor& X, const Tensor& T, const TrainConfig& cfg, const Objective& obj) {
  if (X.rows() != T.rows())
    throw nk::ShapeError("inputs " + nk::shape_string(X) + " and targets " + nk::shape_string(T) + " are not aligned");
  if (X.rows() == 0) throw std::invalid_argument("cannot train on zero rows");
  if (X.cols() != net.spec().input_dim() || T.cols() != net.spec().output_dim())
    throw nk::ShapeError("network " + std::to_string(net.spec().input_dim()) + " -> " +
                         std::to_string(net.spec().output_dim()) + " cannot map " + nk::shape_string(X) + " to " +
                         nk::shape_string(T));
  Trace trace;
  std::size_t step = 0;
  auto record_risk = [&] {
    try {
      trace.loss_curve.push_back(full_risk(net, X, T, obj.loss));
    } catch (const nk::NumericError& e) {
      throw DivergenceError(step, e.what());
    }
  };
  record_risk();

  std::vector<Tensor*> params;
  for (Tensor& t : net.parameters()) params.push_back(&t);
  nk::AdamConfig adam_cfg;
  adam_cfg.learning_rate = cfg.learning_rate;
  const std::vector<const Tensor*> const_params(params.begin(), params.end());
  nk::AdamState adam(const_params, adam_cfg);
  nk::Rng rng(nk::derive_seed(cfg.seed, 2));
  std::vector<std::size_t> order(X.rows());
  std::iota(order.begin(), order.end(), 0);
  const bool penalized = !obj.env.empty();
  std::vector<int> batch_env;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double weight = epoch < obj.warmup_epochs ? 0.0 : obj.penalty_weight;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      try {
        batch_env.clear();
        if (penalized)
          for (std::size_t i : idx) batch_env.push_back(obj.env[i]);
        ObjectiveResult r = objective_of(net, X.gather_rows(idx), T.gather_rows(idx), obj.loss, batch_env, weight);
        if (penalized) trace.penalty_curve.push_back(r.penalty);
        std::vector<Tensor>& gvec = r.gradients;
        for (const Tensor& g : gvec)
          if (!g.all_finite()) throw nk::NumericError("non-finite gradient");
        nk::adam_step(params, gvec, adam);
      } catch (const nk::NumericError& e) {
        throw DivergenceError(step, e.what());
      }
      ++step;
    }
    record_risk();
  }
  return trace;
}

Tensor sigmoid_of(Tensor t) {
  for (double& v : t.data()) v = 1.0 / (1.0 + std::exp(-v));
  return t;
}

}  // namespace

ObjectiveResult objective(const numkit::Mlp& net, const Tensor& X, const Tensor& T, semgen::Task task,
                          std::span<const int> env, double penalty_weight) {
  if (X.rows() != T.rows() || X.cols() != net.spec().input_dim() || T.cols() != net.spec().output_dim())
    throw nk::ShapeError("objective: inputs " + nk::shape_string(X) + " and targets " + nk::shape_string(T) +
                         " do not fit the network");
  if (!env.empty() && env.size() != X.rows()) throw nk::ShapeError("objective: one environment label per row");
  return objective_of(net, X, T, loss_for(task), env, penalty_weight);
}

Tensor PhiModel::apply(const Tensor& O) const {
  if (O.cols() != net.spec().input_dim())
    throw nk::ShapeError("Phi expects " + std::to_string(net.spec().input_dim()) + " columns, got " +
                         nk::shape_string(O));
  return net.predict(O);
}

Tensor WModel::apply(const Tensor& parents) const {
  if (parents.cols() != net.spec().input_dim())
    throw nk::ShapeError("w expects " + std::to_string(net.spec().input_dim()) + " columns, got " +
                         nk::shape_string(parents));
  const Tensor out = net.predict(parents);
  return task == semgen::Task::classification ? sigmoid_of(out) : out;
}

Tensor BaselineModel::apply(const Tensor& O) const {
  if (O.cols() != net.spec().input_dim())
    throw nk::ShapeError("baseline expects " + std::to_string(net.spec().input_dim()) + " columns, got " +
                         nk::shape_string(O));
  const Tensor out = net.predict(O);
  return task == semgen::Task::classification ? sigmoid_of(out) : out;
}

PhiFit train_phi(const Tensor& O, const Tensor& parent_latents, const TrainConfig& config) {
  config.validate();
  if (parent_latents.cols() == 0) throw std::invalid_argument("train_phi needs at least one parent dimension");
  PhiFit out{{make_net(O.cols(), config.hidden, parent_latents.cols(), config.seed)}, {}};
  out.loss_curve = fit(out.model.net, O, parent_latents, config, {}).loss_curve;
  return out;
}

WFit train_w(const Tensor& parent_latents, const Tensor& Y, const TrainConfig& config) {
  config.validate();
  if (Y.cols() != 1) throw nk::ShapeError("train_w expects Y n x 1, got " + nk::shape_string(Y));
  WFit out{{make_net(parent_latents.cols(), config.hidden, 1, config.seed), config.task}, {}};
  Objective obj;
  obj.loss = loss_for(config.task);
  out.loss_curve = fit(out.model.net, parent_latents, Y, config, obj).loss_curve;
  return out;
}

Tensor predict(const PhiModel& phi, const WModel& w, const Tensor& O) {
  if (phi.output_dim() != w.net.spec().input_dim())
    throw nk::ShapeError("Phi has " + std::to_string(phi.output_dim()) + " outputs but w expects " +
                         std::to_string(w.net.spec().input_dim()));
  return w.apply(phi.apply(O));
}

EvalResult evaluate(const Tensor& y_hat, const Tensor& Y, std::span<const int> E, semgen::Task task) {
  if (!y_hat.same_shape(Y) || Y.cols() != 1 || Y.rows() != E.size())
    throw nk::ShapeError("evaluate needs aligned n x 1 predictions and targets, got " + nk::shape_string(y_hat) +
                         " and " + nk::shape_string(Y) + " with " + std::to_string(E.size()) + " labels");
  if (Y.rows() == 0) throw std::invalid_argument("evaluate: no rows");
  EvalResult r;
  r.task = task;
  std::map<int, double> sums;
  double total = 0.0;
  for (std::size_t i = 0; i < Y.rows(); ++i) {
    double v = 0.0;
    if (task == semgen::Task::regression) {
      const double d = y_hat(i, 0) - Y(i, 0);
      v = d * d;
    } else {
      v = (y_hat(i, 0) >= 0.5) == (Y(i, 0) >= 0.5) ? 1.0 : 0.0;
    }
    sums[E[i]] += v;
    ++r.per_env_rows[E[i]];
    total += v;
  }
  for (const auto& [env, s] : sums) r.per_env[env] = s / static_cast<double>(r.per_env_rows[env]);
  r.pooled = total / static_cast<double>(Y.rows());
  return r;
}

BaselineFit erm_baseline(const semgen::Dataset& data, const TrainConfig& config) {
  BaselineConfig b;
  b.train = config;
  b.penalty_weight = 0.0;
  b.warmup_epochs = 0;
  b.validate();
  data.validate();
  BaselineFit out{{make_net(data.O.cols(), config.hidden, 1, config.seed), config.task}, {}, {}, {}};
  Objective obj;
  obj.loss = loss_for(config.task);
  out.loss_curve = fit(out.model.net, data.O, data.Y, config, obj).loss_curve;
  out.train_eval = evaluate(out.model.apply(data.O), data.Y, data.E, config.task);
  return out;
}

BaselineFit irmv1_baseline(const semgen::Dataset& data, const BaselineConfig& config) {
  config.validate();
  data.validate();
  const TrainConfig& tc = config.train;
  BaselineFit out{{make_net(data.O.cols(), tc.hidden, 1, tc.seed), tc.task}, {}, {}, {}};
  Objective obj;
  obj.loss = loss_for(tc.task);
  obj.env = data.E;
  obj.penalty_weight = config.penalty_weight;
  obj.warmup_epochs = config.warmup_epochs;
  Trace t = fit(out.model.net, data.O, data.Y, tc, obj);
  out.loss_curve = std::move(t.loss_curve);
  out.penalty_curve = std::move(t.penalty_curve);
  out.train_eval = evaluate(out.model.apply(data.O), data.Y, data.E, tc.task);
  return out;
}

}  // namespace icrl::predictor
