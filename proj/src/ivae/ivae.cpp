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

#include "icrl/ivae/ivae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "icrl/numkit/adam.hpp"
#include "icrl/numkit/stats.hpp"
#include "icrl/numkit/tape.hpp"

namespace icrl::ivae {

namespace nk = numkit;
using nk::Var;

std::string to_string(PriorMode m) { return m == PriorMode::conditional ? "conditional" : "unconditional"; }

PriorMode prior_mode_from_string(const std::string& s) {
  if (s == "conditional") return PriorMode::conditional;
  if (s == "unconditional") return PriorMode::unconditional;
  throw std::invalid_argument("unknown prior mode '" + s + "'");
}

void IvaeConfig::validate() const {
  if (latent_dim == 0) throw std::invalid_argument("latent_dim must be positive");
  if (!(decoder_variance > 0.0)) throw std::invalid_argument("decoder_variance must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
}

namespace {

nk::Mlp make_net(std::size_t in, std::size_t hidden, std::size_t out, std::uint64_t seed) {
  nk::Rng rng(seed);
  std::vector<std::size_t> sizes = hidden ? std::vector<std::size_t>{in, hidden, out} : std::vector<std::size_t>{in, out};
  return nk::Mlp(nk::MlpSpec::make(sizes, nk::Activation::relu), rng);
}

}  // namespace

std::size_t IvaeModel::cond_dim() const {
  return (config_.task == semgen::Task::classification ? 2 : 1) + num_envs_;
}

IvaeModel::IvaeModel(const IvaeConfig& config, std::size_t obs_dim, std::size_t num_envs)
    : config_(config), obs_dim_(obs_dim), num_envs_(num_envs) {
  config_.validate();
  const std::size_t J = config_.latent_dim;
  const bool conditional = config_.prior == PriorMode::conditional;
  if (conditional) prior_ = make_net(cond_dim(), config_.hidden, J, nk::derive_seed(config_.seed, 1));
  encoder_ = make_net(obs_dim + (conditional ? cond_dim() : 0), config_.hidden, 2 * J, nk::derive_seed(config_.seed, 2));
  decoder_ = make_net(J, config_.hidden, obs_dim, nk::derive_seed(config_.seed, 3));
  check();
}

IvaeModel::IvaeModel(const IvaeConfig& config, std::size_t obs_dim, std::size_t num_envs,
                     std::optional<nk::Mlp> prior, nk::Mlp encoder, nk::Mlp decoder)
    : config_(config),
      obs_dim_(obs_dim),
      num_envs_(num_envs),
      prior_(std::move(prior)),
      encoder_(std::move(encoder)),
      decoder_(std::move(decoder)) {
  config_.validate();
  check();
}

void IvaeModel::check() const {
  const std::size_t J = config_.latent_dim;
  if (J > obs_dim_)
    throw std::invalid_argument("latent_dim (" + std::to_string(J) + ") exceeds the observation dimension (" +
                                std::to_string(obs_dim_) + ")");
  if (num_envs_ == 0) throw std::invalid_argument("model needs at least one environment");
  const bool conditional = config_.prior == PriorMode::conditional;
  if (conditional != prior_.has_value())
    throw std::invalid_argument("prior network must be present exactly for a conditional prior");
  if (prior_ && (prior_->spec().input_dim() != cond_dim() || prior_->spec().output_dim() != J))
    throw std::invalid_argument("prior network shape does not match the model");
  if (encoder_.spec().input_dim() != obs_dim_ + (conditional ? cond_dim() : 0) || encoder_.spec().output_dim() != 2 * J)
    throw std::invalid_argument("encoder network shape does not match the model");
  if (decoder_.spec().input_dim() != J || decoder_.spec().output_dim() != obs_dim_)
    throw std::invalid_argument("decoder network shape does not match the model");
}

std::vector<Tensor*> IvaeModel::parameters() {
  std::vector<Tensor*> out;
  auto add = [&](nk::Mlp& m) {
    for (Tensor& t : m.parameters()) out.push_back(&t);
  };
  if (prior_) add(*prior_);
  add(encoder_);
  add(decoder_);
  return out;
}

std::vector<const Tensor*> IvaeModel::parameters() const {
  std::vector<const Tensor*> out;
  for (Tensor* t : const_cast<IvaeModel*>(this)->parameters()) out.push_back(t);
  return out;
}

Tensor IvaeModel::encode_conditioning(const Tensor& Y, std::span<const int> E) const {
  if (Y.cols() != 1 || Y.rows() != E.size())
    throw nk::ShapeError("conditioning expects Y n x 1 aligned with E, got Y " + nk::shape_string(Y) + " and " +
                         std::to_string(E.size()) + " labels");
  const bool onehot_y = config_.task == semgen::Task::classification;
  Tensor U(Y.rows(), cond_dim(), 0.0);
  for (std::size_t i = 0; i < Y.rows(); ++i) {
    std::size_t c = 0;
    if (onehot_y) {
      const double y = Y(i, 0);
      if (y != 0.0 && y != 1.0) throw std::invalid_argument("classification targets must be 0 or 1");
      U(i, y == 1.0 ? 1 : 0) = 1.0;
      c = 2;
    } else {
      U(i, 0) = Y(i, 0);
      c = 1;
    }
    if (E[i] < 0 || static_cast<std::size_t>(E[i]) >= num_envs_)
      throw std::invalid_argument("environment label " + std::to_string(E[i]) + " is outside the model's " +
                                  std::to_string(num_envs_) + " training environments");
    U(i, c + static_cast<std::size_t>(E[i])) = 1.0;
  }
  return U;
}

Tensor IvaeModel::encoder_input(const Tensor& O, const Tensor& U) const {
  if (O.cols() != obs_dim_)
    throw nk::ShapeError("observations have " + std::to_string(O.cols()) + " columns, model expects " +
                         std::to_string(obs_dim_));
  if (config_.prior == PriorMode::unconditional) return O;
  return nk::hconcat(O, U);
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct ElboGraph {
  Var reconstruction, prior, entropy, total;
  std::vector<Var> params;
};

// Records the per-row-average ELBO for one batch on `tape`.
ElboGraph record_elbo(nk::Tape& tape, const IvaeModel& model, const Tensor& O, const Tensor& U,
                      const Tensor& enc_in, const Tensor& noise) {
  const std::size_t n = O.rows(), J = model.latent_dim(), d = model.obs_dim();
  if (noise.rows() != n || noise.cols() != J)
    throw nk::ShapeError("noise must be " + std::to_string(n) + "x" + std::to_string(J) + ", got " +
                         nk::shape_string(noise));
  const double nd = static_cast<double>(n);
  const double v = model.config().decoder_variance;
  ElboGraph g;

  std::vector<Var> prior_params;
  if (model.prior_net()) prior_params = model.prior_net()->bind(tape);
  const std::vector<Var> enc_params = model.encoder_net().bind(tape);
  const std::vector<Var> dec_params = model.decoder_net().bind(tape);
  g.params = prior_params;
  g.params.insert(g.params.end(), enc_params.begin(), enc_params.end());
  g.params.insert(g.params.end(), dec_params.begin(), dec_params.end());

  const Var enc_out = model.encoder_net().forward(tape.constant(enc_in), enc_params);
  const Var mu = nk::slice_cols(enc_out, 0, J);
  const Var logvar = nk::slice_cols(enc_out, J, J);
  const Var x = nk::add(mu, nk::multiply(nk::exp(nk::scale(logvar, 0.5)), tape.constant(noise)));

  const Var dec = model.decoder_net().forward(x, dec_params);
  const Var sq_err = nk::sum(nk::square(nk::subtract(dec, tape.constant(O))));
  g.reconstruction =
      nk::add_scalar(nk::scale(sq_err, -1.0 / (2.0 * v * nd)), -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * v));

  const double prior_const = -0.5 * static_cast<double>(J) * kLog2Pi;
  if (model.prior_net()) {
    const Var lambda = model.prior_net()->forward(tape.constant(U), prior_params);
    const Var quad = nk::multiply(nk::square(x), nk::exp(nk::scale(lambda, -1.0)));
    const Var per = nk::add(nk::scale(lambda, -0.5), nk::scale(quad, -0.5));
    g.prior = nk::add_scalar(nk::scale(nk::sum(per), 1.0 / nd), prior_const);
  } else {
    g.prior = nk::add_scalar(nk::scale(nk::sum(nk::square(x)), -0.5 / nd), prior_const);
  }

  g.entropy = nk::add_scalar(nk::scale(nk::sum(logvar), -0.5 / nd), -0.5 * static_cast<double>(J) * (kLog2Pi + 1.0));
  g.total = nk::subtract(nk::add(g.reconstruction, g.prior), g.entropy);
  return g;
}

ElboBreakdown read(const ElboGraph& g) {
  return {g.reconstruction.value().item(), g.prior.value().item(), g.entropy.value().item(), g.total.value().item()};
}

Tensor standard_normal(std::size_t rows, std::size_t cols, nk::Rng& rng) {
  std::normal_distribution<double> n01;
  Tensor t(rows, cols);
  for (double& v : t.data()) v = n01(rng);
  return t;
}

}  // namespace

ElboBreakdown elbo(const IvaeModel& model, const semgen::Dataset& batch, const Tensor& noise) {
  if (batch.rows() == 0) throw std::invalid_argument("elbo: empty batch");
  const Tensor U = model.encode_conditioning(batch.Y, batch.E);
  nk::Tape tape;
  return read(record_elbo(tape, model, batch.O, U, model.encoder_input(batch.O, U), noise));
}

ElboBreakdown elbo(const IvaeModel& model, const semgen::Dataset& batch, nk::Rng& rng) {
  return elbo(model, batch, standard_normal(batch.rows(), model.latent_dim(), rng));
}

ElboGradients elbo_gradients(const IvaeModel& model, const semgen::Dataset& batch, const Tensor& noise) {
  if (batch.rows() == 0) throw std::invalid_argument("elbo: empty batch");
  const Tensor U = model.encode_conditioning(batch.Y, batch.E);
  nk::Tape tape;
  const ElboGraph g = record_elbo(tape, model, batch.O, U, model.encoder_input(batch.O, U), noise);
  nk::Gradients grads = tape.backward(g.total);
  ElboGradients out;
  out.value = read(g);
  for (Var p : g.params) out.gradients.push_back(grads.take(p));
  return out;
}

double gaussian_log_q_expectation(std::span<const double> log_variance) {
  double s = 0.0;
  for (double lv : log_variance) s += kLog2Pi + 1.0 + lv;
  return -0.5 * s;
}

LatentPosterior infer_latents(const IvaeModel& model, const Tensor& O, const Tensor& Y, std::span<const int> E) {
  if (O.rows() != Y.rows()) throw nk::ShapeError("infer_latents: O and Y row counts differ");
  const Tensor U = model.encode_conditioning(Y, E);
  const Tensor out = model.encoder_net().predict(model.encoder_input(O, U));
  const std::size_t J = model.latent_dim();
  return {out.slice_cols(0, J), out.slice_cols(J, J)};
}

TrainingDivergenceError::TrainingDivergenceError(std::size_t step, const std::string& what)
    : std::runtime_error("iVAE training diverged at step " + std::to_string(step) + ": " + what), step_(step) {}

IvaeTrainingResult train_ivae(const semgen::Dataset& data, const IvaeConfig& config) {
  data.validate();
  config.validate();
  if (data.rows() == 0) throw std::invalid_argument("train_ivae: empty dataset");
  IvaeTrainingResult result{IvaeModel(config, data.O.cols(), data.num_envs), {}, {}};
  IvaeModel& model = result.model;

  const Tensor U = model.encode_conditioning(data.Y, data.E);
  const Tensor enc_in = model.encoder_input(data.O, U);
  if (config.prior == PriorMode::conditional) {
    std::set<std::vector<double>> distinct;
    for (std::size_t i = 0; i < U.rows() && distinct.size() < 2; ++i) distinct.insert(U.row_at(i).values());
    if (distinct.size() < 2)
      result.warnings.push_back(
          "conditioning (Y, E) takes a single value; the conditional prior cannot vary and latents are not "
          "identifiable");
  }

  nk::Rng eval_rng(nk::derive_seed(config.seed, 10));
  const Tensor eval_noise = standard_normal(data.rows(), config.latent_dim, eval_rng);
  auto full_elbo = [&] {
    nk::Tape tape;
    return record_elbo(tape, model, data.O, U, enc_in, eval_noise).total.value().item();
  };
  result.elbo_curve.push_back(full_elbo());

  std::vector<Tensor*> params = model.parameters();
  nk::AdamConfig adam_cfg;
  adam_cfg.learning_rate = config.learning_rate;
  const std::vector<const Tensor*> const_params(params.begin(), params.end());
  nk::AdamState adam(const_params, adam_cfg);
  nk::Rng rng(nk::derive_seed(config.seed, 11));
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      const Tensor noise = standard_normal(count, config.latent_dim, rng);
      try {
        nk::Tape tape;
        const ElboGraph g =
            record_elbo(tape, model, data.O.gather_rows(idx), U.gather_rows(idx), enc_in.gather_rows(idx), noise);
        const Var loss = nk::scale(g.total, -1.0);
        nk::Gradients grads = tape.backward(loss);
        std::vector<Tensor> gvec;
        for (Var p : g.params) gvec.push_back(grads.take(p));
        for (const Tensor& t : gvec)
          if (!t.all_finite()) throw nk::NumericError("non-finite gradient");
        nk::adam_step(params, gvec, adam);
      } catch (const nk::NumericError& e) {
        throw TrainingDivergenceError(step, e.what());
      }
      ++step;
    }
    try {
      result.elbo_curve.push_back(full_elbo());
    } catch (const nk::NumericError& e) {
      throw TrainingDivergenceError(step, e.what());
    }
  }
  return result;
}

std::vector<std::size_t> max_weight_assignment(const Tensor& weights) {
  const std::size_t n = weights.rows();
  if (weights.cols() != n) throw nk::ShapeError("assignment needs a square matrix, got " + nk::shape_string(weights));
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  // Minimum-cost Hungarian method on cost = -weight, 1-based with a dummy column 0.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weights(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

MccResult mcc_score(const Tensor& X_true, const Tensor& X_hat) {
  if (X_true.cols() != X_hat.cols() || X_true.rows() != X_hat.rows())
    throw nk::ShapeError("mcc_score needs equal shapes, got " + nk::shape_string(X_true) + " and " +
                         nk::shape_string(X_hat));
  const std::size_t k = X_true.cols();
  MccResult out;
  out.correlation = Tensor(k, k);
  std::vector<std::vector<double>> t_cols, h_cols;
  for (std::size_t j = 0; j < k; ++j) {
    t_cols.push_back(X_true.col_at(j).values());
    h_cols.push_back(X_hat.col_at(j).values());
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) out.correlation(i, j) = std::abs(nk::spearman(t_cols[i], h_cols[j]));
  out.permutation = max_weight_assignment(out.correlation);
  for (std::size_t i = 0; i < k; ++i) out.matched.push_back(out.correlation(i, out.permutation[i]));
  out.score = k ? std::accumulate(out.matched.begin(), out.matched.end(), 0.0) / static_cast<double>(k) : 0.0;
  return out;
}

}  // namespace icrl::ivae
