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

#include "icrl/numkit/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace icrl::numkit {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::identity:
      return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

MlpSpec MlpSpec::make(std::vector<std::size_t> sizes, Activation hidden, Activation output) {
  MlpSpec spec;
  spec.layer_sizes = std::move(sizes);
  if (spec.layer_sizes.size() >= 2) {
    spec.activations.assign(spec.layer_sizes.size() - 1, hidden);
    spec.activations.back() = output;
  }
  spec.validate();
  return spec;
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("MlpSpec needs at least an input and an output layer");
  }
  for (std::size_t w : layer_sizes) {
    if (w == 0) throw std::invalid_argument("MlpSpec layer widths must be positive");
  }
  if (activations.size() != layer_sizes.size() - 1) {
    throw std::invalid_argument("MlpSpec needs one activation per non-input layer");
  }
}

Mlp::Mlp(MlpSpec spec, Rng& rng) : spec_(std::move(spec)) {
  spec_.validate();
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    const std::size_t in = spec_.layer_sizes[l];
    const std::size_t out = spec_.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Tensor w(in, out);
    for (double& v : w.data()) v = dist(rng);
    params_.push_back(std::move(w));
    params_.emplace_back(1, out);
  }
}

Mlp::Mlp(MlpSpec spec, std::vector<Tensor> parameters)
    : spec_(std::move(spec)), params_(std::move(parameters)) {
  spec_.validate();
  if (params_.size() != 2 * spec_.num_layers()) {
    throw ShapeError("Mlp: expected " + std::to_string(2 * spec_.num_layers()) +
                     " parameter tensors, got " + std::to_string(params_.size()));
  }
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    const std::size_t in = spec_.layer_sizes[l];
    const std::size_t out = spec_.layer_sizes[l + 1];
    const Tensor& w = params_[2 * l];
    const Tensor& b = params_[2 * l + 1];
    if (w.rows() != in || w.cols() != out || b.rows() != 1 || b.cols() != out) {
      throw ShapeError("Mlp: layer " + std::to_string(l) + " has parameter shapes " +
                       shape_string(w) + " and " + shape_string(b));
    }
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& p : params_) n += p.size();
  return n;
}

std::vector<Var> Mlp::bind(Tape& tape) const {
  std::vector<Var> vars;
  vars.reserve(params_.size());
  for (const Tensor& p : params_) vars.push_back(tape.leaf(p));
  return vars;
}

Var Mlp::forward(Var input, std::span<const Var> bound) const {
  if (bound.size() != params_.size()) {
    throw std::invalid_argument("Mlp::forward: bound parameter count mismatch");
  }
  if (input.value().cols() != spec_.input_dim()) {
    throw ShapeError("Mlp::forward: input " + shape_string(input.value()) + " but network expects " +
                     std::to_string(spec_.input_dim()) + " columns");
  }
  Var h = input;
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    h = add(matmul(h, bound[2 * l]), bound[2 * l + 1]);
    switch (spec_.activations[l]) {
      case Activation::relu:
        h = relu(h);
        break;
      case Activation::sigmoid:
        h = sigmoid(h);
        break;
      case Activation::identity:
        break;
    }
  }
  return h;
}

Tensor Mlp::predict(const Tensor& input) const {
  if (input.cols() != spec_.input_dim()) {
    throw ShapeError("Mlp::predict: input " + shape_string(input) + " but network expects " +
                     std::to_string(spec_.input_dim()) + " columns");
  }
  Tensor h = input;
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    Tensor z = matmul(h, params_[2 * l]);
    const Tensor& b = params_[2 * l + 1];
    for (std::size_t r = 0; r < z.rows(); ++r) {
      for (std::size_t c = 0; c < z.cols(); ++c) {
        double v = z(r, c) + b(0, c);
        switch (spec_.activations[l]) {
          case Activation::relu:
            v = v > 0 ? v : 0.0;
            break;
          case Activation::sigmoid:
            v = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
            break;
          case Activation::identity:
            break;
        }
        z(r, c) = v;
      }
    }
    h = std::move(z);
  }
  if (!h.all_finite()) throw NumericError("Mlp::predict: non-finite output");
  return h;
}

}  // namespace icrl::numkit
