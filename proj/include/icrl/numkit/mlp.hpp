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

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "icrl/numkit/tape.hpp"
#include "icrl/numkit/tensor.hpp"

namespace icrl::numkit {

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream tag (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

enum class Activation { relu, sigmoid, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Widths of every layer (input first) and one activation per non-input layer.
struct MlpSpec {
  std::vector<std::size_t> layer_sizes;
  std::vector<Activation> activations;

  /// `hidden` on every hidden layer, `output` on the last one.
  static MlpSpec make(std::vector<std::size_t> sizes, Activation hidden,
                      Activation output = Activation::identity);

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
  std::size_t num_layers() const { return layer_sizes.size() - 1; }

  /// Throws std::invalid_argument on fewer than two layers, zero widths or
  /// an activation count that does not match.
  void validate() const;
  bool operator==(const MlpSpec&) const = default;
};

/// Fully connected network. Parameters are stored as [W0, b0, W1, b1, ...]
/// with W_l of shape in×out and b_l of shape 1×out.
class Mlp {
 public:
  Mlp() = default;
  /// Glorot-uniform weights, zero biases.
  Mlp(MlpSpec spec, Rng& rng);
  Mlp(MlpSpec spec, std::vector<Tensor> parameters);

  const MlpSpec& spec() const { return spec_; }
  std::vector<Tensor>& parameters() { return params_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  std::size_t parameter_count() const;

  /// Registers every parameter as a leaf on `tape`.
  std::vector<Var> bind(Tape& tape) const;
  /// Recorded forward pass using previously bound parameters.
  Var forward(Var input, std::span<const Var> bound) const;
  /// Tape-free forward pass.
  Tensor predict(const Tensor& input) const;

 private:
  MlpSpec spec_;
  std::vector<Tensor> params_;
};

}  // namespace icrl::numkit
