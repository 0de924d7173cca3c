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
#include <span>
#include <vector>

#include "icrl/numkit/tensor.hpp"

namespace icrl::numkit {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates for a fixed list of parameters.
class AdamState {
 public:
  AdamState(std::span<const Tensor* const> params, AdamConfig config = {});
  AdamState(const std::vector<Tensor>& params, AdamConfig config = {});

  const AdamConfig& config() const { return config_; }
  std::uint64_t step() const { return step_; }
  const std::vector<Tensor>& first_moment() const { return m_; }
  const std::vector<Tensor>& second_moment() const { return v_; }

 private:
  friend void adam_step(std::span<Tensor* const>, std::span<const Tensor>, AdamState&);
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

/// One bias-corrected adaptive-moment update, applied in place.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state);
void adam_step(std::vector<Tensor>& params, std::span<const Tensor> grads, AdamState& state);

}  // namespace icrl::numkit
