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

#include <span>
#include <string>

#include "icrl/causal/ci_tests.hpp"

namespace icrl::causal {

enum class Direction { x_to_y, y_to_x, undecided };
std::string to_string(Direction d);

struct AnmResult {
  Direction preferred = Direction::undecided;
  /// Marginal X vs Y test; an independent pair is never oriented.
  CITestResult dependence;
  /// Residual of Y = g(X) tested against X, and the reverse.
  CITestResult x_to_y;
  CITestResult y_to_x;
  /// A fit whose residual variance is negligible next to the target's.
  bool deterministic_x_to_y = false;
  bool deterministic_y_to_x = false;
  std::string reason;
};

/// Additive-noise-model direction test with kernel ridge fits both ways.
AnmResult anm_direction(std::span<const double> x, std::span<const double> y, const CIConfig& cfg);

struct DeltaScores {
  double delta_x_to_y = 0.0;
  double delta_y_to_x = 0.0;
  /// The direction with the smaller score; undecided on an exact tie.
  Direction preferred() const;
};

/// Mechanism-change score per direction: the average over samples of
/// log(own-environment conditional density / pooled conditional density),
/// both conditional Gaussians with a kernel-ridge mean and residual variance,
/// floored at 1e-12. A mechanism that does not move across environments
/// scores near zero.
DeltaScores delta_criterion(std::span<const double> x, std::span<const double> y, std::span<const int> e,
                            const CIConfig& cfg);

}  // namespace icrl::causal
