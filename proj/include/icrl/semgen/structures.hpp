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

// Ground-truth data for the ten local structures a latent dimension X_i can
// form with the target Y and the environment E. Every structure also has the
// edge X_i -> O, which is implicit here.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace icrl::semgen {

enum class StructureKind {
  fig2c,  // X -> Y
  fig2d,  // Y -> X
  fig2e,  // E -> X
  fig2f,  // E -> X -> Y
  fig2g,  // E -> X <- Y
  fig2i,  // X -> Y <- E
  fig2j,  // E -> Y -> X
  fig2k,  // X <- E -> Y
  fig2l,  // E -> X -> Y, E -> Y
  fig2m,  // E -> Y -> X, E -> X
};

inline constexpr std::array<StructureKind, 10> kAllStructures = {
    StructureKind::fig2c, StructureKind::fig2d, StructureKind::fig2e, StructureKind::fig2f,
    StructureKind::fig2g, StructureKind::fig2i, StructureKind::fig2j, StructureKind::fig2k,
    StructureKind::fig2l, StructureKind::fig2m};

struct EdgeSet {
  bool x_to_y = false;
  bool y_to_x = false;
  bool e_to_x = false;
  bool e_to_y = false;
};

EdgeSet edges_of(StructureKind kind);
/// "2c" ... "2m".
std::string to_string(StructureKind kind);
StructureKind structure_from_string(const std::string& s);
/// True for the four structures in which X is a direct cause of Y.
bool is_parent_structure(StructureKind kind);
/// 1 (identified by independence tests alone), 2 (needs a bivariate
/// direction test) or 3 (needs the mechanism-invariance score).
int rule_group(StructureKind kind);

struct StructureData {
  StructureKind kind;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<int> e;
  std::size_t num_envs = 0;
};

/// Samples n_per_env rows per environment from a randomly parameterized SEM
/// with the edge set of `kind`.
///
/// Mechanism along an X–Y edge: child = b*parent + c*(parent^2 - 1) + noise,
/// with b, c drawn from ±[0.5, 1.5] and unit-variance Gaussian noise. E acts
/// on a root variable by shifting its mean by ±[1, 2] per environment step,
/// and on a variable that already has a parent by scaling its noise by
/// [1.4, 1.7]. Environment 0 is the reference (no shift, unit scale).
StructureData generate_structure_dataset(StructureKind kind, std::size_t num_envs,
                                         std::size_t n_per_env, std::uint64_t seed);

}  // namespace icrl::semgen
