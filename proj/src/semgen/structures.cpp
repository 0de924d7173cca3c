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

#include "icrl/semgen/structures.hpp"

#include <random>
#include <stdexcept>

#include "icrl/numkit/mlp.hpp"

namespace icrl::semgen {

EdgeSet edges_of(StructureKind kind) {
  switch (kind) {
    case StructureKind::fig2c:
      return {true, false, false, false};
    case StructureKind::fig2d:
      return {false, true, false, false};
    case StructureKind::fig2e:
      return {false, false, true, false};
    case StructureKind::fig2f:
      return {true, false, true, false};
    case StructureKind::fig2g:
      return {false, true, true, false};
    case StructureKind::fig2i:
      return {true, false, false, true};
    case StructureKind::fig2j:
      return {false, true, false, true};
    case StructureKind::fig2k:
      return {false, false, true, true};
    case StructureKind::fig2l:
      return {true, false, true, true};
    case StructureKind::fig2m:
      return {false, true, true, true};
  }
  return {};
}

std::string to_string(StructureKind kind) {
  static constexpr const char* names[] = {"2c", "2d", "2e", "2f", "2g",
                                          "2i", "2j", "2k", "2l", "2m"};
  return names[static_cast<int>(kind)];
}

StructureKind structure_from_string(const std::string& s) {
  for (StructureKind k : kAllStructures)
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown structure '" + s + "'");
}

bool is_parent_structure(StructureKind kind) { return edges_of(kind).x_to_y; }

int rule_group(StructureKind kind) {
  switch (kind) {
    case StructureKind::fig2c:
    case StructureKind::fig2d:
      return 2;
    case StructureKind::fig2l:
    case StructureKind::fig2m:
      return 3;
    default:
      return 1;
  }
}

namespace {

// Per-variable environment effect: a root gets a mean shift, a variable with
// a causal parent gets its noise scaled.
struct EnvEffect {
  std::vector<double> shift;
  std::vector<double> scale;
};

double signed_magnitude(numkit::Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> mag(lo, hi);
  std::bernoulli_distribution sign(0.5);
  const double m = mag(rng);
  return sign(rng) ? m : -m;
}

EnvEffect draw_effect(numkit::Rng& rng, std::size_t num_envs, bool touched_by_e, bool is_root) {
  EnvEffect eff{std::vector<double>(num_envs, 0.0), std::vector<double>(num_envs, 1.0)};
  if (!touched_by_e) return eff;
  std::uniform_real_distribution<double> child_scale(1.4, 1.7);
  for (std::size_t e = 1; e < num_envs; ++e) {
    if (is_root) {
      eff.shift[e] = signed_magnitude(rng, 1.0, 2.0) * static_cast<double>(e);
    } else {
      eff.scale[e] = child_scale(rng);
    }
  }
  return eff;
}

}  // namespace

StructureData generate_structure_dataset(StructureKind kind, std::size_t num_envs,
                                         std::size_t n_per_env, std::uint64_t seed) {
  if (num_envs < 2) throw std::invalid_argument("structure datasets need at least 2 environments");
  if (n_per_env == 0) throw std::invalid_argument("structure datasets need n_per_env > 0");
  const EdgeSet edges = edges_of(kind);
  numkit::Rng param_rng(numkit::derive_seed(seed, 0));
  const double lin = signed_magnitude(param_rng, 0.5, 1.5);
  const double quad = signed_magnitude(param_rng, 0.5, 1.5);
  const bool x_is_root = !edges.y_to_x;
  const bool y_is_root = !edges.x_to_y;
  const EnvEffect fx = draw_effect(param_rng, num_envs, edges.e_to_x, x_is_root);
  const EnvEffect fy = draw_effect(param_rng, num_envs, edges.e_to_y, y_is_root);

  auto mechanism = [&](double parent) { return lin * parent + quad * (parent * parent - 1.0); };

  StructureData out{kind, {}, {}, {}, num_envs};
  const std::size_t n = num_envs * n_per_env;
  out.x.reserve(n);
  out.y.reserve(n);
  out.e.reserve(n);
  numkit::Rng rng(numkit::derive_seed(seed, 1));
  std::normal_distribution<double> n01;
  for (std::size_t e = 0; e < num_envs; ++e) {
    for (std::size_t i = 0; i < n_per_env; ++i) {
      const double nx = n01(rng), ny = n01(rng);
      double x = 0, y = 0;
      if (edges.x_to_y) {
        x = fx.shift[e] + fx.scale[e] * nx;
        y = mechanism(x) + fy.shift[e] + fy.scale[e] * ny;
      } else if (edges.y_to_x) {
        y = fy.shift[e] + fy.scale[e] * ny;
        x = mechanism(y) + fx.shift[e] + fx.scale[e] * nx;
      } else {
        x = fx.shift[e] + fx.scale[e] * nx;
        y = fy.shift[e] + fy.scale[e] * ny;
      }
      out.x.push_back(x);
      out.y.push_back(y);
      out.e.push_back(static_cast<int>(e));
    }
  }
  return out;
}

}  // namespace icrl::semgen
