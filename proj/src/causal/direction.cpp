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

#include "icrl/causal/direction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "icrl/causal/detail/rows.hpp"
#include "icrl/numkit/mlp.hpp"
#include "icrl/numkit/stats.hpp"

namespace icrl::causal {

std::string to_string(Direction d) {
  switch (d) {
    case Direction::x_to_y:
      return "x->y";
    case Direction::y_to_x:
      return "y->x";
    case Direction::undecided:
      return "undecided";
  }
  return "undecided";
}

namespace {

// Residual variance at or below this fraction of the target's variance is
// treated as zero: the fit is deterministic. The ridge floor keeps an exact
// functional relation from reaching a literal zero.
constexpr double kNegligibleResidual = 1e-4;

struct ResidualTest {
  CITestResult test;
  bool deterministic = false;
};

ResidualTest residual_test(const std::vector<double>& cause, const std::vector<double>& effect, const CIConfig& cfg,
                           std::uint64_t stream) {
  std::vector<std::size_t> all(cause.size());
  std::iota(all.begin(), all.end(), 0);
  const std::vector<double> res = detail::krr_residual({cause}, effect, all);
  ResidualTest out;
  out.deterministic = numkit::variance_of(res) <= kNegligibleResidual * numkit::variance_of(effect);
  if (out.deterministic) {
    out.test.degenerate = true;
    out.test.method = "deterministic fit";
    return out;
  }
  const PermutationResult perm =
      dcor_permutation_test({res}, {cause}, cfg.permutations, numkit::derive_seed(cfg.seed, stream));
  out.test.statistic = perm.dcor;
  out.test.p_value = perm.p_value;
  out.test.independent = perm.p_value > cfg.alpha;
  out.test.method = "krr-residual dcor-permutation";
  return out;
}

}  // namespace

AnmResult anm_direction(std::span<const double> x, std::span<const double> y, const CIConfig& cfg) {
  cfg.validate();
  const Variable vx = Variable::continuous("X", std::vector<double>(x.begin(), x.end()));
  const Variable vy = Variable::continuous("Y", std::vector<double>(y.begin(), y.end()));
  AnmResult out;
  CIConfig dep_cfg = cfg;
  dep_cfg.seed = numkit::derive_seed(cfg.seed, 31);
  out.dependence = test_independence(vx, vy, dep_cfg);
  if (out.dependence.independent) {
    out.reason = "X and Y are independent; nothing to orient";
    return out;
  }

  const Variable* vars[] = {&vx, &vy};
  const auto order = detail::canonical_order(vars);
  const auto sub = detail::subsample(order.size(), cfg.max_rows, numkit::derive_seed(cfg.seed, 32));
  std::vector<double> xs, ys;
  for (std::size_t i : sub) {
    xs.push_back(x[order[i]]);
    ys.push_back(y[order[i]]);
  }
  const ResidualTest fwd = residual_test(xs, ys, cfg, 33);
  const ResidualTest bwd = residual_test(ys, xs, cfg, 34);
  out.x_to_y = fwd.test;
  out.y_to_x = bwd.test;
  out.deterministic_x_to_y = fwd.deterministic;
  out.deterministic_y_to_x = bwd.deterministic;

  if (fwd.deterministic && bwd.deterministic) {
    out.reason = "both directions fit deterministically";
  } else if (fwd.deterministic || bwd.deterministic) {
    out.preferred = fwd.deterministic ? Direction::x_to_y : Direction::y_to_x;
    out.reason = "only one direction fits deterministically";
  } else if (!fwd.test.independent && !bwd.test.independent) {
    out.reason = "residuals depend on the input in both directions";
  } else if (fwd.test.p_value != bwd.test.p_value) {
    out.preferred = fwd.test.p_value > bwd.test.p_value ? Direction::x_to_y : Direction::y_to_x;
    out.reason = "larger residual-independence p-value";
  } else if (fwd.test.statistic != bwd.test.statistic) {
    out.preferred = fwd.test.statistic < bwd.test.statistic ? Direction::x_to_y : Direction::y_to_x;
    out.reason = "equal p-values; smaller residual dependence";
  } else {
    out.reason = "directions indistinguishable";
  }
  return out;
}

Direction DeltaScores::preferred() const {
  if (delta_x_to_y < delta_y_to_x) return Direction::x_to_y;
  if (delta_y_to_x < delta_x_to_y) return Direction::y_to_x;
  return Direction::undecided;
}

namespace {

struct GaussianFit {
  std::vector<double> residual;
  double variance = 0.0;
};

GaussianFit conditional_gaussian(const std::vector<double>& input, const std::vector<double>& target,
                                 std::span<const std::size_t> rows, std::size_t cap, std::uint64_t seed) {
  std::vector<double> in, out;
  for (std::size_t r : rows) {
    in.push_back(input[r]);
    out.push_back(target[r]);
  }
  const auto fit_rows = detail::subsample(rows.size(), cap, seed);
  GaussianFit g;
  g.residual = detail::krr_residual({in}, out, fit_rows);
  double ss = 0.0;
  for (double r : g.residual) ss += r * r;
  g.variance = ss / static_cast<double>(g.residual.size());
  return g;
}

double log_density(double residual, double variance) {
  const double lp = -0.5 * std::log(2.0 * std::numbers::pi * variance) - residual * residual / (2.0 * variance);
  return std::max(lp, std::log(1e-12));
}

double delta_one_way(const std::vector<double>& input, const std::vector<double>& target,
                     const std::vector<std::vector<std::size_t>>& env_rows, const CIConfig& cfg,
                     std::uint64_t stream, const std::string& direction) {
  const std::size_t n = input.size();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const GaussianFit pooled = conditional_gaussian(input, target, all, cfg.max_rows, numkit::derive_seed(cfg.seed, stream));
  const double floor = kNegligibleResidual * numkit::variance_of(target);
  if (!(pooled.variance > floor))
    throw std::domain_error("delta " + direction + ": pooled conditional density has zero variance");
  double total = 0.0;
  for (std::size_t k = 0; k < env_rows.size(); ++k) {
    const auto& rows = env_rows[k];
    const GaussianFit own =
        conditional_gaussian(input, target, rows, cfg.max_rows, numkit::derive_seed(cfg.seed, stream + 1 + k));
    if (!(own.variance > floor))
      throw std::domain_error("delta " + direction + ": environment " + std::to_string(k) +
                              " conditional density has zero variance");
    for (std::size_t i = 0; i < rows.size(); ++i)
      total += log_density(own.residual[i], own.variance) - log_density(pooled.residual[rows[i]], pooled.variance);
  }
  return total / static_cast<double>(n);
}

}  // namespace

DeltaScores delta_criterion(std::span<const double> x, std::span<const double> y, std::span<const int> e,
                            const CIConfig& cfg) {
  cfg.validate();
  if (x.size() != y.size() || x.size() != e.size()) throw std::invalid_argument("delta: inputs are not aligned");
  const Variable ve = Variable::discrete("E", std::vector<int>(e.begin(), e.end()));
  const Variable vx = Variable::continuous("X", std::vector<double>(x.begin(), x.end()));
  const Variable vy = Variable::continuous("Y", std::vector<double>(y.begin(), y.end()));
  const Variable* vars[] = {&ve, &vx, &vy};
  const auto order = detail::canonical_order(vars);

  std::vector<double> xs, ys;
  std::map<int, std::vector<std::size_t>> by_env;
  for (std::size_t i = 0; i < order.size(); ++i) {
    xs.push_back(x[order[i]]);
    ys.push_back(y[order[i]]);
    by_env[e[order[i]]].push_back(i);
  }
  if (by_env.size() < 2) throw InsufficientDataError("delta: needs at least 2 environments");
  std::vector<std::vector<std::size_t>> env_rows;
  for (auto& [level, rows] : by_env) {
    if (rows.size() < cfg.min_env_rows)
      throw InsufficientDataError("delta: environment " + std::to_string(level) + " has " +
                                  std::to_string(rows.size()) + " rows; at least " +
                                  std::to_string(cfg.min_env_rows) + " are required");
    env_rows.push_back(std::move(rows));
  }
  DeltaScores out;
  out.delta_x_to_y = delta_one_way(xs, ys, env_rows, cfg, 40, "X->Y");
  out.delta_y_to_x = delta_one_way(ys, xs, env_rows, cfg, 60, "Y->X");
  return out;
}

}  // namespace icrl::causal
