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

// Multi-environment data for the three-variable toy SEM
//
//   X1 <- N(0, s1(E)),  Y <- X1 + N(0, s2(E)),  X2 <- Y + N(0, s3(E))
//
// plus the identity / linear / nonlinear observation maps and the closed-form
// least-squares coefficients of the three regression cases.
//
// NOTE: every s_i is a noise VARIANCE. The regression coefficients below are
// only the least-squares solutions under that reading, so the sampler uses it
// too and draws noise with standard deviation sqrt(s_i).

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "icrl/numkit/mlp.hpp"
#include "icrl/numkit/tensor.hpp"

namespace icrl::semgen {

using numkit::Tensor;

inline constexpr double kDefaultSigmaMax = 1000.0;

/// Noise variances of the three structural assignments in one environment.
struct EnvSpec {
  double sigma1 = 1.0;
  double sigma2 = 0.0;
  double sigma3 = 0.2;

  /// Throws std::invalid_argument unless every variance is in [0, sigma_max].
  void validate(double sigma_max = kDefaultSigmaMax) const;
  bool operator==(const EnvSpec&) const = default;
};

struct Model1Sample {
  std::vector<double> x1;
  std::vector<double> x2;
  std::vector<double> y;
};

Model1Sample sample_model1(const EnvSpec& env, std::size_t n, std::uint64_t seed);

/// Least-squares coefficients (alpha1, alpha2) for predicting Y from
///   case 1: X1 alone, case 2: X2 alone, case 3: both.
/// Throws std::domain_error when the case's denominator vanishes.
std::array<double, 2> ols_oracle(int regression_case, const EnvSpec& env);

enum class MixingKind { identity, linear, nonlinear };

std::string to_string(MixingKind k);
MixingKind mixing_kind_from_string(const std::string& s);

struct MixingSpec {
  MixingKind kind = MixingKind::nonlinear;
  std::uint64_t seed = 0;
  std::size_t out_dim = 10;

  /// Mixing used in the synthetic experiments: 2 outputs for identity, 10 otherwise.
  static MixingSpec standard(MixingKind kind, std::uint64_t seed);
};

/// Materialized observation map. Linear maps keep a 2×d matrix with full row
/// rank; nonlinear maps keep a frozen [2 -> 6 relu -> d] network with
/// Glorot weights and U(-1/sqrt(fan_in), 1/sqrt(fan_in)) biases. Both are
/// regenerated from the next seed until they pass their rank check.
class Mixing {
 public:
  explicit Mixing(const MixingSpec& spec);

  const MixingSpec& spec() const { return spec_; }
  std::size_t out_dim() const;
  Tensor apply(const Tensor& x) const;

  const Tensor& matrix() const { return matrix_; }
  const numkit::Mlp& network() const { return net_; }
  /// Seed that produced the accepted map (spec().seed plus rejected draws).
  std::uint64_t effective_seed() const { return effective_seed_; }

 private:
  MixingSpec spec_;
  std::uint64_t effective_seed_ = 0;
  Tensor matrix_;
  numkit::Mlp net_;
};

/// O = g(X). Throws numkit::ShapeError unless X has exactly two columns.
Tensor apply_mixing(const Tensor& x, const MixingSpec& spec);

enum class Task { regression, classification };

std::string to_string(Task t);
Task task_from_string(const std::string& s);

/// Observations, targets and environment labels.
struct Dataset {
  Tensor O;                       // n×d
  Tensor Y;                       // n×1
  std::vector<int> E;             // n labels in [0, num_envs)
  std::optional<Tensor> X_true;   // n×2, simulator output only
  std::size_t num_envs = 0;

  std::size_t rows() const { return O.rows(); }
  /// Throws std::invalid_argument if row counts or env labels disagree.
  void validate() const;
  /// Rows whose label is `env`.
  std::vector<std::size_t> env_rows(int env) const;
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

/// Concatenates per-environment samples (env e drawn from a seed derived from
/// (seed, e)), maps them through `mixing` and labels them with their index.
/// In classification mode Y is binarized at the median of the whole dataset.
Dataset make_multi_env_dataset(const std::vector<EnvSpec>& envs, std::size_t n_per_env,
                               const MixingSpec& mixing, std::uint64_t seed,
                               Task task = Task::regression);

/// CSV with header o_0..o_{d-1},y,e[,x_true_0,x_true_1]; 17 significant digits.
void write_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::string& path);
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::string& path);

}  // namespace icrl::semgen
