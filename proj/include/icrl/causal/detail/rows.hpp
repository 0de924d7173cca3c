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

// Row bookkeeping shared by the causal tests. Not part of the public API.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "icrl/causal/ci_tests.hpp"

namespace icrl::causal::detail {

void check_aligned(std::span<const Variable* const> vars);
/// Lexicographic row order over all variables' values.
std::vector<std::size_t> canonical_order(std::span<const Variable* const> vars);
Variable take_rows(const Variable& v, std::span<const std::size_t> rows);
/// Sorted random subset of min(n, cap) row indices.
std::vector<std::size_t> subsample(std::size_t n, std::size_t cap, std::uint64_t seed);
bool is_constant(const Variable& v);
std::vector<std::vector<double>> one_hot(std::span<const int> labels);
std::vector<std::vector<double>> as_columns(const Variable& v);
Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& cols, std::span<const std::size_t> rows);
/// target minus its kernel-ridge prediction from `inputs`, fitted on fit_rows
/// and evaluated on every row.
std::vector<double> krr_residual(const std::vector<std::vector<double>>& inputs, std::span<const double> target,
                                 std::span<const std::size_t> fit_rows);

}  // namespace icrl::causal::detail
