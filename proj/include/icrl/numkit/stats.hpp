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
#include <vector>

namespace icrl::numkit {

double mean_of(std::span<const double> v);
/// Unbiased sample variance; 0 for fewer than two values.
double variance_of(std::span<const double> v);
double median_of(std::vector<double> v);

/// Average ranks (ties share the mean of their positions), 1-based.
std::vector<double> ranks(std::span<const double> v);
/// Pearson correlation; 0 when either input is constant.
double pearson(std::span<const double> a, std::span<const double> b);
/// Spearman rank correlation; 0 when either input is constant.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace icrl::numkit
