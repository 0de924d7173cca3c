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

// Classification of the local structure between one latent dimension X, the
// target Y and the environment label E, and the parent filter built on it.

#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "icrl/causal/ci_tests.hpp"
#include "icrl/causal/direction.hpp"
#include "icrl/numkit/tensor.hpp"
#include "icrl/semgen/structures.hpp"

namespace icrl::causal {

/// Every test outcome a classification used. Optional parts are filled only
/// when the marginal pattern calls for them.
struct Evidence {
  CITestResult x_y;
  CITestResult x_e;
  CITestResult e_y;
  std::optional<CITestResult> x_y_given_e;
  std::optional<CITestResult> x_e_given_y;
  std::optional<CITestResult> y_e_given_x;
  std::optional<AnmResult> anm;
  std::optional<DeltaScores> delta;
  /// Set instead of `delta` when a conditional density was degenerate.
  std::optional<std::string> delta_error;
};

enum class VerdictStatus { classified, undecided, noise_dimension, unclassifiable };
std::string to_string(VerdictStatus s);

struct StructureVerdict {
  VerdictStatus status = VerdictStatus::unclassifiable;
  std::optional<semgen::StructureKind> tag;
  /// "1.1" .. "3.2" when a rule fired, empty otherwise.
  std::string rule;
  Evidence evidence;
  /// Human-readable account of each decision taken.
  std::vector<std::string> trail;
};

/// Pure rule table: maps recorded evidence to a verdict. Decisions are
/// re-derived from p-values at `alpha`, so a stored verdict can be replayed.
/// Throws std::logic_error when a test the pattern needs is missing.
StructureVerdict dispatch_rules(const Evidence& evidence, double alpha);

StructureVerdict classify_structure(std::span<const double> x, std::span<const double> y, std::span<const int> e,
                                    const CIConfig& cfg);

/// Rules that identify X as a direct cause of Y.
bool is_parent_rule(const std::string& rule);

struct ParentVerdict {
  std::size_t latent_index = 0;
  bool is_parent = false;
  /// "1.2", "1.6", "2.1", "3.1" or "none".
  std::string matched_rule = "none";
  StructureVerdict verdict;
};

struct ParentReport {
  std::vector<ParentVerdict> verdicts;
  std::vector<std::size_t> parents;
  bool fallback_used = false;
  std::string warning;
};

class EmptyParentSetError : public std::runtime_error {
 public:
  explicit EmptyParentSetError(ParentReport report);
  const ParentReport& report() const { return report_; }

 private:
  ParentReport report_;
};

/// Classifies each column of `latents` (n x k) independently, with the
/// per-dimension seed derive_seed(cfg.seed, index). Throws
/// EmptyParentSetError, carrying the per-dimension verdicts, when no column
/// matches a parent rule.
ParentReport discover_parents(const numkit::Tensor& latents, std::span<const double> y, std::span<const int> e,
                              const CIConfig& cfg);

/// Picks the column with the largest |Spearman correlation| with Y as the sole
/// parent and records a warning.
ParentReport apply_parent_fallback(ParentReport report, const numkit::Tensor& latents, std::span<const double> y);

}  // namespace icrl::causal
