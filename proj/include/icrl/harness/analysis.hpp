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

// Plot-data CSVs and the multi-seed summary table.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "icrl/harness/pipeline.hpp"
#include "json.hpp"

namespace icrl::harness {

enum class Figure { fig4, fig6, fig7 };
std::string to_string(Figure f);
Figure figure_from_string(const std::string& s);

/// x_true_0, x_true_1, x_hat_0.., e: one row per training row.
void write_fig4_csv(const SeedRun& run, std::ostream& out);
/// seed, cause_dims, cause_test, non_cause_dims, non_cause_test: one row per report.
void write_fig6_csv(const std::vector<nlohmann::json>& reports, std::ostream& out);
/// x1, x2, phi_0..: grid rows with x1 outer and x2 inner.
void write_fig7_csv(const EnergyGrid& grid, std::ostream& out);

/// Writes `which` for every run into out_dir (fig6 as one file) and returns
/// the paths. Throws std::invalid_argument naming any missing artifact.
std::vector<std::string> emit_analysis(const std::vector<SeedRun>& runs, Figure which, const std::string& out_dir);

/// Merges per-seed reports of one experiment. Throws std::invalid_argument
/// when the reports come from different configurations.
nlohmann::json summarize(const std::vector<nlohmann::json>& reports);
/// Table-1-style text: one row per method, mean +/- std over seeds.
std::string render_table(const nlohmann::json& summary);

}  // namespace icrl::harness
