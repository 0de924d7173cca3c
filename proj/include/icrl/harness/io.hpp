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

#include <iosfwd>
#include <string>

#include "icrl/numkit/tensor.hpp"
#include "json.hpp"

namespace icrl::harness {

/// Latent matrix as CSV with header x_hat_0..x_hat_{k-1}; 17 significant
/// digits, so values survive the round trip bit-for-bit.
void write_latents_csv(const numkit::Tensor& latents, std::ostream& out);
void write_latents_csv(const numkit::Tensor& latents, const std::string& path);
numkit::Tensor read_latents_csv(std::istream& in);
numkit::Tensor read_latents_csv(const std::string& path);

/// Pretty-printed with a trailing newline.
void write_json(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json(const std::string& path);

}  // namespace icrl::harness
