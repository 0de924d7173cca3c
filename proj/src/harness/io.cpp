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

#include "icrl/harness/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace icrl::harness {

void write_latents_csv(const numkit::Tensor& latents, std::ostream& out) {
  for (std::size_t j = 0; j < latents.cols(); ++j) out << (j ? "," : "") << "x_hat_" << j;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < latents.rows(); ++i) {
    for (std::size_t j = 0; j < latents.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", latents(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

void write_latents_csv(const numkit::Tensor& latents, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_latents_csv(latents, f);
}

numkit::Tensor read_latents_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("latents csv: missing header");
  std::size_t k = 0;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      if (cell != "x_hat_" + std::to_string(k)) throw std::runtime_error("latents csv: header must be x_hat_0..x_hat_{k-1}");
      ++k;
    }
  }
  if (k == 0) throw std::runtime_error("latents csv: no columns");
  std::vector<double> values;
  std::size_t rows = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || (*end != '\0' && *end != '\r'))
        throw std::runtime_error("latents csv line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      values.push_back(v);
      ++cols;
    }
    if (cols != k)
      throw std::runtime_error("latents csv line " + std::to_string(lineno) + ": expected " + std::to_string(k) +
                               " fields");
    ++rows;
  }
  return numkit::Tensor(rows, k, std::move(values));
}

numkit::Tensor read_latents_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  return read_latents_csv(f);
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << j.dump(1) << '\n';
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace icrl::harness
