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

#include "icrl/semgen/semgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace icrl::semgen {

void EnvSpec::validate(double sigma_max) const {
  for (double s : {sigma1, sigma2, sigma3}) {
    if (!(s >= 0.0) || s > sigma_max) {
      throw std::invalid_argument("EnvSpec: noise variance " + std::to_string(s) +
                                  " outside [0, " + std::to_string(sigma_max) + "]");
    }
  }
}

Model1Sample sample_model1(const EnvSpec& env, std::size_t n, std::uint64_t seed) {
  env.validate();
  if (n == 0) throw std::invalid_argument("sample_model1: n must be positive");
  numkit::Rng rng(seed);
  std::normal_distribution<double> n01;
  const double s1 = std::sqrt(env.sigma1), s2 = std::sqrt(env.sigma2),
               s3 = std::sqrt(env.sigma3);
  Model1Sample out;
  out.x1.resize(n);
  out.x2.resize(n);
  out.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Draw all three noises every row so the stream layout never depends on
    // which variances happen to be zero.
    const double n1 = n01(rng), n2 = n01(rng), n3 = n01(rng);
    out.x1[i] = s1 * n1;
    out.y[i] = out.x1[i] + s2 * n2;
    out.x2[i] = out.y[i] + s3 * n3;
  }
  return out;
}

std::array<double, 2> ols_oracle(int regression_case, const EnvSpec& env) {
  env.validate();
  const double s1 = env.sigma1, s2 = env.sigma2, s3 = env.sigma3;
  switch (regression_case) {
    case 1:
      if (s1 == 0.0) throw std::domain_error("ols_oracle case 1: X1 has zero variance");
      return {1.0, 0.0};
    case 2:
      if (s1 + s2 + s3 == 0.0) {
        throw std::domain_error("ols_oracle case 2: sigma1 + sigma2 + sigma3 is zero");
      }
      return {0.0, (s1 + s2) / (s1 + s2 + s3)};
    case 3:
      if (s2 + s3 == 0.0) throw std::domain_error("ols_oracle case 3: sigma2 + sigma3 is zero");
      return {s3 / (s2 + s3), s2 / (s2 + s3)};
    default:
      throw std::invalid_argument("ols_oracle: case must be 1, 2 or 3");
  }
}

std::string to_string(MixingKind k) {
  switch (k) {
    case MixingKind::identity:
      return "identity";
    case MixingKind::linear:
      return "linear";
    case MixingKind::nonlinear:
      return "nonlinear";
  }
  return "nonlinear";
}

MixingKind mixing_kind_from_string(const std::string& s) {
  if (s == "identity") return MixingKind::identity;
  if (s == "linear") return MixingKind::linear;
  if (s == "nonlinear") return MixingKind::nonlinear;
  throw std::invalid_argument("unknown mixing kind '" + s + "'");
}

MixingSpec MixingSpec::standard(MixingKind kind, std::uint64_t seed) {
  return MixingSpec{kind, seed, kind == MixingKind::identity ? std::size_t{2} : std::size_t{10}};
}

namespace {

// Smallest singular value over largest of a d×2 matrix (via its 2×2 Gram).
double conditioning(double a, double b, double c) {
  // Gram = [[a, b], [b, c]]
  const double tr = a + c;
  const double det = a * c - b * b;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double hi = tr / 2.0 + disc;
  const double lo = tr / 2.0 - disc;
  if (hi <= 0.0) return 0.0;
  return std::sqrt(std::max(0.0, lo) / hi);
}

constexpr double kMinConditioning = 1e-3;
constexpr double kMinNetConditioning = 0.05;
constexpr int kMaxRedraws = 1000;

// Conditioning of the Jacobian of a [2 -> relu -> d] network on the linear
// piece selected by `active` (bit q set = hidden unit q is on).
double piece_conditioning(const numkit::Mlp& net, std::uint32_t active) {
  const Tensor& w1 = net.parameters()[0];  // 2×h
  const Tensor& w2 = net.parameters()[2];  // h×d
  const std::size_t h = w1.cols(), d = w2.cols();
  double a = 0, b = 0, c = 0;
  for (std::size_t o = 0; o < d; ++o) {
    double j0 = 0, j1 = 0;
    for (std::size_t q = 0; q < h; ++q) {
      if (!(active >> q & 1u)) continue;
      j0 += w1(0, q) * w2(q, o);
      j1 += w1(1, q) * w2(q, o);
    }
    a += j0 * j0;
    b += j0 * j1;
    c += j1 * j1;
  }
  return conditioning(a, b, c);
}

// Worst local conditioning over every linear piece the network shows on a
// dense grid covering the latent region the experiments reach (|x| <= 40),
// plus the pieces at infinity, where the biases no longer matter and the
// pattern depends only on the direction of x.
double network_conditioning(const numkit::Mlp& net) {
  const Tensor& w1 = net.parameters()[0];
  const Tensor& b1 = net.parameters()[1];
  const std::size_t h = w1.cols();
  std::set<std::uint32_t> pieces;
  auto pattern = [&](double u, double v, bool with_bias) {
    std::uint32_t m = 0;
    for (std::size_t q = 0; q < h; ++q)
      if (w1(0, q) * u + w1(1, q) * v + (with_bias ? b1(0, q) : 0.0) > 0.0) m |= 1u << q;
    return m;
  };
  constexpr int kDirections = 3600;
  for (int k = 0; k < kDirections; ++k) {
    const double th = 2.0 * M_PI * (k + 0.5) / kDirections;
    pieces.insert(pattern(std::cos(th), std::sin(th), false));
  }
  constexpr double kReach = 40.0, kStep = 0.1;
  for (double u = -kReach; u <= kReach; u += kStep)
    for (double v = -kReach; v <= kReach; v += kStep) pieces.insert(pattern(u, v, true));
  double worst = 1.0;
  for (std::uint32_t m : pieces) worst = std::min(worst, piece_conditioning(net, m));
  return worst;
}

}  // namespace

Mixing::Mixing(const MixingSpec& spec) : spec_(spec), effective_seed_(spec.seed) {
  switch (spec_.kind) {
    case MixingKind::identity:
      if (spec_.out_dim != 2) {
        throw std::invalid_argument("identity mixing needs out_dim == 2");
      }
      return;
    case MixingKind::linear:
      for (int attempt = 0; attempt < kMaxRedraws; ++attempt, ++effective_seed_) {
        numkit::Rng rng(effective_seed_);
        std::normal_distribution<double> n01;
        Tensor s(2, spec_.out_dim);
        for (double& v : s.data()) v = n01(rng);
        double a = 0, b = 0, c = 0;
        for (std::size_t j = 0; j < spec_.out_dim; ++j) {
          a += s(0, j) * s(0, j);
          b += s(0, j) * s(1, j);
          c += s(1, j) * s(1, j);
        }
        if (conditioning(a, b, c) > kMinConditioning) {
          matrix_ = std::move(s);
          return;
        }
      }
      break;
    case MixingKind::nonlinear:
      for (int attempt = 0; attempt < kMaxRedraws; ++attempt, ++effective_seed_) {
        numkit::Rng rng(effective_seed_);
        numkit::Mlp net(numkit::MlpSpec::make({2, 6, spec_.out_dim}, numkit::Activation::relu),
                        rng);
        // Biases as in a default-initialized fully connected layer:
        // U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
        for (std::size_t l = 0; l < 2; ++l) {
          Tensor& b = net.parameters()[2 * l + 1];
          const double bound = 1.0 / std::sqrt(static_cast<double>(net.spec().layer_sizes[l]));
          std::uniform_real_distribution<double> ub(-bound, bound);
          for (double& v : b.data()) v = ub(rng);
        }
        if (network_conditioning(net) > kMinNetConditioning) {
          net_ = std::move(net);
          return;
        }
      }
      break;
  }
  throw std::runtime_error("mixing: no well-conditioned map found from seed " +
                           std::to_string(spec_.seed));
}

std::size_t Mixing::out_dim() const { return spec_.out_dim; }

Tensor Mixing::apply(const Tensor& x) const {
  if (x.cols() != 2) {
    throw numkit::ShapeError("apply_mixing: X must have 2 columns, got " + numkit::shape_string(x));
  }
  switch (spec_.kind) {
    case MixingKind::identity:
      return x;
    case MixingKind::linear:
      return numkit::matmul(x, matrix_);
    case MixingKind::nonlinear:
      return net_.predict(x);
  }
  return x;
}

Tensor apply_mixing(const Tensor& x, const MixingSpec& spec) { return Mixing(spec).apply(x); }

std::string to_string(Task t) { return t == Task::regression ? "regression" : "classification"; }

Task task_from_string(const std::string& s) {
  if (s == "regression") return Task::regression;
  if (s == "classification") return Task::classification;
  throw std::invalid_argument("unknown task '" + s + "'");
}

void Dataset::validate() const {
  const std::size_t n = O.rows();
  if (Y.rows() != n || E.size() != n) {
    throw std::invalid_argument("Dataset: row counts differ (O " + std::to_string(n) + ", Y " +
                                std::to_string(Y.rows()) + ", E " + std::to_string(E.size()) +
                                ")");
  }
  if (X_true && X_true->rows() != n) {
    throw std::invalid_argument("Dataset: X_true row count differs from O");
  }
  for (int e : E) {
    if (e < 0 || static_cast<std::size_t>(e) >= num_envs) {
      throw std::invalid_argument("Dataset: environment label " + std::to_string(e) +
                                  " outside [0, " + std::to_string(num_envs) + ")");
    }
  }
}

std::vector<std::size_t> Dataset::env_rows(int env) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < E.size(); ++i)
    if (E[i] == env) rows.push_back(i);
  return rows;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.O = O.gather_rows(rows);
  out.Y = Y.gather_rows(rows);
  for (std::size_t r : rows) out.E.push_back(E[r]);
  if (X_true) out.X_true = X_true->gather_rows(rows);
  out.num_envs = num_envs;
  return out;
}

Dataset make_multi_env_dataset(const std::vector<EnvSpec>& envs, std::size_t n_per_env,
                               const MixingSpec& mixing, std::uint64_t seed, Task task) {
  if (envs.empty()) throw std::invalid_argument("make_multi_env_dataset: empty environment list");
  const Mixing g(mixing);
  const std::size_t n = envs.size() * n_per_env;
  Tensor x(n, 2);
  Tensor y(n, 1);
  std::vector<int> e(n);
  for (std::size_t k = 0; k < envs.size(); ++k) {
    const Model1Sample s = sample_model1(envs[k], n_per_env, numkit::derive_seed(seed, k));
    for (std::size_t i = 0; i < n_per_env; ++i) {
      const std::size_t r = k * n_per_env + i;
      x(r, 0) = s.x1[i];
      x(r, 1) = s.x2[i];
      y(r, 0) = s.y[i];
      e[r] = static_cast<int>(k);
    }
  }
  if (task == Task::classification) {
    std::vector<double> sorted(y.values());
    std::sort(sorted.begin(), sorted.end());
    const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    for (double& v : y.data()) v = v > median ? 1.0 : 0.0;
  }
  Dataset d;
  d.O = g.apply(x);
  d.Y = std::move(y);
  d.E = std::move(e);
  d.X_true = std::move(x);
  d.num_envs = envs.size();
  return d;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::runtime_error("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_csv(const Dataset& data, std::ostream& out) {
  data.validate();
  const std::size_t d = data.O.cols();
  for (std::size_t j = 0; j < d; ++j) out << "o_" << j << ',';
  out << "y,e";
  if (data.X_true) out << ",x_true_0,x_true_1";
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) out << fmt17(data.O(i, j)) << ',';
    out << fmt17(data.Y(i, 0)) << ',' << data.E[i];
    if (data.X_true) out << ',' << fmt17((*data.X_true)(i, 0)) << ',' << fmt17((*data.X_true)(i, 1));
    out << '\n';
  }
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(data, f);
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing header");
  const auto header = split_commas(line);
  std::size_t d = 0;
  while (d < header.size() && header[d] == "o_" + std::to_string(d)) ++d;
  if (d == 0 || header.size() < d + 2 || header[d] != "y" || header[d + 1] != "e") {
    throw std::runtime_error("csv: header must be o_0..o_{d-1},y,e[,x_true_0,x_true_1]");
  }
  const bool has_x = header.size() == d + 4;
  if (has_x && (header[d + 2] != "x_true_0" || header[d + 3] != "x_true_1")) {
    throw std::runtime_error("csv: unexpected trailing columns");
  }
  if (!has_x && header.size() != d + 2) throw std::runtime_error("csv: unexpected columns");

  std::vector<double> o, y, x;
  std::vector<int> e;
  std::size_t lineno = 1;
  int max_e = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " fields");
    }
    for (std::size_t j = 0; j < d; ++j) o.push_back(parse_double(cells[j], lineno));
    y.push_back(parse_double(cells[d], lineno));
    const double ev = parse_double(cells[d + 1], lineno);
    if (ev < 0 || ev != std::floor(ev)) {
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": bad environment label");
    }
    e.push_back(static_cast<int>(ev));
    max_e = std::max(max_e, e.back());
    if (has_x) {
      x.push_back(parse_double(cells[d + 2], lineno));
      x.push_back(parse_double(cells[d + 3], lineno));
    }
  }
  Dataset out;
  const std::size_t n = y.size();
  out.O = Tensor(n, d, std::move(o));
  out.Y = Tensor(n, 1, std::move(y));
  out.E = std::move(e);
  if (has_x) out.X_true = Tensor(n, 2, std::move(x));
  out.num_envs = static_cast<std::size_t>(max_e + 1);
  out.validate();
  return out;
}

Dataset read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(f);
}

}  // namespace icrl::semgen
