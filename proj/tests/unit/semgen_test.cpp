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

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "gtest/gtest.h"
#include "icrl/semgen/semgen.hpp"
#include "icrl/semgen/structures.hpp"
#include "support/ols.hpp"

namespace {

using namespace icrl::semgen;
using icrl::numkit::Tensor;

double variance(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

TEST(Model1, ZeroSigma2MakesYEqualX1) {
  auto s = sample_model1({1.0, 0.0, 0.5}, 1000, 3);
  EXPECT_EQ(s.y, s.x1);
}

TEST(Model1, ZeroSigma3MakesX2EqualY) {
  auto s = sample_model1({1.0, 0.3, 0.0}, 1000, 3);
  EXPECT_EQ(s.x2, s.y);
}

TEST(Model1, VarianceOfX2AddsUp) {
  auto s = sample_model1({1.0, 0.0, 0.2}, 1'000'000, 11);
  EXPECT_NEAR(variance(s.x2), 1.2, 0.01);
}

TEST(Model1, MomentsWithinThreeStandardErrors) {
  const EnvSpec env{0.7, 0.4, 1.5};
  const std::size_t n = 100'000;
  auto s = sample_model1(env, n, 5);
  struct Check {
    const std::vector<double>* col;
    double var;
  };
  for (const Check& c : {Check{&s.x1, 0.7}, Check{&s.y, 1.1}, Check{&s.x2, 2.6}}) {
    const double m = std::accumulate(c.col->begin(), c.col->end(), 0.0) / n;
    EXPECT_LT(std::abs(m), 3.0 * std::sqrt(c.var / n));
    // Var of a sample variance of Gaussians is 2 sigma^4 / (n - 1).
    EXPECT_LT(std::abs(variance(*c.col) - c.var), 3.0 * c.var * std::sqrt(2.0 / (n - 1)));
  }
}

TEST(Model1, RejectsInvalidEnv) {
  EXPECT_THROW(sample_model1({-1.0, 0.0, 0.0}, 10, 1), std::invalid_argument);
  EXPECT_THROW(sample_model1({1.0, 0.0, 5000.0}, 10, 1), std::invalid_argument);
  EXPECT_THROW(sample_model1({1.0, 0.0, 0.0}, 0, 1), std::invalid_argument);
}

TEST(Model1, Reproducible) {
  auto a = sample_model1({1.0, 0.1, 2.0}, 500, 9);
  auto b = sample_model1({1.0, 0.1, 2.0}, 500, 9);
  EXPECT_EQ(a.x1, b.x1);
  EXPECT_EQ(a.x2, b.x2);
  EXPECT_EQ(a.y, b.y);
}

TEST(OlsOracle, ClosedForms) {
  const auto c1 = ols_oracle(1, {0.3, 0.4, 0.5});
  EXPECT_EQ(c1, (std::array<double, 2>{1.0, 0.0}));
  const auto c3 = ols_oracle(3, {1.0, 0.0, 0.2});
  EXPECT_DOUBLE_EQ(c3[0], 1.0);
  EXPECT_DOUBLE_EQ(c3[1], 0.0);
  const auto c2 = ols_oracle(2, {1.0, 0.0, 0.2});
  EXPECT_DOUBLE_EQ(c2[0], 0.0);
  EXPECT_NEAR(c2[1], 1.0 / 1.2, 1e-15);
}

TEST(OlsOracle, DegenerateCasesNamed) {
  try {
    ols_oracle(3, {1.0, 0.0, 0.0});
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("case 3"), std::string::npos);
  }
  EXPECT_THROW(ols_oracle(2, {0.0, 0.0, 0.0}), std::domain_error);
  EXPECT_THROW(ols_oracle(4, {1.0, 1.0, 1.0}), std::invalid_argument);
}

TEST(OlsOracle, Case2MatchesBruteForceLeastSquares) {
  const EnvSpec env{1.0, 0.0, 0.2};
  auto s = sample_model1(env, 1'000'000, 21);
  const auto fit = icrl::testing::least_squares_no_intercept({&s.x2}, s.y);
  EXPECT_NEAR(fit[0], ols_oracle(2, env)[1], 5e-3);
}

TEST(Mixing, IdentityIsIdentity) {
  Tensor x = Tensor::from_rows({{1, 2}});
  EXPECT_EQ(apply_mixing(x, MixingSpec::standard(MixingKind::identity, 0)), x);
}

TEST(Mixing, LinearIsMatrixProduct) {
  Mixing g(MixingSpec::standard(MixingKind::linear, 4));
  const Tensor& s = g.matrix();
  ASSERT_EQ(s.rows(), 2u);
  ASSERT_EQ(s.cols(), 10u);
  Tensor x = Tensor::from_rows({{1, 0}, {0, 1}, {2, -3}});
  Tensor o = g.apply(x);
  for (std::size_t j = 0; j < 10; ++j) {
    EXPECT_DOUBLE_EQ(o(0, j), s(0, j));
    EXPECT_DOUBLE_EQ(o(1, j), s(1, j));
    EXPECT_DOUBLE_EQ(o(2, j), 2 * s(0, j) - 3 * s(1, j));
  }
}

TEST(Mixing, NonlinearIsFrozen) {
  auto spec = MixingSpec::standard(MixingKind::nonlinear, 8);
  Tensor x = Tensor::from_rows({{0.3, -1.2}, {2.0, 0.5}});
  EXPECT_EQ(apply_mixing(x, spec), apply_mixing(x, spec));
  Mixing g(spec);
  EXPECT_EQ(g.network().spec().layer_sizes, (std::vector<std::size_t>{2, 6, 10}));
}

TEST(Mixing, WrongColumnCount) {
  EXPECT_THROW(apply_mixing(Tensor(3, 3), MixingSpec::standard(MixingKind::linear, 1)),
               icrl::numkit::ShapeError);
}

TEST(MultiEnv, RowsAndLabels) {
  auto d = make_multi_env_dataset({{1, 0, 0.2}, {1, 0, 2}}, 1000,
                                  MixingSpec::standard(MixingKind::nonlinear, 1), 3);
  EXPECT_EQ(d.rows(), 2000u);
  EXPECT_EQ(d.O.cols(), 10u);
  EXPECT_EQ(std::set<int>(d.E.begin(), d.E.end()), (std::set<int>{0, 1}));
  ASSERT_TRUE(d.X_true.has_value());
  EXPECT_NO_THROW(d.validate());
}

TEST(MultiEnv, SingleEnvConstantLabel) {
  auto d = make_multi_env_dataset({{1, 0, 100}}, 50, MixingSpec::standard(MixingKind::identity, 0),
                                  1);
  for (int e : d.E) EXPECT_EQ(e, 0);
}

TEST(MultiEnv, EmptyEnvListRejected) {
  EXPECT_THROW(make_multi_env_dataset({}, 10, MixingSpec::standard(MixingKind::identity, 0), 1),
               std::invalid_argument);
}

TEST(MultiEnv, ClassificationIsBalanced) {
  int balanced = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto d = make_multi_env_dataset({{1, 0.5, 0.2}, {1, 0.5, 2}}, 500,
                                    MixingSpec::standard(MixingKind::linear, seed), seed,
                                    Task::classification);
    double ones = 0;
    for (double v : d.Y.data()) {
      ASSERT_TRUE(v == 0.0 || v == 1.0);
      ones += v;
    }
    const double frac = ones / d.rows();
    if (frac >= 0.45 && frac <= 0.55) ++balanced;
  }
  EXPECT_EQ(balanced, 20);
}

TEST(MultiEnv, ReproducibleBitwise) {
  auto spec = MixingSpec::standard(MixingKind::nonlinear, 2);
  auto a = make_multi_env_dataset({{1, 0, 0.2}, {1, 0, 2}}, 100, spec, 7);
  auto b = make_multi_env_dataset({{1, 0, 0.2}, {1, 0, 2}}, 100, spec, 7);
  EXPECT_EQ(a.O, b.O);
  EXPECT_EQ(a.Y, b.Y);
  EXPECT_EQ(a.E, b.E);
}

TEST(Csv, RoundTripIsExact) {
  auto d = make_multi_env_dataset({{1, 0, 0.2}, {1, 0, 2}}, 20,
                                  MixingSpec::standard(MixingKind::nonlinear, 5), 1);
  std::stringstream ss;
  write_csv(d, ss);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "o_0,o_1,o_2,o_3,o_4,o_5,o_6,o_7,o_8,o_9,y,e,x_true_0,x_true_1");
  auto back = read_csv(ss);
  EXPECT_EQ(back.O, d.O);
  EXPECT_EQ(back.Y, d.Y);
  EXPECT_EQ(back.E, d.E);
  EXPECT_EQ(*back.X_true, *d.X_true);
  EXPECT_EQ(back.num_envs, 2u);
}

TEST(Csv, RejectsBadHeader) {
  std::stringstream ss("a,b,c\n1,2,3\n");
  EXPECT_THROW(read_csv(ss), std::runtime_error);
}

TEST(Structures, EdgeTablesSatisfyAssumptionOne) {
  int parents = 0;
  for (StructureKind k : kAllStructures) {
    const EdgeSet e = edges_of(k);
    EXPECT_TRUE(e.x_to_y || e.y_to_x || e.e_to_x) << to_string(k);
    EXPECT_FALSE(e.x_to_y && e.y_to_x) << to_string(k);
    EXPECT_EQ(structure_from_string(to_string(k)), k);
    parents += is_parent_structure(k);
  }
  EXPECT_EQ(parents, 4);
}

TEST(Structures, NoEnvEdgeMeansEnvInvariantMarginal) {
  // X -> Y only: the environments share one distribution for X.
  auto d = generate_structure_dataset(StructureKind::fig2c, 2, 20000, 4);
  double m[2] = {0, 0}, v[2] = {0, 0};
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    m[d.e[i]] += d.x[i];
    v[d.e[i]] += d.x[i] * d.x[i];
  }
  for (int e = 0; e < 2; ++e) {
    m[e] /= 20000;
    v[e] = v[e] / 20000 - m[e] * m[e];
  }
  EXPECT_NEAR(m[0], m[1], 0.05);
  EXPECT_NEAR(v[0], v[1], 0.05);
}

TEST(Structures, Reproducible) {
  auto a = generate_structure_dataset(StructureKind::fig2l, 2, 100, 9);
  auto b = generate_structure_dataset(StructureKind::fig2l, 2, 100, 9);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
}

}  // namespace
