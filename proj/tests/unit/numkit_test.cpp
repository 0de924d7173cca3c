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

#include "gtest/gtest.h"
#include "icrl/numkit/adam.hpp"
#include "icrl/numkit/mlp.hpp"
#include "icrl/numkit/tape.hpp"
#include "support/finite_diff.hpp"

namespace {

using namespace icrl::numkit;

TEST(Tensor, ShapeMatchesData) {
  EXPECT_THROW(Tensor(2, 3, std::vector<double>(5)), ShapeError);
  Tensor t(2, 3);
  EXPECT_EQ(t.shape(), (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(t.size(), 6u);
}

TEST(Ops, MatmulByHand) {
  Tape tape;
  auto a = tape.constant(Tensor::from_rows({{1, 2}, {3, 4}}));
  auto b = tape.constant(Tensor::from_rows({{1}, {1}}));
  EXPECT_EQ(matmul(a, b).value(), Tensor::from_rows({{3}, {7}}));
}

TEST(Ops, MatmulShapeErrorNamesBothShapes) {
  Tape tape;
  auto a = tape.constant(Tensor(2, 3));
  auto b = tape.constant(Tensor(2, 3));
  try {
    matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2, 3] x [2, 3]"), std::string::npos) << msg;
  }
}

TEST(Ops, ReluAndSigmoid) {
  Tape tape;
  auto x = tape.constant(Tensor::row({-1, 0, 2}));
  EXPECT_EQ(relu(x).value(), Tensor::row({0, 0, 2}));
  auto z = tape.constant(Tensor::row({0}));
  EXPECT_DOUBLE_EQ(sigmoid(z).value()[0], 0.5);
}

TEST(Ops, DomainErrorsNameTheOp) {
  Tape tape;
  auto x = tape.constant(Tensor::row({1.0, -2.0}));
  try {
    log(x);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("log", 0), 0u);
  }
  auto big = tape.constant(Tensor::row({1000.0}));
  try {
    exp(big);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("exp", 0), 0u);
  }
}

TEST(Ops, BroadcastOnlyOverRows) {
  Tape tape;
  auto a = tape.constant(Tensor(4, 3, 1.0));
  auto b = tape.constant(Tensor::row({1, 2, 3}));
  auto c = add(a, b);
  EXPECT_EQ(c.value()(3, 2), 4.0);
  auto bad = tape.constant(Tensor::column({1, 2, 3, 4}));
  EXPECT_THROW(add(a, bad), ShapeError);
}

TEST(Backward, SumOfSquares) {
  Tape tape;
  auto x = tape.leaf(Tensor::row({1, 2, 3}));
  auto g = tape.backward(sum(square(x)));
  EXPECT_EQ(g[x], Tensor::row({2, 4, 6}));
}

TEST(Backward, SigmoidAtZero) {
  Tape tape;
  auto w = tape.leaf(Tensor::scalar(0.0));
  auto x = tape.constant(Tensor::scalar(1.0));
  auto g = tape.backward(sigmoid(matmul(w, x)));
  EXPECT_DOUBLE_EQ(g[w].item(), 0.25);
}

TEST(Backward, NonScalarLossRejected) {
  Tape tape;
  auto x = tape.leaf(Tensor::row({1, 2}));
  EXPECT_THROW(tape.backward(square(x)), ShapeError);
}

TEST(Backward, UnreachedLeafGetsZeros) {
  Tape tape;
  auto x = tape.leaf(Tensor::row({1, 2}));
  auto unused = tape.leaf(Tensor(2, 2, 5.0));
  auto g = tape.backward(sum(x));
  EXPECT_EQ(g[unused], Tensor(2, 2, 0.0));
}

TEST(Backward, BroadcastGradientReducesOverRows) {
  Tape tape;
  auto a = tape.leaf(Tensor(3, 2, 1.0));
  auto b = tape.leaf(Tensor::row({0.5, -0.5}));
  auto g = tape.backward(sum(multiply(a, b)));
  EXPECT_EQ(g[b], Tensor::row({3.0, 3.0}));
  EXPECT_EQ(g[a], Tensor(3, 2, std::vector<double>{0.5, -0.5, 0.5, -0.5, 0.5, -0.5}));
}

TEST(Backward, LinearityOfSumOfLosses) {
  Rng rng(11);
  Mlp net(MlpSpec::make({4, 6, 1}, Activation::relu), rng);
  Tensor x(8, 4);
  std::normal_distribution<double> n01;
  for (double& v : x.data()) v = n01(rng);

  auto grads_of = [&](int which) {
    Tape tape;
    auto p = net.bind(tape);
    auto in = tape.constant(x);
    auto out = net.forward(in, p);
    Var l1 = mean(square(out));
    Var l2 = sum(sigmoid(out));
    Var loss = which == 0 ? l1 : which == 1 ? l2 : add(l1, l2);
    auto g = tape.backward(loss);
    std::vector<Tensor> res;
    for (auto& v : p) res.push_back(g[v]);
    return res;
  };
  auto g1 = grads_of(0), g2 = grads_of(1), g12 = grads_of(2);
  for (std::size_t i = 0; i < g12.size(); ++i)
    for (std::size_t j = 0; j < g12[i].size(); ++j)
      EXPECT_NEAR(g12[i][j], g1[i][j] + g2[i][j], 1e-12);
}

TEST(Backward, MlpMatchesFiniteDifferences) {
  Rng rng(2024);
  Mlp net(MlpSpec::make({10, 6, 1}, Activation::relu), rng);
  std::normal_distribution<double> n01;
  for (auto& p : net.parameters())
    for (double& v : p.data()) v = 0.5 * n01(rng);
  Tensor x(32, 10), y(32, 1);
  for (double& v : x.data()) v = n01(rng);
  for (double& v : y.data()) v = n01(rng);

  Tape tape;
  auto p = net.bind(tape);
  auto out = net.forward(tape.constant(x), p);
  auto g = tape.backward(mean(square(subtract(out, tape.constant(y)))));
  std::vector<Tensor> analytic;
  for (auto& v : p) analytic.push_back(g[v]);

  std::vector<Tensor*> ptrs;
  for (auto& t : net.parameters()) ptrs.push_back(&t);
  auto loss = [&] {
    Tensor pred = net.predict(x);
    double s = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - y[i]) * (pred[i] - y[i]);
    return s / static_cast<double>(pred.size());
  };
  auto res = icrl::testing::check_gradients(ptrs, analytic, loss, 100, 7);
  EXPECT_EQ(res.checked, 73u);  // the whole [10,6,1] network has 73 parameters
  EXPECT_LT(res.worst_relative_error, 1e-4);
}

TEST(Mlp, SpecValidation) {
  EXPECT_THROW(MlpSpec::make({3}, Activation::relu), std::invalid_argument);
  EXPECT_THROW(MlpSpec::make({3, 0, 1}, Activation::relu), std::invalid_argument);
  MlpSpec bad{{2, 3}, {}};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Mlp, GlorotInitBoundsAndZeroBias) {
  Rng rng(3);
  Mlp net(MlpSpec::make({10, 6, 1}, Activation::relu), rng);
  const double limit = std::sqrt(6.0 / 16.0);
  for (double v : net.parameters()[0].data()) EXPECT_LE(std::abs(v), limit);
  for (double v : net.parameters()[1].data()) EXPECT_EQ(v, 0.0);
}

TEST(Mlp, PredictAgreesWithRecordedForward) {
  Rng rng(5);
  Mlp net(MlpSpec::make({3, 6, 2}, Activation::relu, Activation::sigmoid), rng);
  Tensor x = Tensor::from_rows({{0.1, -0.4, 2.0}, {1.0, 1.0, -1.0}});
  Tape tape;
  auto p = net.bind(tape);
  EXPECT_EQ(net.forward(tape.constant(x), p).value(), net.predict(x));
}

TEST(Adam, ZeroGradientLeavesParameters) {
  std::vector<Tensor> params{Tensor::row({1.0, -2.0})};
  AdamState st(params);
  std::vector<Tensor> grads{Tensor(1, 2)};
  adam_step(params, grads, st);
  EXPECT_EQ(params[0], Tensor::row({1.0, -2.0}));
  EXPECT_EQ(st.step(), 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<Tensor> params{Tensor::row({0.0, 0.0})};
  AdamState st(params, AdamConfig{0.001});
  std::vector<Tensor> grads{Tensor::row({3.0, -0.2})};
  adam_step(params, grads, st);
  EXPECT_NEAR(params[0][0], -0.001, 1e-9);
  EXPECT_NEAR(params[0][1], 0.001, 1e-9);
}

TEST(Adam, ConvergesOnQuadratic) {
  std::vector<Tensor> params{Tensor::scalar(0.0)};
  AdamState st(params, AdamConfig{0.1});
  for (int i = 0; i < 200; ++i) {
    Tape tape;
    auto w = tape.leaf(params[0]);
    auto g = tape.backward(square(add_scalar(w, -3.0)));
    std::vector<Tensor> grads{g[w]};
    adam_step(params, grads, st);
  }
  EXPECT_LT(std::abs(params[0].item() - 3.0), 0.1);
  EXPECT_EQ(st.step(), 200u);
}

TEST(Adam, ShapeMismatchThrows) {
  std::vector<Tensor> params{Tensor::row({0.0, 0.0})};
  AdamState st(params);
  std::vector<Tensor> grads{Tensor::row({1.0})};
  EXPECT_THROW(adam_step(params, grads, st), ShapeError);
}

TEST(Determinism, SameSeedSameTrajectory) {
  auto run = [] {
    Rng rng(77);
    Mlp net(MlpSpec::make({2, 6, 1}, Activation::relu), rng);
    AdamState st(net.parameters(), AdamConfig{0.01});
    Tensor x = Tensor::from_rows({{1, 2}, {-1, 0.5}, {0.3, -0.7}});
    Tensor y = Tensor::column({1, 0, -1});
    for (int i = 0; i < 50; ++i) {
      Tape tape;
      auto p = net.bind(tape);
      auto out = net.forward(tape.constant(x), p);
      auto g = tape.backward(mean(square(subtract(out, tape.constant(y)))));
      std::vector<Tensor> grads;
      for (auto& v : p) grads.push_back(g[v]);
      adam_step(net.parameters(), grads, st);
    }
    return net.parameters();
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
