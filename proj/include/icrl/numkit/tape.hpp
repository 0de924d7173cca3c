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

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "icrl/numkit/tensor.hpp"

namespace icrl::numkit {

class Tape;

/// Handle to a node recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
};

/// Gradients produced by Tape::backward, indexed by the variables they belong to.
class Gradients {
 public:
  explicit Gradients(std::vector<Tensor> grads) : grads_(std::move(grads)) {}
  const Tensor& operator[](Var v) const { return grads_.at(v.id); }
  Tensor take(Var v) { return std::move(grads_.at(v.id)); }

 private:
  std::vector<Tensor> grads_;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so the
/// recording order is already a topological order of the graph.
class Tape {
 public:
  /// Maps the upstream gradient to one gradient per input.
  using BackwardFn = std::function<std::vector<Tensor>(
      const Tensor& grad_out, const std::vector<const Tensor*>& inputs, const Tensor& output)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable leaf (a parameter or an input we want gradients for).
  Var leaf(Tensor value);
  /// Leaf that never receives a gradient.
  Var constant(Tensor value);

  /// Appends an op node. Throws NumericError naming `op` if `value` is not finite.
  Var record(std::string op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  const std::string& op_name(Var v) const { return nodes_.at(v.id).op; }
  std::size_t size() const { return nodes_.size(); }

  /// Gradients of a scalar `loss` with respect to every node on the tape.
  /// Leaves that the loss does not reach get zero tensors of their shape.
  Gradients backward(Var loss) const;

 private:
  struct Node {
    std::string op;
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = true;
  };
  std::vector<Node> nodes_;
};

// Recorded ops. Binary elementwise ops accept equal shapes, or a 1×m operand
// broadcast over the rows of an n×m operand.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var subtract(Var a, Var b);
Var multiply(Var a, Var b);
Var relu(Var x);
Var sigmoid(Var x);
Var exp(Var x);
Var log(Var x);
Var square(Var x);
Var sum(Var x);
Var mean(Var x);
/// Column-wise concatenation.
Var concat(Var a, Var b);
Var scale(Var x, double factor);
Var add_scalar(Var x, double offset);
Var slice_cols(Var x, std::size_t begin, std::size_t count);
/// Per-row sum, n×m -> n×1.
Var row_sum(Var x);

}  // namespace icrl::numkit
