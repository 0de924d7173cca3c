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

#include "icrl/numkit/tape.hpp"

#include <cmath>

namespace icrl::numkit {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::leaf(Tensor value) {
  if (!value.all_finite()) throw NumericError("leaf: non-finite value");
  nodes_.push_back(Node{"leaf", std::move(value), {}, nullptr, true});
  return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("constant: non-finite value");
  nodes_.push_back(Node{"constant", std::move(value), {}, nullptr, false});
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(std::string op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  if (!value.all_finite()) throw NumericError(op + ": produced a non-finite value");
  Node node{std::move(op), std::move(value), {}, std::move(backward), false};
  for (const Var& v : inputs) {
    if (v.tape != this) throw std::invalid_argument(node.op + ": input belongs to another tape");
    node.inputs.push_back(v.id);
    node.requires_grad = node.requires_grad || nodes_[v.id].requires_grad;
  }
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Gradients Tape::backward(Var loss) const {
  if (loss.tape != this) throw std::invalid_argument("backward: loss belongs to another tape");
  const Tensor& lv = nodes_.at(loss.id).value;
  if (lv.size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got " + shape_string(lv));
  }
  std::vector<Tensor> grads(nodes_.size());
  grads[loss.id] = Tensor(1, 1, 1.0);
  for (std::size_t k = loss.id + 1; k-- > 0;) {
    const Node& node = nodes_[k];
    if (grads[k].empty() || !node.backward || !node.requires_grad) continue;
    std::vector<const Tensor*> inputs;
    inputs.reserve(node.inputs.size());
    for (std::size_t id : node.inputs) inputs.push_back(&nodes_[id].value);
    std::vector<Tensor> local = node.backward(grads[k], inputs, node.value);
    for (std::size_t i = 0; i < node.inputs.size(); ++i) {
      const std::size_t id = node.inputs[i];
      if (!nodes_[id].requires_grad) continue;
      Tensor& g = grads[id];
      if (g.empty()) {
        g = std::move(local[i]);
      } else {
        auto dst = g.data();
        auto src = local[i].data();
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
      }
    }
  }
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (grads[k].empty()) grads[k] = Tensor(nodes_[k].value.rows(), nodes_[k].value.cols());
  }
  return Gradients(std::move(grads));
}

namespace {

Tape& tape_of(Var a, Var b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape) {
    throw std::invalid_argument(std::string(op) + ": operands must share a tape");
  }
  return *a.tape;
}

// Output shape for a broadcasting binary op.
std::pair<std::size_t, std::size_t> broadcast_shape(const Tensor& a, const Tensor& b,
                                                    const char* op) {
  if (a.same_shape(b)) return {a.rows(), a.cols()};
  if (a.cols() == b.cols() && a.rows() == 1) return {b.rows(), b.cols()};
  if (a.cols() == b.cols() && b.rows() == 1) return {a.rows(), a.cols()};
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " +
                   shape_string(b));
}

inline double at_bcast(const Tensor& t, std::size_t r, std::size_t c) {
  return t.rows() == 1 ? t(0, c) : t(r, c);
}

// Sums a full-size gradient down to the shape of a (possibly broadcast) operand.
Tensor reduce_to(const Tensor& g, const Tensor& like) {
  if (g.same_shape(like)) return g;
  Tensor out(1, like.cols());
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) out(0, c) += g(r, c);
  return out;
}

template <typename F>
Tensor binary_map(const Tensor& a, const Tensor& b, const char* op, F f) {
  auto [rows, cols] = broadcast_shape(a, b, op);
  Tensor out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = f(at_bcast(a, r, c), at_bcast(b, r, c));
  return out;
}

template <typename F>
Tensor unary_map(const Tensor& x, F f) {
  Tensor out(x.rows(), x.cols());
  auto src = x.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

double stable_sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b, "matmul");
  Tensor out = matmul(a.value(), b.value());
  return t.record("matmul", std::move(out), {a, b},
                  [](const Tensor& g, const std::vector<const Tensor*>& in, const Tensor&) {
                    return std::vector<Tensor>{matmul(g, in[1]->transpose()),
                                               matmul(in[0]->transpose(), g)};
                  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b, "add");
  Tensor out = binary_map(a.value(), b.value(), "add", [](double x, double y) { return x + y; });
  return t.record("add", std::move(out), {a, b},
                  [](const Tensor& g, const std::vector<const Tensor*>& in, const Tensor&) {
                    return std::vector<Tensor>{reduce_to(g, *in[0]), reduce_to(g, *in[1])};
                  });
}

Var subtract(Var a, Var b) {
  Tape& t = tape_of(a, b, "subtract");
  Tensor out =
      binary_map(a.value(), b.value(), "subtract", [](double x, double y) { return x - y; });
  return t.record("subtract", std::move(out), {a, b},
                  [](const Tensor& g, const std::vector<const Tensor*>& in, const Tensor&) {
                    Tensor neg = unary_map(g, [](double v) { return -v; });
                    return std::vector<Tensor>{reduce_to(g, *in[0]), reduce_to(neg, *in[1])};
                  });
}

Var multiply(Var a, Var b) {
  Tape& t = tape_of(a, b, "multiply");
  Tensor out =
      binary_map(a.value(), b.value(), "multiply", [](double x, double y) { return x * y; });
  return t.record("multiply", std::move(out), {a, b},
                  [](const Tensor& g, const std::vector<const Tensor*>& in, const Tensor&) {
                    const Tensor& x = *in[0];
                    const Tensor& y = *in[1];
                    Tensor gx(g.rows(), g.cols()), gy(g.rows(), g.cols());
                    for (std::size_t r = 0; r < g.rows(); ++r) {
                      for (std::size_t c = 0; c < g.cols(); ++c) {
                        gx(r, c) = g(r, c) * at_bcast(y, r, c);
                        gy(r, c) = g(r, c) * at_bcast(x, r, c);
                      }
                    }
                    return std::vector<Tensor>{reduce_to(gx, x), reduce_to(gy, y)};
                  });
}

Var relu(Var x) {
  Tensor out = unary_map(x.value(), [](double v) { return v > 0 ? v : 0.0; });
  return x.tape->record("relu", std::move(out), {x},
                        [](const Tensor& g, const std::vector<const Tensor*>& in, const Tensor&) {
                          Tensor gx(g.rows(), g.cols());
                          for (std::size_t i = 0; i < g.size(); ++i)
                            gx[i] = (*in[0])[i] > 0 ? g[i] : 0.0;
                          return std::vector<Tensor>{std::move(gx)};
                        });
}

Var sigmoid(Var x) {
  Tensor out = unary_map(x.value(), stable_sigmoid);
  return x.tape->record("sigmoid", std::move(out), {x},
                        [](const Tensor& g, const std::vector<const Tensor*>&, const Tensor& y) {
                          Tensor gx(g.rows(), g.cols());
                          for (std::size_t i = 0; i < g.size(); ++i)
                            gx[i] = g[i] * y[i] * (1.0 - y[i]);
                          return std::vector<Tensor>{std::move(gx)};
                        });
}

Var exp(Var x) {
  Tensor out = unary_map(x.value(), [](double v) { return std::exp(v); });
  if (!out.all_finite()) throw NumericError("exp: result overflows");
  return x.tape->record("exp", std::move(out), {x},
                        [](const Tensor& g, const std::vector<const Tensor*>&, const Tensor& y) {
                          Tensor gx(g.rows(), g.cols());
                          for (std::size_t i = 0; i < g.size(); ++i) gx[i] = g[i] * y[i];
                          return std::vector<Tensor>{std::move(gx)};
                        });
}

Var log(Var x) {
  for (double v : x.value().data()) {
    if (!(v > 0.0)) throw NumericError("log: argument must be positive, got " + std::to_string(v));
  }
  Tensor out = unary_map(x.value(), [](double v) { return std::log(v); });
  return x.tape->record("log", std::move(out), {x},
                        [](const Tensor& g, const std::vector<const Tensor*>& in, const Tensor&) {
                          Tensor gx(g.rows(), g.cols());
                          for (std::size_t i = 0; i < g.size(); ++i) gx[i] = g[i] / (*in[0])[i];
                          return std::vector<Tensor>{std::move(gx)};
                        });
}

Var square(Var x) {
  Tensor out = unary_map(x.value(), [](double v) { return v * v; });
  return x.tape->record("square", std::move(out), {x},
                        [](const Tensor& g, const std::vector<const Tensor*>& in, const Tensor&) {
                          Tensor gx(g.rows(), g.cols());
                          for (std::size_t i = 0; i < g.size(); ++i)
                            gx[i] = 2.0 * g[i] * (*in[0])[i];
                          return std::vector<Tensor>{std::move(gx)};
                        });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return x.tape->record("sum", Tensor::scalar(s), {x},
                        [](const Tensor& g, const std::vector<const Tensor*>& in, const Tensor&) {
                          return std::vector<Tensor>{Tensor(in[0]->rows(), in[0]->cols(), g[0])};
                        });
}

Var mean(Var x) {
  const std::size_t n = x.value().size();
  if (n == 0) throw ShapeError("mean: empty tensor");
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return x.tape->record("mean", Tensor::scalar(s / static_cast<double>(n)), {x},
                        [n](const Tensor& g, const std::vector<const Tensor*>& in, const Tensor&) {
                          return std::vector<Tensor>{Tensor(in[0]->rows(), in[0]->cols(),
                                                            g[0] / static_cast<double>(n))};
                        });
}

Var concat(Var a, Var b) {
  Tape& t = tape_of(a, b, "concat");
  Tensor out = hconcat(a.value(), b.value());
  return t.record("concat", std::move(out), {a, b},
                  [](const Tensor& g, const std::vector<const Tensor*>& in, const Tensor&) {
                    return std::vector<Tensor>{g.slice_cols(0, in[0]->cols()),
                                               g.slice_cols(in[0]->cols(), in[1]->cols())};
                  });
}

Var scale(Var x, double factor) {
  Tensor out = unary_map(x.value(), [factor](double v) { return v * factor; });
  return x.tape->record(
      "scale", std::move(out), {x},
      [factor](const Tensor& g, const std::vector<const Tensor*>&, const Tensor&) {
        return std::vector<Tensor>{unary_map(g, [factor](double v) { return v * factor; })};
      });
}

Var add_scalar(Var x, double offset) {
  Tensor out = unary_map(x.value(), [offset](double v) { return v + offset; });
  return x.tape->record("add_scalar", std::move(out), {x},
                        [](const Tensor& g, const std::vector<const Tensor*>&, const Tensor&) {
                          return std::vector<Tensor>{g};
                        });
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  Tensor out = x.value().slice_cols(begin, count);
  return x.tape->record(
      "slice_cols", std::move(out), {x},
      [begin, count](const Tensor& g, const std::vector<const Tensor*>& in, const Tensor&) {
        Tensor gx(in[0]->rows(), in[0]->cols());
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < count; ++c) gx(r, begin + c) = g(r, c);
        return std::vector<Tensor>{std::move(gx)};
      });
}

Var row_sum(Var x) {
  const Tensor& v = x.value();
  Tensor out(v.rows(), 1);
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) out(r, 0) += v(r, c);
  return x.tape->record("row_sum", std::move(out), {x},
                        [](const Tensor& g, const std::vector<const Tensor*>& in, const Tensor&) {
                          Tensor gx(in[0]->rows(), in[0]->cols());
                          for (std::size_t r = 0; r < gx.rows(); ++r)
                            for (std::size_t c = 0; c < gx.cols(); ++c) gx(r, c) = g(r, 0);
                          return std::vector<Tensor>{std::move(gx)};
                        });
}

}  // namespace icrl::numkit
