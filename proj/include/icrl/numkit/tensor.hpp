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
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace icrl::numkit {

/// Raised when operand shapes do not conform to an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation leaves its domain or produces NaN/Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles.
///
/// Every tensor in the library is two-dimensional; vectors are 1×n rows or
/// n×1 columns and scalars are 1×1. `shape()` reports {rows, cols}.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor row(std::vector<double> values);
  static Tensor column(std::vector<double> values);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::vector<std::size_t> shape() const { return {rows_, cols_}; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  /// Scalar value of a 1×1 tensor.
  double item() const;
  bool all_finite() const;
  bool same_shape(const Tensor& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Tensor row_at(std::size_t r) const;
  Tensor col_at(std::size_t c) const;
  Tensor transpose() const;
  /// Rows selected by index, in the given order.
  Tensor gather_rows(std::span<const std::size_t> index) const;
  Tensor slice_rows(std::size_t begin, std::size_t count) const;
  Tensor slice_cols(std::size_t begin, std::size_t count) const;

  bool operator==(const Tensor& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::string shape_string(const Tensor& t);

/// Plain (tape-free) matrix product.
Tensor matmul(const Tensor& a, const Tensor& b);
/// Horizontal concatenation; row counts must agree.
Tensor hconcat(const Tensor& a, const Tensor& b);
/// Vertical concatenation; column counts must agree.
Tensor vconcat(const Tensor& a, const Tensor& b);

}  // namespace icrl::numkit
