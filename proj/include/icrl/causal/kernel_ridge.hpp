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

#include <Eigen/Dense>
#include <vector>

namespace icrl::causal {

/// Gaussian-kernel ridge regression. Inputs are standardized per column, the
/// bandwidth is the median pairwise distance of the training inputs, and the
/// ridge is picked from a log grid by generalized cross-validation.
class KernelRidge {
 public:
  /// X: n x p, y: n. Requires n >= 2.
  static KernelRidge fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

  double ridge() const { return ridge_; }
  double bandwidth() const { return bandwidth_; }
  double gcv_score() const { return gcv_; }

  /// Ridge values searched by fit().
  static std::vector<double> ridge_grid();

 private:
  Eigen::MatrixXd standardize(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const;

  Eigen::RowVectorXd x_mean_;
  Eigen::RowVectorXd x_scale_;
  Eigen::MatrixXd centers_;
  Eigen::VectorXd dual_;
  double y_mean_ = 0.0;
  double bandwidth_ = 1.0;
  double ridge_ = 1.0;
  double gcv_ = 0.0;
};

}  // namespace icrl::causal
