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

#include "icrl/causal/kernel_ridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace icrl::causal {

std::vector<double> KernelRidge::ridge_grid() {
  std::vector<double> grid;
  for (int k = -16; k <= 4; ++k) grid.push_back(std::pow(10.0, 0.25 * k));
  return grid;
}

Eigen::MatrixXd KernelRidge::standardize(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd Z = X.rowwise() - x_mean_;
  return Z.array().rowwise() / x_scale_.array();
}

Eigen::MatrixXd KernelRidge::kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const {
  const Eigen::VectorXd an = A.rowwise().squaredNorm();
  const Eigen::VectorXd bn = B.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * A * B.transpose()).colwise() + an;
  d2.rowwise() += bn.transpose();
  const double inv = -0.5 / (bandwidth_ * bandwidth_);
  return (d2.array().max(0.0) * inv).exp().matrix();
}

KernelRidge KernelRidge::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::Index n = X.rows();
  if (n < 2 || y.size() != n) throw std::invalid_argument("kernel ridge: need n >= 2 aligned rows");
  KernelRidge m;
  m.x_mean_ = X.colwise().mean();
  m.x_scale_.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double sd = std::sqrt((X.col(j).array() - m.x_mean_(j)).square().sum() / static_cast<double>(n));
    m.x_scale_(j) = sd > 0.0 ? sd : 1.0;
  }
  m.centers_ = m.standardize(X);
  m.y_mean_ = y.mean();
  const Eigen::VectorXd yc = y.array() - m.y_mean_;

  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) dists.push_back((m.centers_.row(i) - m.centers_.row(j)).norm());
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2), dists.end());
  const double med = dists[dists.size() / 2];
  m.bandwidth_ = med > 0.0 ? med : 1.0;

  const Eigen::MatrixXd K = m.kernel(m.centers_, m.centers_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd& Q = eig.eigenvectors();
  const Eigen::VectorXd z = Q.transpose() * yc;

  const double nd = static_cast<double>(n);
  double best = std::numeric_limits<double>::infinity();
  for (double r : ridge_grid()) {
    double rss = 0.0, trace = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double shrink = r / (lam(i) + r);
      rss += shrink * shrink * z(i) * z(i);
      trace += lam(i) / (lam(i) + r);
    }
    const double denom = nd - trace;
    const double score = denom > 0.0 ? nd * rss / (denom * denom) : std::numeric_limits<double>::infinity();
    if (score < best) {
      best = score;
      m.ridge_ = r;
    }
  }
  m.gcv_ = best;
  const Eigen::VectorXd w = z.array() / (lam.array() + m.ridge_);
  m.dual_ = Q * w;
  return m;
}

Eigen::VectorXd KernelRidge::predict(const Eigen::MatrixXd& X) const {
  if (X.cols() != centers_.cols()) throw std::invalid_argument("kernel ridge: column count mismatch");
  return (kernel(standardize(X), centers_) * dual_).array() + y_mean_;
}

}  // namespace icrl::causal
