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

#include "icrl/causal/ci_tests.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <map>
#include <numeric>

#include "icrl/causal/detail/rows.hpp"
#include "icrl/causal/kernel_ridge.hpp"
#include "icrl/numkit/mlp.hpp"
#include "icrl/numkit/stats.hpp"

namespace icrl::causal {

Variable Variable::continuous(std::string name, std::vector<double> column) {
  Variable v;
  v.name = std::move(name);
  v.columns.push_back(std::move(column));
  return v;
}

Variable Variable::continuous(std::string name, std::vector<std::vector<double>> columns) {
  if (columns.empty()) throw std::invalid_argument("variable '" + name + "' has no columns");
  Variable v;
  v.name = std::move(name);
  v.columns = std::move(columns);
  return v;
}

Variable Variable::discrete(std::string name, std::vector<int> labels) {
  Variable v;
  v.name = std::move(name);
  v.type = VarType::discrete;
  v.labels = std::move(labels);
  return v;
}

std::size_t Variable::rows() const {
  if (is_discrete()) return labels.size();
  return columns.empty() ? 0 : columns.front().size();
}

void CIConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (permutations < 1) throw std::invalid_argument("permutations must be positive");
  if (max_rows < 20) throw std::invalid_argument("max_rows must be at least 20");
}

namespace detail {

void check_aligned(std::span<const Variable* const> vars) {
  const std::size_t n = vars.front()->rows();
  for (const Variable* v : vars) {
    if (!v->is_discrete()) {
      if (v->columns.empty()) throw std::invalid_argument("variable '" + v->name + "' has no columns");
      for (const auto& c : v->columns)
        if (c.size() != n)
          throw std::invalid_argument("variable '" + v->name + "' is not aligned with the other inputs");
    } else if (v->labels.size() != n) {
      throw std::invalid_argument("variable '" + v->name + "' is not aligned with the other inputs");
    }
  }
}

std::vector<std::size_t> canonical_order(std::span<const Variable* const> vars) {
  const std::size_t n = vars.front()->rows();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    for (const Variable* v : vars) {
      if (v->is_discrete()) {
        if (v->labels[i] != v->labels[j]) return v->labels[i] < v->labels[j];
      } else {
        for (const auto& c : v->columns)
          if (c[i] != c[j]) return c[i] < c[j];
      }
    }
    return false;
  });
  return idx;
}

Variable take_rows(const Variable& v, std::span<const std::size_t> rows) {
  Variable out;
  out.name = v.name;
  out.type = v.type;
  if (v.is_discrete()) {
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) out.labels.push_back(v.labels[r]);
  } else {
    for (const auto& c : v.columns) {
      std::vector<double> col;
      col.reserve(rows.size());
      for (std::size_t r : rows) col.push_back(c[r]);
      out.columns.push_back(std::move(col));
    }
  }
  return out;
}

std::vector<std::size_t> subsample(std::size_t n, std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= cap) return idx;
  numkit::Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

bool is_constant(const Variable& v) {
  if (v.is_discrete()) {
    return std::adjacent_find(v.labels.begin(), v.labels.end(), std::not_equal_to<>()) == v.labels.end();
  }
  for (const auto& c : v.columns) {
    if (c.empty()) continue;
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    const double scale = std::max(std::abs(*lo), std::abs(*hi));
    if (*hi - *lo > 1e-12 * (1.0 + scale)) return false;
  }
  return true;
}

std::vector<std::vector<double>> one_hot(std::span<const int> labels) {
  std::vector<int> levels(labels.begin(), labels.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<std::vector<double>> cols(levels.size(), std::vector<double>(labels.size(), 0.0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto k = std::lower_bound(levels.begin(), levels.end(), labels[i]) - levels.begin();
    cols[static_cast<std::size_t>(k)][i] = 1.0;
  }
  return cols;
}

std::vector<std::vector<double>> as_columns(const Variable& v) {
  return v.is_discrete() ? one_hot(v.labels) : v.columns;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& cols, std::span<const std::size_t> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][rows[i]];
  return m;
}

std::vector<double> krr_residual(const std::vector<std::vector<double>>& inputs, std::span<const double> target,
                                 std::span<const std::size_t> fit_rows) {
  const std::size_t n = target.size();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const Eigen::MatrixXd Xfit = to_matrix(inputs, fit_rows);
  Eigen::VectorXd yfit(static_cast<Eigen::Index>(fit_rows.size()));
  for (std::size_t i = 0; i < fit_rows.size(); ++i) yfit(static_cast<Eigen::Index>(i)) = target[fit_rows[i]];
  const KernelRidge model = KernelRidge::fit(Xfit, yfit);
  const Eigen::VectorXd pred = model.predict(to_matrix(inputs, all));
  std::vector<double> res(n);
  for (std::size_t i = 0; i < n; ++i) res[i] = target[i] - pred(static_cast<Eigen::Index>(i));
  return res;
}

}  // namespace detail

namespace {

using Columns = std::vector<std::vector<double>>;

// Double-centered Euclidean distance matrix, row-major n x n.
std::vector<double> centered_distances(const Columns& cols) {
  const std::size_t n = cols.front().size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (const auto& c : cols) s += (c[i] - c[j]) * (c[i] - c[j]);
      d[i * n + j] = d[j * n + i] = std::sqrt(s);
    }
  }
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row_mean[i] += d[i * n + j];
    grand += row_mean[i];
    row_mean[i] /= static_cast<double>(n);
  }
  grand /= static_cast<double>(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] += grand - row_mean[i] - row_mean[j];
  return d;
}

double frobenius(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double permuted_sum(const std::vector<double>& a, const std::vector<double>& b, const std::vector<std::size_t>& p) {
  const std::size_t n = p.size();
  double diag = 0.0, off = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a.data() + i * n;
    const double* bi = b.data() + p[i] * n;
    diag += ai[i] * bi[p[i]];
    for (std::size_t j = i + 1; j < n; ++j) off += ai[j] * bi[p[j]];
  }
  return diag + 2.0 * off;
}

double dcor_from(double cov, double va, double vb) {
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return std::sqrt(std::max(0.0, cov) / std::sqrt(va * vb));
}

CITestResult finish(CITestResult r, const CIConfig& cfg) {
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  r.independent = r.p_value > cfg.alpha;
  return r;
}

CITestResult degenerate_result(const std::string& which) {
  CITestResult r;
  r.degenerate = true;
  r.independent = true;
  r.p_value = 1.0;
  r.method = "degenerate: constant " + which;
  return r;
}

// Rows are already canonical.
CITestResult marginal_core(const Variable& a, const Variable& b, const CIConfig& cfg) {
  if (detail::is_constant(a)) return degenerate_result(a.name);
  if (detail::is_constant(b)) return degenerate_result(b.name);
  if (a.is_discrete() && !b.is_discrete()) {
    CITestResult r = marginal_core(b, a, cfg);
    return r;
  }

  const auto rows = detail::subsample(a.rows(), cfg.max_rows, numkit::derive_seed(cfg.seed, 11));
  const Variable as = detail::take_rows(a, rows);
  const Variable bs = detail::take_rows(b, rows);
  const PermutationResult perm = dcor_permutation_test(detail::as_columns(as), detail::as_columns(bs),
                                                       cfg.permutations, numkit::derive_seed(cfg.seed, 12));
  CITestResult r;
  r.statistic = perm.dcor;
  r.p_value = perm.p_value;
  r.method = "dcor-permutation";
  if (b.is_discrete() && !a.is_discrete()) {
    double p_bf = 1.0;
    for (const auto& col : a.columns) p_bf = std::min(p_bf, brown_forsythe(col, b.labels).p_value);
    p_bf = std::min(1.0, p_bf * static_cast<double>(a.columns.size()));
    r.p_value = std::min(1.0, 2.0 * std::min(p_bf, perm.p_value));
    r.method = "brown-forsythe+dcor-permutation";
  }
  return finish(r, cfg);
}

CITestResult cond_continuous_core(const Variable& a, const Variable& b, const std::vector<const Variable*>& given,
                                  const CIConfig& cfg) {
  if (given.empty()) return marginal_core(a, b, cfg);
  Columns inputs;
  for (const Variable* g : given)
    for (const auto& c : g->columns) inputs.push_back(c);
  // Residuals are tested on the rows the regression was fitted on; out-of-sample
  // residuals carry tail misfit that a full-sample variance test picks up.
  const auto rows = detail::subsample(a.rows(), cfg.max_rows, numkit::derive_seed(cfg.seed, 21));
  for (auto& c : inputs) {
    std::vector<double> sub;
    for (std::size_t r : rows) sub.push_back(c[r]);
    c = std::move(sub);
  }
  std::vector<std::size_t> all(rows.size());
  std::iota(all.begin(), all.end(), 0);
  auto residualize = [&](const Variable& v) {
    Variable r = detail::take_rows(v, rows);
    if (r.is_discrete()) return r;
    for (auto& c : r.columns) c = detail::krr_residual(inputs, c, all);
    return r;
  };
  CIConfig inner = cfg;
  inner.seed = numkit::derive_seed(cfg.seed, 22);
  CITestResult r = marginal_core(residualize(a), residualize(b), inner);
  r.method = "krr-residual+" + r.method;
  return r;
}

}  // namespace

double distance_correlation(const Columns& a, const Columns& b) {
  if (a.empty() || b.empty() || a.front().size() != b.front().size())
    throw std::invalid_argument("distance_correlation: inputs must be aligned and non-empty");
  const auto A = centered_distances(a);
  const auto B = centered_distances(b);
  return dcor_from(frobenius(A, B), frobenius(A, A), frobenius(B, B));
}

PermutationResult dcor_permutation_test(const Columns& a, const Columns& b, std::size_t permutations,
                                        std::uint64_t seed) {
  if (a.empty() || b.empty() || a.front().size() != b.front().size())
    throw std::invalid_argument("dcor_permutation_test: inputs must be aligned and non-empty");
  const std::size_t n = a.front().size();
  const auto A = centered_distances(a);
  const auto B = centered_distances(b);
  const double observed = frobenius(A, B);
  PermutationResult out;
  out.dcor = dcor_from(observed, frobenius(A, A), frobenius(B, B));
  numkit::Rng rng(seed);
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  const double tol = 1e-12 * std::abs(observed);
  std::size_t exceed = 0;
  for (std::size_t k = 0; k < permutations; ++k) {
    std::shuffle(p.begin(), p.end(), rng);
    if (permuted_sum(A, B, p) >= observed - tol) ++exceed;
  }
  out.p_value = static_cast<double>(1 + exceed) / static_cast<double>(1 + permutations);
  return out;
}

BrownForsythe brown_forsythe(std::span<const double> values, std::span<const int> labels) {
  if (values.size() != labels.size()) throw std::invalid_argument("brown_forsythe: length mismatch");
  std::map<int, std::vector<double>> groups;
  for (std::size_t i = 0; i < values.size(); ++i) groups[labels[i]].push_back(values[i]);
  std::vector<std::vector<double>> z;
  for (auto& [level, vals] : groups) {
    if (vals.size() < 2) continue;
    const double med = numkit::median_of(vals);
    for (double& v : vals) v = std::abs(v - med);
    z.push_back(std::move(vals));
  }
  BrownForsythe out;
  const std::size_t k = z.size();
  std::size_t total = 0;
  for (const auto& g : z) total += g.size();
  if (k < 2 || total <= k) return out;
  double grand = 0.0;
  for (const auto& g : z) grand += std::accumulate(g.begin(), g.end(), 0.0);
  grand /= static_cast<double>(total);
  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : z) {
    const double m = numkit::mean_of(g);
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ssw += (v - m) * (v - m);
  }
  const double df1 = static_cast<double>(k - 1), df2 = static_cast<double>(total - k);
  if (ssw <= 0.0) {
    out.f = ssb > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    out.p_value = ssb > 0.0 ? 0.0 : 1.0;
    return out;
  }
  out.f = (ssb / df1) / (ssw / df2);
  out.p_value = boost::math::cdf(boost::math::complement(boost::math::fisher_f_distribution<double>(df1, df2), out.f));
  return out;
}

double fisher_combine(std::span<const double> p_values, double* statistic) {
  if (p_values.empty()) throw std::invalid_argument("fisher_combine: no p-values");
  double s = 0.0;
  for (double p : p_values) s += -2.0 * std::log(std::clamp(p, 1e-300, 1.0));
  if (statistic) *statistic = s;
  const boost::math::chi_squared_distribution<double> chi(2.0 * static_cast<double>(p_values.size()));
  return boost::math::cdf(boost::math::complement(chi, s));
}

CITestResult test_independence(const Variable& a, const Variable& b, const CIConfig& cfg) {
  cfg.validate();
  const Variable* vars[] = {&a, &b};
  detail::check_aligned(vars);
  if (a.rows() < cfg.min_rows)
    throw InsufficientDataError("independence test needs at least " + std::to_string(cfg.min_rows) +
                                " rows, got " + std::to_string(a.rows()));
  const auto order = detail::canonical_order(vars);
  return marginal_core(detail::take_rows(a, order), detail::take_rows(b, order), cfg);
}

CITestResult test_cond_independence(const Variable& a, const Variable& b, std::span<const Variable> given,
                                    const CIConfig& cfg) {
  cfg.validate();
  if (given.empty()) return test_independence(a, b, cfg);
  std::vector<const Variable*> vars = {&a, &b};
  for (const Variable& g : given) vars.push_back(&g);
  detail::check_aligned(vars);
  const std::size_t n = a.rows();
  if (n < cfg.min_rows)
    throw InsufficientDataError("conditional test needs at least " + std::to_string(cfg.min_rows) +
                                " rows, got " + std::to_string(n));

  const auto order = detail::canonical_order(vars);
  const Variable ac = detail::take_rows(a, order);
  const Variable bc = detail::take_rows(b, order);
  std::vector<Variable> cont;
  std::vector<const Variable*> disc;
  std::vector<Variable> given_c;
  for (const Variable& g : given) given_c.push_back(detail::take_rows(g, order));
  for (const Variable& g : given_c) {
    if (g.is_discrete())
      disc.push_back(&g);
    else
      cont.push_back(g);
  }
  std::vector<const Variable*> cont_ptr;
  for (const Variable& c : cont) cont_ptr.push_back(&c);

  if (disc.empty()) return cond_continuous_core(ac, bc, cont_ptr, cfg);

  // Joint level of all discrete conditioning variables.
  std::map<std::vector<int>, std::vector<std::size_t>> levels;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> key;
    for (const Variable* d : disc) key.push_back(d->labels[i]);
    levels[key].push_back(i);
  }
  auto level_name = [](const std::vector<int>& key) {
    std::string s;
    for (std::size_t i = 0; i < key.size(); ++i) s += (i ? "," : "") + std::to_string(key[i]);
    return s;
  };
  for (const auto& [key, rows] : levels) {
    if (rows.size() < cfg.min_env_rows)
      throw InsufficientDataError("conditioning level " + level_name(key) + " has " + std::to_string(rows.size()) +
                                  " rows; at least " + std::to_string(cfg.min_env_rows) + " are required");
  }

  std::vector<double> pvals;
  std::size_t k = 0;
  for (const auto& [key, rows] : levels) {
    CIConfig sub = cfg;
    sub.seed = numkit::derive_seed(cfg.seed, 100 + k++);
    sub.max_rows = std::max(cfg.max_rows / levels.size(), std::min<std::size_t>(rows.size(), 150));
    std::vector<Variable> cont_l;
    for (const Variable& c : cont) cont_l.push_back(detail::take_rows(c, rows));
    std::vector<const Variable*> cont_lp;
    for (const Variable& c : cont_l) cont_lp.push_back(&c);
    const CITestResult r =
        cond_continuous_core(detail::take_rows(ac, rows), detail::take_rows(bc, rows), cont_lp, sub);
    pvals.push_back(r.p_value);
  }
  CITestResult r;
  r.p_value = fisher_combine(pvals, &r.statistic);
  r.method = "per-level(" + std::to_string(levels.size()) + ")+fisher";
  return finish(r, cfg);
}

}  // namespace icrl::causal
