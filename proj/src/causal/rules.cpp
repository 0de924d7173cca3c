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

#include "icrl/causal/rules.hpp"

#include <cmath>
#include <cstdio>

#include "icrl/numkit/mlp.hpp"
#include "icrl/numkit/stats.hpp"

namespace icrl::causal {

using semgen::StructureKind;

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::classified:
      return "classified";
    case VerdictStatus::undecided:
      return "undecided";
    case VerdictStatus::noise_dimension:
      return "noise_dimension";
    case VerdictStatus::unclassifiable:
      return "unclassifiable";
  }
  return "unclassifiable";
}

namespace {

std::string describe(const char* name, const CITestResult& r, double alpha) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s: p=%.4g -> %s", name, r.p_value,
                r.p_value > alpha ? "independent" : "dependent");
  return buf;
}

const CITestResult& need(const std::optional<CITestResult>& r, const char* name) {
  if (!r) throw std::logic_error(std::string("evidence lacks the test ") + name);
  return *r;
}

void fire(StructureVerdict& v, const char* rule, StructureKind kind) {
  v.status = VerdictStatus::classified;
  v.rule = rule;
  v.tag = kind;
  v.trail.push_back(std::string("rule ") + rule + " -> Fig. " + semgen::to_string(kind));
}

}  // namespace

StructureVerdict dispatch_rules(const Evidence& ev, double alpha) {
  StructureVerdict v;
  v.evidence = ev;
  auto dep = [&](const CITestResult& r) { return !(r.p_value > alpha); };
  const bool a = dep(ev.x_y), b = dep(ev.x_e), c = dep(ev.e_y);
  v.trail.push_back(describe("X~Y", ev.x_y, alpha));
  v.trail.push_back(describe("X~E", ev.x_e, alpha));
  v.trail.push_back(describe("E~Y", ev.e_y, alpha));

  if (!a && !b) {
    v.status = VerdictStatus::noise_dimension;
    v.trail.push_back("X independent of both Y and E: noise dimension");
    return v;
  }
  if (!a && b && !c) {
    fire(v, "1.1", StructureKind::fig2e);
    return v;
  }
  if (!a && b && c) {
    v.status = VerdictStatus::unclassifiable;
    v.trail.push_back("pattern matches no rule");
    return v;
  }
  if (a && !b && c) {
    fire(v, "1.2", StructureKind::fig2i);
    return v;
  }
  if (a && b && !c) {
    fire(v, "1.3", StructureKind::fig2g);
    return v;
  }
  if (a && !b && !c) {
    if (!ev.anm) throw std::logic_error("evidence lacks the additive-noise direction test");
    v.trail.push_back("additive noise model: " + to_string(ev.anm->preferred) + " (" + ev.anm->reason + ")");
    switch (ev.anm->preferred) {
      case Direction::x_to_y:
        fire(v, "2.1", StructureKind::fig2c);
        return v;
      case Direction::y_to_x:
        fire(v, "2.2", StructureKind::fig2d);
        return v;
      case Direction::undecided:
        v.status = VerdictStatus::undecided;
        return v;
    }
  }

  // All three pairs dependent.
  const CITestResult& xy_e = need(ev.x_y_given_e, "X~Y|E");
  const CITestResult& xe_y = need(ev.x_e_given_y, "X~E|Y");
  const CITestResult& ye_x = need(ev.y_e_given_x, "Y~E|X");
  v.trail.push_back(describe("X~Y|E", xy_e, alpha));
  v.trail.push_back(describe("X~E|Y", xe_y, alpha));
  v.trail.push_back(describe("Y~E|X", ye_x, alpha));
  struct Candidate {
    const CITestResult* test;
    const char* rule;
    StructureKind kind;
  };
  const Candidate candidates[] = {{&xy_e, "1.4", StructureKind::fig2k},
                                  {&xe_y, "1.5", StructureKind::fig2j},
                                  {&ye_x, "1.6", StructureKind::fig2f}};
  const Candidate* best = nullptr;
  for (const Candidate& cand : candidates)
    if (!dep(*cand.test) && (!best || cand.test->p_value > best->test->p_value)) best = &cand;
  if (best) {
    fire(v, best->rule, best->kind);
    return v;
  }
  if (ev.delta_error) {
    v.status = VerdictStatus::undecided;
    v.trail.push_back("delta not computable: " + *ev.delta_error);
    return v;
  }
  if (!ev.delta) throw std::logic_error("evidence lacks the delta scores");
  char buf[160];
  std::snprintf(buf, sizeof buf, "delta: X->Y %.4g, Y->X %.4g", ev.delta->delta_x_to_y, ev.delta->delta_y_to_x);
  v.trail.push_back(buf);
  switch (ev.delta->preferred()) {
    case Direction::x_to_y:
      fire(v, "3.1", StructureKind::fig2l);
      break;
    case Direction::y_to_x:
      fire(v, "3.2", StructureKind::fig2m);
      break;
    case Direction::undecided:
      v.status = VerdictStatus::undecided;
      break;
  }
  return v;
}

StructureVerdict classify_structure(std::span<const double> x, std::span<const double> y, std::span<const int> e,
                                    const CIConfig& cfg) {
  cfg.validate();
  if (x.size() != y.size() || x.size() != e.size())
    throw std::invalid_argument("classify_structure: inputs are not aligned");
  const Variable vx = Variable::continuous("X", std::vector<double>(x.begin(), x.end()));
  const Variable vy = Variable::continuous("Y", std::vector<double>(y.begin(), y.end()));
  const Variable ve = Variable::discrete("E", std::vector<int>(e.begin(), e.end()));
  auto sub = [&](std::uint64_t stream) {
    CIConfig c = cfg;
    c.seed = numkit::derive_seed(cfg.seed, stream);
    return c;
  };

  Evidence ev;
  ev.x_y = test_independence(vx, vy, sub(1));
  ev.x_e = test_independence(vx, ve, sub(2));
  ev.e_y = test_independence(ve, vy, sub(3));
  const double alpha = cfg.alpha;
  const bool a = !ev.x_y.independent, b = !ev.x_e.independent, c = !ev.e_y.independent;
  if (a && !b && !c) {
    ev.anm = anm_direction(x, y, sub(7));
  } else if (a && b && c) {
    ev.x_y_given_e = test_cond_independence(vx, vy, std::span(&ve, 1), sub(4));
    ev.x_e_given_y = test_cond_independence(vx, ve, std::span(&vy, 1), sub(5));
    ev.y_e_given_x = test_cond_independence(vy, ve, std::span(&vx, 1), sub(6));
    if (ev.x_y_given_e->p_value <= alpha && ev.x_e_given_y->p_value <= alpha && ev.y_e_given_x->p_value <= alpha) {
      try {
        ev.delta = delta_criterion(x, y, e, sub(8));
      } catch (const std::domain_error& err) {
        ev.delta_error = err.what();
      }
    }
  }
  return dispatch_rules(ev, alpha);
}

bool is_parent_rule(const std::string& rule) {
  return rule == "1.2" || rule == "1.6" || rule == "2.1" || rule == "3.1";
}

EmptyParentSetError::EmptyParentSetError(ParentReport report)
    : std::runtime_error(
          "no latent dimension matched a parent rule (1.2, 1.6, 2.1, 3.1); "
          "fall back with apply_parent_fallback() or revisit Phase 1"),
      report_(std::move(report)) {}

ParentReport discover_parents(const numkit::Tensor& latents, std::span<const double> y, std::span<const int> e,
                              const CIConfig& cfg) {
  if (latents.rows() != y.size()) throw std::invalid_argument("discover_parents: latents and Y are not aligned");
  ParentReport report;
  for (std::size_t j = 0; j < latents.cols(); ++j) {
    CIConfig dim_cfg = cfg;
    dim_cfg.seed = numkit::derive_seed(cfg.seed, j);
    const std::vector<double> col = latents.col_at(j).values();
    ParentVerdict pv;
    pv.latent_index = j;
    pv.verdict = classify_structure(col, y, e, dim_cfg);
    if (is_parent_rule(pv.verdict.rule)) {
      pv.is_parent = true;
      pv.matched_rule = pv.verdict.rule;
      report.parents.push_back(j);
    }
    report.verdicts.push_back(std::move(pv));
  }
  if (report.parents.empty()) throw EmptyParentSetError(std::move(report));
  return report;
}

ParentReport apply_parent_fallback(ParentReport report, const numkit::Tensor& latents, std::span<const double> y) {
  if (latents.cols() == 0) throw std::invalid_argument("apply_parent_fallback: no latent columns");
  std::size_t best = 0;
  double best_rho = -1.0;
  for (std::size_t j = 0; j < latents.cols(); ++j) {
    const double rho = std::abs(numkit::spearman(latents.col_at(j).values(), y));
    if (rho > best_rho) {
      best_rho = rho;
      best = j;
    }
  }
  report.parents = {best};
  report.fallback_used = true;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "FALLBACK: no parent rule fired; using latent %zu (largest |Spearman rho| = %.3f with Y)", best,
                best_rho);
  report.warning = buf;
  return report;
}

}  // namespace icrl::causal
