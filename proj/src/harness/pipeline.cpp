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

#include "icrl/harness/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "icrl/causal/serialize.hpp"
#include "icrl/numkit/stats.hpp"

namespace icrl::harness {

namespace nk = numkit;
using nk::Tensor;

PhaseError::PhaseError(std::string phase, const std::string& what)
    : std::runtime_error(phase + ": " + what), phase_(std::move(phase)) {}

namespace {

template <typename F>
auto in_phase(const std::string& phase, F&& f) {
  try {
    return f();
  } catch (const PhaseError&) {
    throw;
  } catch (const std::exception& e) {
    throw PhaseError(phase, e.what());
  }
}

Tensor columns(const Tensor& t, const std::vector<std::size_t>& cols) {
  Tensor out(t.rows(), cols.size());
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t c = 0; c < cols.size(); ++c) out(i, c) = t(i, cols[c]);
  return out;
}

// Linear-interpolated quantile of an already sorted sample.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> quantile_grid(std::vector<double> v, std::size_t g) {
  std::sort(v.begin(), v.end());
  std::vector<double> out(g);
  for (std::size_t k = 0; k < g; ++k) out[k] = quantile(v, 0.05 + 0.9 * static_cast<double>(k) / static_cast<double>(g - 1));
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

SimulatedData simulate(const ExperimentConfig& cfg, std::uint64_t seed) {
  return in_phase("simulate", [&] {
    cfg.validate();
    const SeedPlan plan(seed);
    SimulatedData d;
    d.mixing = semgen::MixingSpec::standard(cfg.mixing, plan.mixing);
    d.train = semgen::make_multi_env_dataset(cfg.train_envs(), cfg.n_per_env, d.mixing, plan.train_data, cfg.task);
    d.test = semgen::make_multi_env_dataset({cfg.test_env()}, cfg.n_per_env, d.mixing, plan.test_data, cfg.task);
    const int test_label = static_cast<int>(cfg.train_sigma3.size());
    std::fill(d.test.E.begin(), d.test.E.end(), test_label);
    d.test.num_envs = cfg.train_sigma3.size() + 1;
    return d;
  });
}

Phase1Result run_phase1(const ExperimentConfig& cfg, std::uint64_t seed, const semgen::Dataset& train) {
  return in_phase("phase1", [&] {
    ivae::IvaeConfig ic = cfg.ivae;
    ic.seed = SeedPlan(seed).ivae;
    ic.task = cfg.task;
    Phase1Result r{ivae::train_ivae(train, ic), {}, std::nullopt};
    r.posterior = ivae::infer_latents(r.training.model, train.O, train.Y, train.E);
    if (train.X_true) r.mcc = ivae::mcc_score(*train.X_true, r.posterior.mean);
    return r;
  });
}

causal::ParentReport run_phase2(const ExperimentConfig& cfg, std::uint64_t seed, const Tensor& latents,
                                const semgen::Dataset& train) {
  return in_phase("phase2", [&] {
    causal::ParentReport report;
    if (!cfg.phase2) {
      report.parents.resize(latents.cols());
      std::iota(report.parents.begin(), report.parents.end(), 0);
      report.warning = "phase 2 disabled: every latent dimension is used";
      return report;
    }
    causal::CIConfig cc = cfg.causal;
    cc.seed = SeedPlan(seed).causal;
    const std::vector<double> y = train.Y.col_at(0).values();
    try {
      return causal::discover_parents(latents, y, train.E, cc);
    } catch (const causal::EmptyParentSetError& e) {
      return causal::apply_parent_fallback(e.report(), latents, y);
    }
  });
}

Phase3Result run_phase3(const ExperimentConfig& cfg, std::uint64_t phi_seed, std::uint64_t w_seed,
                        const semgen::Dataset& train, const semgen::Dataset& test, const Tensor& latents,
                        const std::vector<std::size_t>& inputs) {
  return in_phase("phase3", [&] {
    if (inputs.empty()) throw std::invalid_argument("no latent dimensions to regress on");
    const Tensor targets = columns(latents, inputs);
    predictor::TrainConfig pc = cfg.predictor;
    pc.task = cfg.task;
    pc.seed = phi_seed;
    auto phi = predictor::train_phi(train.O, targets, pc);
    pc.seed = w_seed;
    auto w = predictor::train_w(targets, train.Y, pc);
    Phase3Result r{inputs, std::move(phi), std::move(w), {}, {}};
    r.train = predictor::evaluate(predictor::predict(r.phi.model, r.w.model, train.O), train.Y, train.E, cfg.task);
    r.test = predictor::evaluate(predictor::predict(r.phi.model, r.w.model, test.O), test.Y, test.E, cfg.task);
    return r;
  });
}

EnergyGrid energy_sweep(const predictor::PhiModel& phi, const semgen::MixingSpec& mixing, const Tensor& x_true,
                        std::size_t grid) {
  if (x_true.cols() != 2) throw nk::ShapeError("energy sweep needs the two true latents, got " + nk::shape_string(x_true));
  if (grid < 2) throw std::invalid_argument("energy grid needs at least 2 points per side");
  EnergyGrid e;
  e.x1 = quantile_grid(x_true.col_at(0).values(), grid);
  e.x2 = quantile_grid(x_true.col_at(1).values(), grid);
  Tensor pts(grid * grid, 2);
  for (std::size_t i = 0; i < grid; ++i)
    for (std::size_t j = 0; j < grid; ++j) {
      pts(i * grid + j, 0) = e.x1[i];
      pts(i * grid + j, 1) = e.x2[j];
    }
  e.phi = phi.apply(semgen::apply_mixing(pts, mixing));
  const std::size_t k = e.phi.cols();
  auto range = [&](std::size_t fixed, bool sweep_x1, std::size_t c) {
    double lo = 0, hi = 0;
    for (std::size_t s = 0; s < grid; ++s) {
      const std::size_t row = sweep_x1 ? s * grid + fixed : fixed * grid + s;
      const double v = e.phi(row, c);
      lo = s ? std::min(lo, v) : v;
      hi = s ? std::max(hi, v) : v;
    }
    return hi - lo;
  };
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t f = 0; f < grid; ++f) {
      e.x1_sensitivity += range(f, true, c) / static_cast<double>(grid);
      e.x2_sensitivity += range(f, false, c) / static_cast<double>(grid);
    }
  return e;
}

nlohmann::json to_json(const predictor::EvalResult& r) {
  nlohmann::json per_env = nlohmann::json::object(), rows = nlohmann::json::object();
  for (const auto& [env, v] : r.per_env) per_env[std::to_string(env)] = v;
  for (const auto& [env, n] : r.per_env_rows) rows[std::to_string(env)] = n;
  return {{"metric", r.task == semgen::Task::regression ? "mse" : "accuracy"},
          {"pooled", r.pooled},
          {"per_env", per_env},
          {"rows", rows}};
}

nlohmann::json phase1_json(const Phase1Result& r) {
  nlohmann::json j = {{"elbo_curve", r.training.elbo_curve}, {"warnings", r.training.warnings}};
  if (r.mcc) {
    nlohmann::json corr = nlohmann::json::array();
    for (std::size_t i = 0; i < r.mcc->correlation.rows(); ++i) corr.push_back(r.mcc->correlation.row_at(i).values());
    j["mcc"] = {{"score", r.mcc->score},
                {"permutation", r.mcc->permutation},
                {"matched", r.mcc->matched},
                {"correlation", corr}};
  } else {
    j["mcc"] = nullptr;
  }
  return j;
}

nlohmann::json phase3_json(const Phase3Result& r) {
  return {{"inputs", r.inputs},
          {"phi_loss_curve", r.phi.loss_curve},
          {"w_loss_curve", r.w.loss_curve},
          {"train", to_json(r.train)},
          {"test", to_json(r.test)}};
}

SeedRun run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const SeedPlan plan(seed);
  nlohmann::json timing;
  auto t0 = std::chrono::steady_clock::now();
  SimulatedData data = simulate(cfg, seed);
  timing["simulate"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  Phase1Result p1 = run_phase1(cfg, seed, data.train);
  timing["phase1"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  causal::ParentReport p2 = run_phase2(cfg, seed, p1.posterior.mean, data.train);
  timing["phase2"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  Phase3Result p3 = run_phase3(cfg, plan.phi, plan.w, data.train, data.test, p1.posterior.mean, p2.parents);
  SeedRun run{seed, std::move(data), std::move(p1), std::move(p2), std::move(p3), {}, {}, {}, {}, {}, std::move(timing)};
  const Tensor& latents = run.phase1.posterior.mean;
  std::vector<std::size_t> others;
  for (std::size_t j = 0; j < latents.cols(); ++j)
    if (std::find(run.phase2.parents.begin(), run.phase2.parents.end(), j) == run.phase2.parents.end())
      others.push_back(j);
  if (!others.empty())
    run.non_cause = run_phase3(cfg, nk::derive_seed(plan.ablation, 1), nk::derive_seed(plan.ablation, 2),
                               run.data.train, run.data.test, latents, others);
  if (run.data.train.X_true)
    run.energy = in_phase("analysis", [&] {
      return energy_sweep(run.phase3.phi.model, run.data.mixing, *run.data.train.X_true, cfg.energy_grid);
    });
  run.timing["phase3"] = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  if (cfg.run_erm)
    run.erm = in_phase("erm", [&] {
      predictor::TrainConfig tc = cfg.predictor;
      tc.task = cfg.task;
      tc.seed = plan.erm;
      BaselineRun b{predictor::erm_baseline(run.data.train, tc), {}};
      b.test = predictor::evaluate(b.fit.model.apply(run.data.test.O), run.data.test.Y, run.data.test.E, cfg.task);
      return b;
    });
  if (cfg.run_irm)
    run.irm = in_phase("irm", [&] {
      predictor::BaselineConfig bc = cfg.irm;
      bc.train.task = cfg.task;
      bc.train.seed = plan.irm;
      BaselineRun b{predictor::irmv1_baseline(run.data.train, bc), {}};
      b.test = predictor::evaluate(b.fit.model.apply(run.data.test.O), run.data.test.Y, run.data.test.E, cfg.task);
      return b;
    });
  run.timing["baselines"] = seconds_since(t0);

  nlohmann::json& r = run.report;
  r["format"] = "icrl-report/1";
  r["config_hash"] = config_hash(cfg);
  r["config"] = to_json(cfg);
  r["seed"] = seed;
  r["mixing"] = {{"kind", semgen::to_string(run.data.mixing.kind)},
                 {"seed", run.data.mixing.seed},
                 {"effective_seed", semgen::Mixing(run.data.mixing).effective_seed()}};
  r["data"] = {{"train_rows", run.data.train.rows()}, {"test_rows", run.data.test.rows()}};
  r["phase1"] = phase1_json(run.phase1);
  r["phase2"] = causal::to_json(run.phase2);
  r["phase2"]["enabled"] = cfg.phase2;
  r["phase3"] = phase3_json(run.phase3);
  r["ablations"]["non_cause"] = run.non_cause ? phase3_json(*run.non_cause) : nlohmann::json(nullptr);
  auto baseline_json = [](const std::optional<BaselineRun>& b) {
    if (!b) return nlohmann::json(nullptr);
    nlohmann::json j = {{"loss_curve", b->fit.loss_curve}, {"train", to_json(b->fit.train_eval)}, {"test", to_json(b->test)}};
    if (!b->fit.penalty_curve.empty()) j["final_penalty"] = b->fit.penalty_curve.back();
    return j;
  };
  r["baselines"] = {{"erm", baseline_json(run.erm)}, {"irm", baseline_json(run.irm)}};
  if (run.energy) {
    const double ratio = run.energy->x1_sensitivity > 0 ? run.energy->x2_sensitivity / run.energy->x1_sensitivity
                                                        : std::numeric_limits<double>::infinity();
    r["energy"] = {{"grid", cfg.energy_grid},
                   {"x1_sensitivity", run.energy->x1_sensitivity},
                   {"x2_sensitivity", run.energy->x2_sensitivity},
                   {"ratio", std::isfinite(ratio) ? nlohmann::json(ratio) : nlohmann::json(nullptr)}};
  } else {
    r["energy"] = nullptr;
  }
  nlohmann::json warnings = run.phase1.training.warnings;
  if (!run.phase2.warning.empty()) warnings.push_back(run.phase2.warning);
  r["warnings"] = warnings;
  return run;
}

}  // namespace icrl::harness
