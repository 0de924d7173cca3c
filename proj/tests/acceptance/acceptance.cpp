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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any of them fails. `--only 1,4` restricts the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "icrl/causal/rules.hpp"
#include "icrl/harness/config.hpp"
#include "icrl/harness/pipeline.hpp"
#include "icrl/ivae/ivae.hpp"
#include "icrl/numkit/stats.hpp"
#include "icrl/predictor/predictor.hpp"
#include "icrl/semgen/structures.hpp"
#include "support/finite_diff.hpp"
#include "support/ols.hpp"

namespace {

using namespace icrl;
using numkit::Tensor;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double mean(const std::vector<double>& v) { return numkit::mean_of(v); }

std::string list(const std::vector<double>& v, const char* f = "%.3g") {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(f, v[i]);
  return s + "]";
}

// ------------------------------------------------------------------ shared runs

std::vector<harness::SeedRun> run_seeds(const harness::ExperimentConfig& cfg, std::size_t count) {
  std::vector<harness::SeedRun> runs;
  for (std::uint64_t s = 0; s < count; ++s) runs.push_back(harness::run_seed(cfg, s));
  return runs;
}

struct NonlinearRuns {
  std::vector<harness::SeedRun> runs;
  double seconds = 0;
};

const NonlinearRuns& nonlinear_runs() {
  static const NonlinearRuns cached = [] {
    const auto t0 = Clock::now();
    NonlinearRuns r;
    r.runs = run_seeds(harness::ExperimentConfig::defaults(semgen::MixingKind::nonlinear), 10);
    r.seconds = seconds_since(t0);
    return r;
  }();
  return cached;
}

double test_mse(const harness::Phase3Result& p) { return p.test.pooled; }

// ------------------------------------------------------------------ criteria

Outcome c1_ols() {
  const auto t0 = Clock::now();
  numkit::Rng rng(2026);
  std::uniform_real_distribution<double> var(0.1, 3.0);
  double worst = 0;
  for (int k = 0; k < 3; ++k) {
    const semgen::EnvSpec env{var(rng), var(rng), var(rng)};
    const auto s = semgen::sample_model1(env, 1'000'000, 100 + k);
    const std::vector<std::vector<double>> fits = {
        {icrl::testing::least_squares_no_intercept({&s.x1}, s.y)[0], 0.0},
        {0.0, icrl::testing::least_squares_no_intercept({&s.x2}, s.y)[0]},
        icrl::testing::least_squares_no_intercept({&s.x1, &s.x2}, s.y)};
    for (int c = 1; c <= 3; ++c) {
      const auto oracle = semgen::ols_oracle(c, env);
      for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(fits[c - 1][j] - oracle[j]));
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 5e-3 && secs < 30, "max |beta_hat - closed form| = " + fmt("%.2e", worst) + " over 3 envs x 3 cases (< 5e-3); " +
                                         fmt("%.1f", secs) + " s (< 30)"};
}

numkit::Mlp random_net(std::vector<std::size_t> sizes, std::uint64_t seed) {
  numkit::Rng rng(seed);
  numkit::Mlp net(numkit::MlpSpec::make(std::move(sizes), numkit::Activation::relu), rng);
  std::uniform_real_distribution<double> b(-0.5, 0.5);
  for (std::size_t l = 1; l < net.parameters().size(); l += 2)
    for (double& v : net.parameters()[l].data()) v = b(rng);
  return net;
}

Outcome c2_gradients() {
  const auto t0 = Clock::now();
  std::vector<std::string> bad;
  double worst = 0;
  std::size_t suites = 0;
  auto record = [&](const std::string& name, const icrl::testing::GradCheckResult& r) {
    ++suites;
    worst = std::max(worst, r.worst_relative_error);
    if (r.worst_relative_error >= 1e-4) bad.push_back(name);
  };

  const auto data = semgen::make_multi_env_dataset({{1, 0, 0.2}, {1, 0, 2}}, 20,
                                                   semgen::MixingSpec::standard(semgen::MixingKind::nonlinear, 5), 5);
  for (auto prior : {ivae::PriorMode::conditional, ivae::PriorMode::unconditional})
    for (std::size_t hidden : {6u, 0u}) {
      ivae::IvaeConfig c;
      c.prior = prior;
      c.hidden = hidden;
      c.seed = 9;
      ivae::IvaeModel m(c, data.O.cols(), data.num_envs);
      numkit::Rng rng(11);
      std::normal_distribution<double> n01;
      Tensor noise(data.rows(), c.latent_dim);
      for (double& v : noise.data()) v = n01(rng);
      const auto g = ivae::elbo_gradients(m, data, noise);
      record("ivae/" + ivae::to_string(prior) + "/h" + std::to_string(hidden),
             icrl::testing::check_gradients(m.parameters(), g.gradients,
                                            [&] { return ivae::elbo(m, data, noise).total; }, 100, 3));
    }

  numkit::Rng rng(12);
  std::normal_distribution<double> n01;
  auto normal = [&](std::size_t r, std::size_t c) {
    Tensor t(r, c);
    for (double& v : t.data()) v = n01(rng);
    return t;
  };
  Tensor labels(64, 1);
  std::bernoulli_distribution coin(0.5);
  for (double& v : labels.data()) v = coin(rng) ? 1.0 : 0.0;
  std::vector<int> env(64);
  for (std::size_t i = 0; i < env.size(); ++i) env[i] = static_cast<int>(i % 2);

  struct Case {
    std::string name;
    std::size_t in, out;
    semgen::Task task;
    bool penalty;
  };
  const std::vector<Case> cases = {{"phi", 10, 2, semgen::Task::regression, false},
                                   {"w/regression", 1, 1, semgen::Task::regression, false},
                                   {"w/classification", 1, 1, semgen::Task::classification, false},
                                   {"erm/regression", 10, 1, semgen::Task::regression, false},
                                   {"erm/classification", 10, 1, semgen::Task::classification, false},
                                   {"irm/regression", 10, 1, semgen::Task::regression, true},
                                   {"irm/classification", 10, 1, semgen::Task::classification, true}};
  std::uint64_t seed = 20;
  for (const auto& cs : cases)
    for (std::size_t hidden : {6u, 0u}) {
      auto net = random_net(hidden ? std::vector<std::size_t>{cs.in, hidden, cs.out} : std::vector<std::size_t>{cs.in, cs.out},
                            ++seed);
      const Tensor X = normal(64, cs.in);
      const Tensor T = cs.task == semgen::Task::classification ? labels : normal(64, cs.out);
      const std::span<const int> e = cs.penalty ? std::span<const int>(env) : std::span<const int>();
      const auto r = predictor::objective(net, X, T, cs.task, e, cs.penalty ? 100.0 : 0.0);
      std::vector<Tensor*> ptrs;
      for (Tensor& p : net.parameters()) ptrs.push_back(&p);
      record(cs.name + "/h" + std::to_string(hidden),
             icrl::testing::check_gradients(ptrs, r.gradients, [&] {
               return predictor::objective(net, X, T, cs.task, e, cs.penalty ? 100.0 : 0.0).value;
             }, 100, seed));
    }
  const double secs = seconds_since(t0);
  std::string detail = std::to_string(suites) + " architecture/loss pairs, worst relative error " + fmt("%.2e", worst) +
                       " (< 1e-4); " + fmt("%.1f", secs) + " s (< 60)";
  for (const auto& b : bad) detail += "; failing " + b;
  return {bad.empty() && secs < 60, detail};
}

Outcome c3_entropy() {
  const auto t0 = Clock::now();
  numkit::Rng rng(33);
  std::uniform_real_distribution<double> lv_dist(-4.0, 3.0);
  std::normal_distribution<double> n01;
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> lv{lv_dist(rng), lv_dist(rng)};
    const std::vector<double> mu{3 * n01(rng), 3 * n01(rng)};
    double acc = 0;
    const int samples = 100000;
    for (int s = 0; s < samples; ++s)
      for (std::size_t j = 0; j < lv.size(); ++j) {
        const double sd = std::exp(0.5 * lv[j]);
        const double z = (mu[j] + sd * n01(rng) - mu[j]) / sd;
        acc += -0.5 * std::log(2 * std::numbers::pi) - 0.5 * lv[j] - 0.5 * z * z;
      }
    worst = std::max(worst, std::abs(ivae::gaussian_log_q_expectation(lv) - acc / samples));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-2 && secs < 10,
          "max |closed form - MC| = " + fmt("%.2e", worst) + " on 10 posteriors (< 1e-2); " + fmt("%.1f", secs) + " s (< 10)"};
}

Outcome c4_mcc() {
  const auto& nl = nonlinear_runs();
  std::vector<double> mcc;
  for (std::size_t s = 0; s < 5; ++s) mcc.push_back(nl.runs[s].phase1.mcc->score);
  const auto ok = std::count_if(mcc.begin(), mcc.end(), [](double m) { return m >= 0.8; });
  const double per_seed = nl.seconds / 10;
  return {ok >= 4 && per_seed < 600, "MCC seeds 0-4 " + list(mcc) + ", " + std::to_string(ok) + "/5 >= 0.80 (need 4); " +
                                         fmt("%.1f", per_seed) + " s/seed (< 600)"};
}

Outcome c5_rules() {
  const auto t0 = Clock::now();
  std::map<int, std::pair<int, int>> by_group;  // group -> (correct, total)
  std::string per_kind;
  for (auto kind : semgen::kAllStructures) {
    int correct = 0;
    for (int s = 0; s < 50; ++s) {
      const auto d = semgen::generate_structure_dataset(kind, 2, 5000, 1000 + s);
      causal::CIConfig cfg;
      cfg.seed = numkit::derive_seed(77, static_cast<std::uint64_t>(s));
      const auto v = causal::classify_structure(d.x, d.y, d.e, cfg);
      correct += v.tag && *v.tag == kind;
    }
    auto& g = by_group[semgen::rule_group(kind)];
    g.first += correct;
    g.second += 50;
    per_kind += " " + semgen::to_string(kind) + "=" + std::to_string(correct) + "/50";
  }
  const double secs = seconds_since(t0);
  bool pass = secs < 1200;
  std::string detail;
  for (auto [group, ct] : by_group) {
    const double rate = static_cast<double>(ct.first) / ct.second;
    const double need = group == 1 ? 0.9 : 0.8;
    pass = pass && rate >= need;
    detail += "group " + std::to_string(group) + " " + fmt("%.1f%%", 100 * rate) + " (>= " + fmt("%.0f%%", 100 * need) + "); ";
  }
  return {pass, detail + fmt("%.0f", secs) + " s (< 1200);" + per_kind};
}

Outcome c6_parents() {
  const auto& nl = nonlinear_runs();
  int ok = 0, fallback = 0;
  std::vector<std::string> misses;
  for (const auto& run : nl.runs) {
    const std::size_t x1 = run.phase1.mcc->permutation[0];
    const bool hit = run.phase2.parents == std::vector<std::size_t>{x1};
    ok += hit;
    fallback += run.phase2.fallback_used;
    if (!hit) misses.push_back(std::to_string(run.seed));
  }
  std::string detail = std::to_string(ok) + "/10 seeds flag exactly the X1-matched latent (need 8); parent chosen by the "
                       "empty-set fallback in " + std::to_string(fallback) + "/10";
  if (!misses.empty()) {
    detail += "; wrong on seeds";
    for (const auto& m : misses) detail += " " + m;
  }
  return {ok >= 8, detail};
}

Outcome c7_table1_nonlinear() {
  const auto& nl = nonlinear_runs();
  std::vector<double> erm_train, erm_test, icrl_test;
  for (std::size_t s = 0; s < 5; ++s) {
    const auto& run = nl.runs[s];
    erm_train.push_back(run.erm->fit.train_eval.pooled);
    erm_test.push_back(run.erm->test.pooled);
    icrl_test.push_back(test_mse(run.phase3));
  }
  const double et = mean(erm_test), er = mean(erm_train), it = mean(icrl_test);
  const bool a = et >= 5 * (er + 1.0);
  const bool b = it <= 60;
  const bool c = it <= 0.3 * et;
  const double secs = nl.seconds / 2;
  return {a && b && c && secs < 3600,
          "ERM train " + fmt("%.3g", er) + ", test " + fmt("%.3g", et) + (a ? " >= " : " < ") + "5x(train+1)=" +
              fmt("%.3g", 5 * (er + 1)) + "; ICRL test " + fmt("%.3g", it) + (b ? " <= 60" : " > 60") +
              (c ? ", <= " : ", > ") + "0.3xERM=" + fmt("%.3g", 0.3 * et) + "; " + fmt("%.0f", secs) + " s (< 3600)"};
}

Outcome c8_table1_linear() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::string detail;
  for (auto kind : {semgen::MixingKind::identity, semgen::MixingKind::linear}) {
    const auto runs = run_seeds(harness::ExperimentConfig::defaults(kind), 5);
    std::vector<double> erm, icrl;
    for (const auto& r : runs) {
      erm.push_back(r.erm->test.pooled);
      icrl.push_back(test_mse(r.phase3));
    }
    const double e = mean(erm), i = mean(icrl);
    pass = pass && e < 0.05 && i >= 0.5 && i <= 2.0;
    detail += semgen::to_string(kind) + ": ERM test " + fmt("%.3g", e) + " (< 0.05), ICRL test " + fmt("%.3g", i) +
              " (in [0.5, 2]) per seed " + list(icrl) + "; ";
  }
  const double secs = seconds_since(t0);
  return {pass && secs < 1800, detail + fmt("%.0f", secs) + " s (< 1800)"};
}

Outcome c9_vae_ablation() {
  auto cfg = harness::ExperimentConfig::defaults(semgen::MixingKind::nonlinear);
  cfg.ivae.prior = ivae::PriorMode::unconditional;
  cfg.run_erm = cfg.run_irm = false;
  std::vector<double> vae, ivae_mse;
  for (std::uint64_t s = 0; s < 5; ++s) {
    vae.push_back(test_mse(harness::run_seed(cfg, s).phase3));
    ivae_mse.push_back(test_mse(nonlinear_runs().runs[s].phase3));
  }
  const double mv = numkit::median_of(vae), mi = numkit::median_of(ivae_mse);
  return {mv >= 2 * mi, "median test MSE VAE " + fmt("%.3g", mv) + " vs iVAE " + fmt("%.3g", mi) + " (need >= 2x); VAE " +
                            list(vae) + ", iVAE " + list(ivae_mse)};
}

Outcome c10_non_cause() {
  int ok = 0;
  std::vector<double> ratio;
  for (const auto& run : nonlinear_runs().runs) {
    const double r = test_mse(*run.non_cause) / test_mse(run.phase3);
    ratio.push_back(r);
    ok += r >= 2.0;
  }
  return {ok >= 8, std::to_string(ok) + "/10 seeds with non-cause/cause test MSE >= 2 (need 8); ratios " + list(ratio)};
}

Outcome c11_energy() {
  int ok = 0;
  std::vector<double> ratio;
  for (std::size_t s = 0; s < 5; ++s) {
    const auto& e = *nonlinear_runs().runs[s].energy;
    const double r = e.x2_sensitivity / e.x1_sensitivity;
    ratio.push_back(r);
    ok += r < 0.25;
  }
  return {ok >= 4, std::to_string(ok) + "/5 seeds with X2/X1 sensitivity < 0.25 (need 4); ratios " + list(ratio)};
}

// Residual variance of the composed predictor across held-out sigma3 values.
Outcome invariance_surrogate() {
  int icrl_ok = 0, erm_ok = 0;
  std::vector<double> icrl_spread, erm_spread;
  for (std::size_t s = 0; s < 5; ++s) {
    const auto& run = nonlinear_runs().runs[s];
    const auto d = semgen::make_multi_env_dataset({{1, 0, 10}, {1, 0, 50}, {1, 0, 100}}, 1000, run.data.mixing,
                                                  numkit::derive_seed(run.seed, 11));
    auto spread = [&](const Tensor& yhat) {
      std::vector<double> v;
      for (int e = 0; e < 3; ++e) {
        std::vector<double> res;
        for (std::size_t i : d.env_rows(e)) res.push_back(yhat[i] - d.Y[i]);
        v.push_back(numkit::variance_of(res));
      }
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      return (*hi - *lo) / mean(v);
    };
    icrl_spread.push_back(spread(predictor::predict(run.phase3.phi.model, run.phase3.w.model, d.O)));
    erm_spread.push_back(spread(run.erm->fit.model.apply(d.O)));
    icrl_ok += icrl_spread.back() < 0.5;
    erm_ok += erm_spread.back() > 2.0;
  }
  return {icrl_ok >= 3 && erm_ok >= 3, "residual-variance spread over sigma3 {10,50,100}: ICRL " + list(icrl_spread) +
                                           " (" + std::to_string(icrl_ok) + "/5 < 0.5), ERM " + list(erm_spread) + " (" +
                                           std::to_string(erm_ok) + "/5 > 2)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, c1_ols},          {2, c2_gradients},  {3, c3_entropy},   {4, c4_mcc},
      {5, c5_rules},        {6, c6_parents},    {7, c7_table1_nonlinear}, {8, c8_table1_linear},
      {9, c9_vae_ablation}, {10, c10_non_cause}, {11, c11_energy}};
  const std::set<int> wanted(only.begin(), only.end());
  int failed = 0;
  for (const auto& [id, check] : criteria) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  if (wanted.empty() || wanted.count(0)) {
    const Outcome o = invariance_surrogate();
    std::printf("property invariance: %s  %s\n", o.pass ? "PASS" : "FAIL", o.detail.c_str());
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
