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

// icrl command-line driver. Exit codes: 0 success, 1 usage or config error,
// 2 a phase failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "icrl/causal/serialize.hpp"
#include "icrl/harness/analysis.hpp"
#include "icrl/harness/config.hpp"
#include "icrl/harness/io.hpp"
#include "icrl/harness/pipeline.hpp"
#include "icrl/ivae/checkpoint.hpp"
#include "icrl/predictor/checkpoint.hpp"

namespace fs = std::filesystem;
namespace h = icrl::harness;

namespace {

constexpr int kUsage = 1;
constexpr int kPhase = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "experiment seed (default: first seed in the config)");
  cmd->add_option("--out", c.out, "output directory (default: the config's output_dir)");
}

h::ExperimentConfig load(const Common& c) {
  try {
    h::ExperimentConfig cfg = c.config_path.empty() ? h::ExperimentConfig::defaults(icrl::semgen::MixingKind::nonlinear)
                                                    : h::load_config(c.config_path);
    if (!c.out.empty()) cfg.output_dir = c.out;
    if (c.seed) cfg.seeds = {*c.seed};
    cfg.validate();
    return cfg;
  } catch (const std::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

fs::path out_dir(const h::ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  return cfg.output_dir;
}

icrl::semgen::Dataset read_data(const std::string& path) {
  try {
    return icrl::semgen::read_csv(path);
  } catch (const std::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

icrl::numkit::Tensor read_latents(const std::string& path, std::size_t rows) {
  icrl::numkit::Tensor t;
  try {
    t = h::read_latents_csv(path);
  } catch (const std::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
  if (t.rows() != rows)
    throw UsageError(path + ": " + std::to_string(t.rows()) + " rows, data has " + std::to_string(rows));
  return t;
}

void say(const fs::path& p) { std::cout << "wrote " << p.string() << '\n'; }

int cmd_simulate(const Common& c) {
  const auto cfg = load(c);
  const auto dir = out_dir(cfg);
  const auto data = h::simulate(cfg, cfg.seeds.front());
  icrl::semgen::write_csv(data.train, (dir / "train.csv").string());
  icrl::semgen::write_csv(data.test, (dir / "test.csv").string());
  h::write_json({{"kind", icrl::semgen::to_string(data.mixing.kind)},
                 {"seed", data.mixing.seed},
                 {"out_dim", data.mixing.out_dim}},
                (dir / "mixing.json").string());
  for (const char* f : {"train.csv", "test.csv", "mixing.json"}) say(dir / f);
  return 0;
}

int cmd_train_ivae(const Common& c, const std::string& data_path) {
  const auto cfg = load(c);
  const auto train = read_data(data_path);
  const auto dir = out_dir(cfg);
  const auto p1 = h::run_phase1(cfg, cfg.seeds.front(), train);
  icrl::ivae::save_checkpoint(p1.training.model, (dir / "ivae.json").string());
  h::write_latents_csv(p1.posterior.mean, (dir / "latents.csv").string());
  h::write_json(h::phase1_json(p1), (dir / "phase1.json").string());
  for (const char* f : {"ivae.json", "latents.csv", "phase1.json"}) say(dir / f);
  return 0;
}

int cmd_discover(Common c, const std::string& data_path, const std::string& latents_path, bool phase2_off) {
  auto cfg = load(c);
  if (phase2_off) cfg.phase2 = false;
  const auto train = read_data(data_path);
  const auto latents = read_latents(latents_path, train.rows());
  const auto dir = out_dir(cfg);
  auto report = icrl::causal::to_json(h::run_phase2(cfg, cfg.seeds.front(), latents, train));
  report["enabled"] = cfg.phase2;
  h::write_json(report, (dir / "parents.json").string());
  if (!report["warning"].get<std::string>().empty()) std::cerr << report["warning"].get<std::string>() << '\n';
  say(dir / "parents.json");
  return 0;
}

int cmd_train_predictor(const Common& c, const std::string& data_path, const std::string& test_path,
                        const std::string& latents_path, const std::string& parents_path) {
  const auto cfg = load(c);
  const auto train = read_data(data_path);
  const auto test = read_data(test_path);
  const auto latents = read_latents(latents_path, train.rows());
  std::vector<std::size_t> parents;
  try {
    parents = h::read_json(parents_path).at("parents").get<std::vector<std::size_t>>();
  } catch (const std::exception& e) {
    throw UsageError(parents_path + ": " + e.what());
  }
  const auto dir = out_dir(cfg);
  const h::SeedPlan plan(cfg.seeds.front());
  auto p3 = h::run_phase3(cfg, plan.phi, plan.w, train, test, latents, parents);
  icrl::predictor::save_bundle({p3.phi.model, p3.w.model, p3.inputs}, (dir / "predictor.json").string());
  h::write_json(h::phase3_json(p3), (dir / "phase3.json").string());
  for (const char* f : {"predictor.json", "phase3.json"}) say(dir / f);
  return 0;
}

void write_summary(const std::vector<nlohmann::json>& reports, const fs::path& dir) {
  const auto summary = h::summarize(reports);
  h::write_json(summary, (dir / "summary.json").string());
  const std::string table = h::render_table(summary);
  std::ofstream(dir / "table.txt") << table;
  std::cout << table;
  say(dir / "summary.json");
  say(dir / "table.txt");
}

int cmd_run_pipeline(const Common& c, bool phase2_off) {
  auto cfg = load(c);
  if (phase2_off) cfg.phase2 = false;
  const auto dir = out_dir(cfg);
  std::vector<h::SeedRun> runs;
  std::vector<nlohmann::json> reports;
  for (std::uint64_t seed : cfg.seeds) {
    std::cerr << "seed " << seed << "...\n";
    runs.push_back(h::run_seed(cfg, seed));
    const auto& run = runs.back();
    const std::string k = std::to_string(seed);
    h::write_json(run.report, (dir / ("report_seed" + k + ".json")).string());
    h::write_json(run.timing, (dir / ("timing_seed" + k + ".json")).string());
    for (const auto& w : run.report["warnings"]) std::cerr << "  warning: " << w.get<std::string>() << '\n';
    reports.push_back(run.report);
  }
  for (h::Figure f : {h::Figure::fig4, h::Figure::fig6, h::Figure::fig7}) {
    if (f == h::Figure::fig7 && !runs.front().energy) continue;
    if (f == h::Figure::fig6 && reports.front()["ablations"]["non_cause"].is_null()) continue;
    for (const auto& p : h::emit_analysis(runs, f, dir.string())) say(p);
  }
  write_summary(reports, dir);
  return 0;
}

int cmd_report(const std::vector<std::string>& files, const std::string& out) {
  std::vector<nlohmann::json> reports;
  for (const auto& f : files) {
    try {
      reports.push_back(h::read_json(f));
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
  }
  const fs::path dir = out.empty() ? fs::path(files.front()).parent_path() : fs::path(out);
  if (!dir.empty()) fs::create_directories(dir);
  try {
    write_summary(reports, dir);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant causal representation learning: simulate, train and evaluate"};
  app.require_subcommand(1);

  Common c;
  std::string data, test, latents, parents;
  bool phase2_off = false;

  auto* simulate = app.add_subcommand("simulate", "draw training and test data");
  add_common(simulate, c);

  auto* train_ivae = app.add_subcommand("train-ivae", "phase 1: fit the iVAE and write posterior means");
  add_common(train_ivae, c);
  train_ivae->add_option("--data", data, "training CSV")->required()->check(CLI::ExistingFile);

  auto* discover = app.add_subcommand("discover", "phase 2: find the latent parents of Y");
  add_common(discover, c);
  discover->add_option("--data", data, "training CSV")->required()->check(CLI::ExistingFile);
  discover->add_option("--latents", latents, "latents CSV from train-ivae")->required()->check(CLI::ExistingFile);
  discover->add_flag("--phase2-off", phase2_off, "treat every latent as a parent");

  auto* train_pred = app.add_subcommand("train-predictor", "phase 3: fit Phi and w");
  add_common(train_pred, c);
  train_pred->add_option("--data", data, "training CSV")->required()->check(CLI::ExistingFile);
  train_pred->add_option("--test", test, "test CSV")->required()->check(CLI::ExistingFile);
  train_pred->add_option("--latents", latents, "latents CSV")->required()->check(CLI::ExistingFile);
  train_pred->add_option("--parents", parents, "parents.json from discover")->required()->check(CLI::ExistingFile);

  auto* pipeline = app.add_subcommand("run-pipeline", "every phase, baselines and analysis for each seed");
  add_common(pipeline, c);
  pipeline->add_flag("--phase2-off", phase2_off, "treat every latent as a parent");

  std::vector<std::string> report_files;
  std::string report_out;
  auto* report = app.add_subcommand("report", "aggregate per-seed reports into a summary and table");
  report->add_option("reports", report_files, "report_seed<k>.json files")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "output directory (default: next to the first report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(c);
    if (*train_ivae) return cmd_train_ivae(c, data);
    if (*discover) return cmd_discover(c, data, latents, phase2_off);
    if (*train_pred) return cmd_train_predictor(c, data, test, latents, parents);
    if (*pipeline) return cmd_run_pipeline(c, phase2_off);
    if (*report) return cmd_report(report_files, report_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const h::PhaseError& e) {
    std::cerr << "phase " << e.phase() << " failed: " << e.what() << '\n';
    return kPhase;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return kPhase;
  }
  return kUsage;
}
