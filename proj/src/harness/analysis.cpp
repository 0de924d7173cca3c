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

#include "icrl/harness/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "icrl/numkit/stats.hpp"

namespace icrl::harness {

std::string to_string(Figure f) {
  switch (f) {
    case Figure::fig4:
      return "fig4";
    case Figure::fig6:
      return "fig6";
    case Figure::fig7:
      return "fig7";
  }
  return "?";
}

Figure figure_from_string(const std::string& s) {
  for (Figure f : {Figure::fig4, Figure::fig6, Figure::fig7})
    if (to_string(f) == s) return f;
  throw std::invalid_argument("unknown analysis '" + s + "' (expected fig4, fig6 or fig7)");
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dims(const nlohmann::json& a) {
  std::string s;
  for (const auto& d : a) s += (s.empty() ? "" : ";") + std::to_string(d.get<std::size_t>());
  return s;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

}  // namespace

void write_fig4_csv(const SeedRun& run, std::ostream& out) {
  if (!run.data.train.X_true) throw std::invalid_argument("fig4 needs the true latents, which this dataset lacks");
  const auto& xt = *run.data.train.X_true;
  const auto& xh = run.phase1.posterior.mean;
  if (xh.rows() != xt.rows()) throw std::invalid_argument("fig4 needs the Phase-1 posterior means for every row");
  out << "x_true_0,x_true_1";
  for (std::size_t j = 0; j < xh.cols(); ++j) out << ",x_hat_" << j;
  out << ",e\n";
  for (std::size_t i = 0; i < xt.rows(); ++i) {
    out << num(xt(i, 0)) << ',' << num(xt(i, 1));
    for (std::size_t j = 0; j < xh.cols(); ++j) out << ',' << num(xh(i, j));
    out << ',' << run.data.train.E[i] << '\n';
  }
}

void write_fig6_csv(const std::vector<nlohmann::json>& reports, std::ostream& out) {
  out << "seed,cause_dims,cause_test,non_cause_dims,non_cause_test\n";
  for (const auto& r : reports) {
    const auto& nc = r.at("ablations").at("non_cause");
    if (nc.is_null())
      throw std::invalid_argument("fig6 needs ablations.non_cause, missing for seed " + r.at("seed").dump() +
                                  " (every latent was a parent)");
    out << r.at("seed").get<std::uint64_t>() << ',' << dims(r.at("phase3").at("inputs")) << ','
        << num(r.at("phase3").at("test").at("pooled").get<double>()) << ',' << dims(nc.at("inputs")) << ','
        << num(nc.at("test").at("pooled").get<double>()) << '\n';
  }
}

void write_fig7_csv(const EnergyGrid& grid, std::ostream& out) {
  out << "x1,x2";
  for (std::size_t c = 0; c < grid.phi.cols(); ++c) out << ",phi_" << c;
  out << '\n';
  for (std::size_t i = 0; i < grid.x1.size(); ++i)
    for (std::size_t j = 0; j < grid.x2.size(); ++j) {
      out << num(grid.x1[i]) << ',' << num(grid.x2[j]);
      for (std::size_t c = 0; c < grid.phi.cols(); ++c) out << ',' << num(grid.phi(i * grid.x2.size() + j, c));
      out << '\n';
    }
}

std::vector<std::string> emit_analysis(const std::vector<SeedRun>& runs, Figure which, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> paths;
  if (which == Figure::fig6) {
    std::vector<nlohmann::json> reports;
    for (const auto& r : runs) reports.push_back(r.report);
    const auto p = std::filesystem::path(out_dir) / "fig6.csv";
    std::ostringstream buf;
    write_fig6_csv(reports, buf);
    open_out(p) << buf.str();
    paths.push_back(p.string());
    return paths;
  }
  for (const auto& run : runs) {
    const auto p = std::filesystem::path(out_dir) / (to_string(which) + "_seed" + std::to_string(run.seed) + ".csv");
    std::ostringstream buf;
    if (which == Figure::fig4) {
      write_fig4_csv(run, buf);
    } else {
      if (!run.energy) throw std::invalid_argument("fig7 needs the energy grid, missing for seed " + std::to_string(run.seed));
      write_fig7_csv(*run.energy, buf);
    }
    open_out(p) << buf.str();
    paths.push_back(p.string());
  }
  return paths;
}

nlohmann::json summarize(const std::vector<nlohmann::json>& reports) {
  if (reports.empty()) throw std::invalid_argument("no reports to summarize");
  const std::string hash = reports.front().at("config_hash");
  nlohmann::json s = {{"format", "icrl-summary/1"}, {"config_hash", hash}, {"seeds", nlohmann::json::array()}};
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> methods;
  std::vector<double> mcc;
  nlohmann::json parents = nlohmann::json::array(), fallback = nlohmann::json::array();
  std::string metric;
  auto add = [&](const std::string& name, const nlohmann::json& block) {
    if (block.is_null()) return;
    methods[name].first.push_back(block.at("train").at("pooled").get<double>());
    methods[name].second.push_back(block.at("test").at("pooled").get<double>());
    metric = block.at("test").at("metric");
  };
  for (const auto& r : reports) {
    if (r.at("config_hash") != hash)
      throw std::invalid_argument("reports come from different configurations (" + hash + " vs " +
                                  r.at("config_hash").get<std::string>() + ")");
    s["seeds"].push_back(r.at("seed"));
    add("ICRL", r.at("phase3"));
    add("ICRL (non-cause)", r.at("ablations").at("non_cause"));
    add("ERM", r.at("baselines").at("erm"));
    add("IRMv1", r.at("baselines").at("irm"));
    if (!r.at("phase1").at("mcc").is_null()) mcc.push_back(r.at("phase1").at("mcc").at("score").get<double>());
    parents.push_back(r.at("phase2").at("parents"));
    if (r.at("phase2").at("fallback_used").get<bool>()) fallback.push_back(r.at("seed"));
  }
  auto stats = [](const std::vector<double>& v) {
    return nlohmann::json{{"mean", numkit::mean_of(v)}, {"std", std::sqrt(numkit::variance_of(v))}, {"values", v}};
  };
  s["metric"] = metric;
  for (const auto& [name, tt] : methods) s["methods"][name] = {{"train", stats(tt.first)}, {"test", stats(tt.second)}};
  s["mcc"] = mcc.empty() ? nlohmann::json(nullptr) : stats(mcc);
  s["parents"] = parents;
  s["fallback_seeds"] = fallback;
  return s;
}

std::string render_table(const nlohmann::json& summary) {
  std::ostringstream out;
  char line[160];
  const std::string metric = summary.value("metric", std::string("mse"));
  std::snprintf(line, sizeof line, "%-18s %-22s %-22s\n", "method", ("train " + metric).c_str(), ("test " + metric).c_str());
  out << line;
  auto cell = [](const nlohmann::json& st) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f +/- %.2f", st.at("mean").get<double>(), st.at("std").get<double>());
    return std::string(buf);
  };
  for (const char* name : {"ERM", "IRMv1", "ICRL", "ICRL (non-cause)"}) {
    if (!summary.contains("methods") || !summary["methods"].contains(name)) continue;
    const auto& m = summary["methods"][name];
    std::snprintf(line, sizeof line, "%-18s %-22s %-22s\n", name, cell(m["train"]).c_str(), cell(m["test"]).c_str());
    out << line;
  }
  if (!summary.at("mcc").is_null()) out << "MCC " << cell(summary["mcc"]) << '\n';
  out << "seeds " << summary.at("seeds").size();
  if (!summary.at("fallback_seeds").empty()) out << ", parent fallback on seeds " << summary["fallback_seeds"].dump();
  out << '\n';
  return out.str();
}

}  // namespace icrl::harness
