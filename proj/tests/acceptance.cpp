// Copyright 2026 The eyepad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when all pass).

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eyepad/cli/experiment.hpp"
#include "eyepad/eval/report.hpp"
#include "eyepad/io.hpp"
#include "eyepad/models/snapshot.hpp"
#include "support/testkit.hpp"

namespace fs = std::filesystem;
using namespace eyepad;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  int id;
  bool pass;
  std::string detail;
};

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

// Pearson correlation of average ranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) mx += rx[i] / n, my += ry[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  const auto results = testkit::loss_gradient_suite(100, 2026);
  const double secs = seconds_since(t0);
  double worst = 0;
  int failures = 0;
  std::string worst_name;
  for (const auto& r : results) {
    failures += r.failures;
    if (r.worst >= worst) worst = r.worst, worst_name = r.name;
  }
  const bool pass = failures == 0 && worst < 1e-4 && secs < 60;
  return {1, pass,
          std::to_string(results.size()) + " losses x 100 instances, worst " + fmt("%.2e", worst) + " (" +
              worst_name + "), " + std::to_string(failures) + " over 1e-4, " + fmt("%.1f", secs) + " s"};
}

Outcome mining_oracle() {
  const int mismatches = testkit::mining_oracle_mismatches(1000, 2026);
  return {2, mismatches == 0, "1000 batches, " + std::to_string(mismatches) + " mismatches"};
}

Outcome metric_oracles() {
  const auto r = testkit::metric_oracle_suite(200, 2026);
  std::ostringstream d;
  d << r.sets << " score sets, mismatches tar " << r.tar_mismatch << " tdr " << r.tdr_mismatch << " eer "
    << r.eer_mismatch << " t_auth " << r.t_auth_mismatch << " t_pad " << r.t_pad_mismatch << ", worst value gap "
    << fmt("%.1e", r.worst_value_gap);
  return {3, r.total_mismatch() == 0 && r.worst_value_gap <= 1e-12, d.str()};
}

Outcome protocol_fixture() {
  const auto failures = testkit::protocol_fixture_failures();
  std::string d = failures.empty() ? "S, t_auth, X_spoof, X_auth and OFRR match the hand values"
                                   : std::to_string(failures.size()) + " mismatches, first: " + failures.front();
  return {4, failures.empty(), d};
}

Outcome reductions() {
  const auto bundle = data::build_bundle(testkit::tiny_data_config());
  const auto r = testkit::reduction_identities(bundle, testkit::tiny_train_config());
  const bool pass = r.eyepad_iters > 0 && r.mtmt_iters > 0 && r.eyepad_gap <= 1e-12 && r.mtmt_gap <= 1e-12 &&
                    r.eyepad_params_equal && r.mtmt_params_equal;
  std::ostringstream d;
  d << "eyepad vs naive " << r.eyepad_iters << " iters gap " << fmt("%.1e", r.eyepad_gap)
    << (r.eyepad_params_equal ? " params equal" : " params differ") << "; mtmt vs mtl " << r.mtmt_iters
    << " iters gap " << fmt("%.1e", r.mtmt_gap) << (r.mtmt_params_equal ? " params equal" : " params differ");
  return {5, pass, d.str()};
}

Outcome freezes() {
  const auto bundle = data::build_bundle(testkit::tiny_data_config());
  const auto r = testkit::freeze_invariants(bundle, testkit::tiny_train_config());
  std::ostringstream d;
  d << "teacher blobs unchanged: eyepad " << r.eyepad << " eyepadpp " << r.eyepadpp << " mtmt " << r.mtmt;
  return {6, r.eyepad && r.eyepadpp && r.mtmt, d.str()};
}

Outcome invariances() {
  const auto r = testkit::invariance_suite(100, 2026);
  std::ostringstream d;
  d << r.cases << " cases, failures: scale " << r.cosine_scale << " tar-monotone " << r.tar_monotone << " hter "
    << r.hter_identity << " ofrr-bounds " << r.ofrr_bounds << " ofrr-decomposition " << r.ofrr_decomposition;
  return {9, r.total_failures() == 0, d.str()};
}

struct Benchmark {
  cli::ExperimentConfig cfg;
  std::ofstream log;
  std::vector<cli::AblationRow> grid;  // lambda1 = 0 followed by the configured grid, master seed

  const std::vector<cli::AblationRow>& ablation() {
    if (grid.empty()) {
      auto single = cfg;
      single.seeds = {cfg.master_seed()};
      std::vector<double> values{0.0};
      for (double l : cfg.lambda1_grid)
        if (l != 0.0) values.push_back(l);
      grid = cli::cmd_ablate_lambda1(single, values, log);
    }
    return grid;
  }
};

eval::MetricsReport evaluate_snapshot(const cli::ExperimentConfig& cfg, const data::DatasetBundle& bundle,
                                      const std::string& stem, bool pad) {
  const auto snap = models::load_snapshot(cfg.output_dir / stem);
  auto settings = cfg.eval;
  if (!pad) settings.pad = false;
  return eval::evaluate_model(snap.model, bundle, settings, cfg.resolved_eval_seed(), snap.metadata.strategy);
}

Outcome end_to_end(Benchmark& b) {
  const auto& cfg = b.cfg;
  const auto t0 = Clock::now();
  const auto rows = cli::cmd_compare(cfg, b.log);
  const double secs = seconds_since(t0);
  const auto seeds = cfg.resolved_seeds();
  const auto bundle = data::load_bundle(cfg.resolved_bundle_dir());
  const std::string master = std::to_string(cfg.master_seed());
  const int K = 5;
  const auto k_at = std::find(cfg.eval.ks.begin(), cfg.eval.ks.end(), K) - cfg.eval.ks.begin();

  // Single-run criteria use the master seed; the 5-seed means are printed alongside.
  const auto ea = evaluate_snapshot(cfg, bundle, "ea_only_" + master, false);
  const double ea_tar = ea.for_k(K)->runs.mean.at("tar_1e-2");
  const auto pad = evaluate_snapshot(cfg, bundle, "pad_only_" + master, true);
  const double pad_tdr = pad.pad->tdr_at_fdr;

  // Naive sequential student: lambda1 = 0 from the same teacher.
  b.ablation();
  auto tar_1e2 = [&](double l1) {
    char name[64];
    std::snprintf(name, sizeof name, "ablation_lambda1_%g_%s.json", l1, master.c_str());
    const auto j = nlohmann::json::parse(io::read_text(cfg.output_dir / name));
    return j.at("verification").at(0).at("tar_at_far").at("1e-2").get<double>();
  };
  const double naive_tar = tar_1e2(0.0), eyepad_tar = tar_1e2(cfg.train.weights.lambda1);

  std::map<train::Strategy, const cli::CompareRow*> by;
  for (const auto& r : rows) by[r.strategy] = &r;
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x / static_cast<double>(v.size());
    return s;
  };
  const double ofrr_pp = mean(by.at(train::Strategy::eyepadpp)->ofrr_by_seed);
  const double ofrr_mtl = mean(by.at(train::Strategy::mtl)->ofrr_by_seed);
  const double ea_mean = by.at(train::Strategy::ea_only)->per_k->at(static_cast<std::size_t>(k_at)).at("tar_1e-2");
  const double pad_mean = by.at(train::Strategy::pad_only)->pad->at("tdr");
  const double per_strategy = secs / static_cast<double>(seeds.size() * std::size(train::kAllStrategies));

  const bool ok_ea = ea_tar >= 0.90, ok_pad = pad_tdr >= 0.90, ok_gap = eyepad_tar - naive_tar >= 0.03,
             ok_ofrr = ofrr_pp <= ofrr_mtl, ok_time = per_strategy <= 600;
  std::ostringstream d;
  d << "ea_only tar@1e-2(K=5) " << fmt("%.3f", ea_tar) << (ok_ea ? "" : " [low]") << " (5-seed mean "
    << fmt("%.3f", ea_mean) << "); pad_only tdr " << fmt("%.3f", pad_tdr) << (ok_pad ? "" : " [low]")
    << " (5-seed mean " << fmt("%.3f", pad_mean) << "); eyepad - naive tar@1e-2 " << fmt("%.3f", eyepad_tar)
    << " - " << fmt("%.3f", naive_tar) << " = " << fmt("%+.3f", eyepad_tar - naive_tar) << (ok_gap ? "" : " [low]")
    << "; mean ofrr(K=5) eyepadpp " << fmt("%.3f", ofrr_pp) << " vs mtl " << fmt("%.3f", ofrr_mtl)
    << (ok_ofrr ? "" : " [order]") << "; " << fmt("%.0f", per_strategy) << " s per strategy run";
  return {7, ok_ea && ok_pad && ok_gap && ok_ofrr && ok_time, d.str()};
}

Outcome ablation(Benchmark& b) {
  std::vector<cli::AblationRow> rows;
  for (const auto& r : b.ablation())
    if (r.lambda1 > 0) rows.push_back(r);
  std::vector<double> l1, tar, tdr;
  for (const auto& r : rows) {
    l1.push_back(r.lambda1);
    tar.push_back(r.tar_1e3);
    tdr.push_back(r.tdr);
  }
  const double rho_tar = spearman(l1, tar), rho_tdr = spearman(l1, tdr);
  std::ostringstream d;
  d << "spearman(lambda1, tar@1e-3) " << fmt("%+.3f", rho_tar) << ", spearman(lambda1, tdr) "
    << fmt("%+.3f", rho_tdr) << " over " << rows.size() << " grid points";
  return {8, rho_tar > 0 && rho_tdr < 0, d.str()};
}

Outcome reproducibility(Benchmark& b) {
  auto cfg = b.cfg;
  const auto stem = cfg.output_dir / ("eyepadpp_" + std::to_string(cfg.master_seed()));
  cfg.bundle_dir = b.cfg.resolved_bundle_dir();
  cfg.output_dir = b.cfg.output_dir / "repro_a";
  fs::create_directories(cfg.output_dir);
  cli::cmd_evaluate(cfg, stem, b.log);
  const auto first = io::read_text(cfg.output_dir / "report.json");
  cfg.output_dir = b.cfg.output_dir / "repro_b";
  fs::create_directories(cfg.output_dir);
  cli::cmd_evaluate(cfg, stem, b.log);
  const auto second = io::read_text(cfg.output_dir / "report.json");
  return {10, first == second && !first.empty(),
          "report.json " + std::to_string(first.size()) + " bytes, " + (first == second ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eyepad acceptance run"};
  std::string config = EYEPAD_BENCHMARK_CONFIG;
  std::string out = "acceptance_out";
  std::vector<int> only;
  app.add_option("-c,--config", config, "benchmark config");
  app.add_option("-o,--out", out, "output directory for benchmark artifacts");
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int id) { return selected.empty() || selected.count(id) > 0; };

  fs::create_directories(out);
  std::ofstream lines(fs::path(out) / "acceptance.txt");
  std::vector<Outcome> outcomes;
  auto report = [&](Outcome o) {
    std::ostringstream line;
    line << "criterion " << o.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail;
    std::cout << line.str() << std::endl;
    lines << line.str() << std::endl;
    outcomes.push_back(std::move(o));
  };
  auto guarded = [&](int id, auto&& fn) {
    if (!wanted(id)) return;
    try {
      report(fn());
    } catch (const std::exception& e) {
      report({id, false, std::string("threw: ") + e.what()});
    }
  };

  guarded(1, gradient_suite);
  guarded(2, mining_oracle);
  guarded(3, metric_oracles);
  guarded(4, protocol_fixture);
  guarded(5, reductions);
  guarded(6, freezes);
  guarded(9, invariances);

  if (wanted(7) || wanted(8) || wanted(10)) {
    Benchmark b;
    try {
      b.cfg = cli::load_config(config);
      b.cfg.output_dir = fs::absolute(out);
      b.cfg.bundle_dir.clear();
      fs::create_directories(b.cfg.output_dir);
      b.log.open(b.cfg.output_dir / "benchmark.log");
      cli::cmd_generate(b.cfg, b.log);
    } catch (const std::exception& e) {
      for (int id : {7, 8, 10})
        if (wanted(id)) report({id, false, std::string("benchmark setup threw: ") + e.what()});
      b.log.close();
      return static_cast<int>(std::count_if(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return !o.pass; }));
    }
    guarded(7, [&] { return end_to_end(b); });
    guarded(8, [&] { return ablation(b); });
    guarded(10, [&] { return reproducibility(b); });
  }

  std::sort(outcomes.begin(), outcomes.end(), [](const Outcome& a, const Outcome& b) { return a.id < b.id; });
  const auto failed = std::count_if(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return !o.pass; });
  std::ostringstream summary;
  summary << "summary: " << outcomes.size() - static_cast<std::size_t>(failed) << "/" << outcomes.size()
          << " criteria pass";
  std::cout << summary.str() << std::endl;
  lines << summary.str() << std::endl;
  for (const auto& o : outcomes) std::cout << "  " << o.id << " " << (o.pass ? "PASS" : "FAIL") << "\n";
  return static_cast<int>(failed);
}
