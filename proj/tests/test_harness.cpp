// Copyright 2026 The qstar Authors.
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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "qstar/config.hpp"
#include "qstar/errors.hpp"
#include "qstar/harness.hpp"

using namespace qstar;

namespace {

ExperimentConfig config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

const char* kSmall = "d = 4\nH = 2\ngamma = 0.25\nk = 3\n";

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("verify passes on a valid instance and fails when mutated") {
  ExperimentConfig cfg = config(kSmall);
  const VerifyReport ok = cmd_verify(cfg);
  CHECK(ok.ok());
  for (const auto& c : ok.checks) CHECK_MESSAGE(c.pass, c.name << ": " << c.detail);
  const VerifyReport bad = cmd_verify(cfg, true);
  CHECK_FALSE(bad.ok());
  bool realizability_failed = false;
  for (const auto& c : bad.checks) {
    if (c.name == "realizability") realizability_failed = !c.pass;
  }
  CHECK(realizability_failed);

  cfg.instance.a_star = 0;
  const VerifyReport null = cmd_verify(cfg);
  CHECK(null.ok());
  for (const auto& c : null.checks) {
    if (c.name == "m0-symmetry") CHECK(c.detail.find("6 permutations") == 0);
  }
}

TEST_CASE("gaussian instances are reproducible from the seed") {
  ExperimentConfig cfg = config("d = 232\nH = 2\ngamma = 0.25\nk = 6\nvectors = gaussian\nseed = 5\n");
  const InstanceBundle a = build_instance(cfg.instance, cfg.seed);
  const InstanceBundle b = build_instance(cfg.instance, cfg.seed);
  const InstanceBundle c = build_instance(cfg.instance, cfg.seed + 1);
  CHECK((a.family[3] - b.family[3]).norm() == 0.0);
  CHECK((a.family[3] - c.family[3]).norm() > 0.0);
  CHECK(verify_family(a.family).passes(0.25));
}

TEST_CASE("paper-mode instance with a vector file") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "qstar_harness_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "family.txt").string();
  save_family(path, orthonormal_family(64, 4, 0.25));
  ExperimentConfig cfg = config("d = 65\nH = 2\neta = 0.16666666666666666\nk = 4\nvector_file = " + path + "\n");
  const InstanceBundle bundle = build_instance(cfg.instance, 0);
  CHECK(bundle.params.k == 4);
  CHECK(bundle.params.gamma == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(cmd_verify(cfg).ok());
}

TEST_CASE("greedy-oracle baseline uses no queries and is optimal") {
  ExperimentConfig cfg = config(std::string(kSmall) + "planner = greedy-oracle\nreplication = 4\n");
  for (const RunRecord& r : cmd_bench(cfg)) {
    CHECK(r.N == 0);
    CHECK(r.delta_pi == 0.0);
    CHECK(r.max_stage_err == 0.0);
    CHECK(r.pass);
  }
}

TEST_CASE("random planner loses at least the root gap when it misses a*") {
  ExperimentConfig cfg = config(std::string(kSmall) + "planner = random\nrollouts = 2\nreplication = 40\nseed = 9\n");
  int missed = 0;
  for (const RunRecord& r : cmd_bench(cfg)) {
    CHECK(r.N == 4);
    if (r.root_action != 1) {
      ++missed;
      CHECK(r.delta_pi >= 0.25);
    }
  }
  CHECK(missed > 0);
}

TEST_CASE("budget overruns are recorded as truncated runs") {
  ExperimentConfig cfg = config(std::string(kSmall) + "planner = lsvi\nn = 100\nbudget = 150\nreplication = 2\n");
  for (const RunRecord& r : cmd_bench(cfg)) {
    CHECK(r.truncated);
    CHECK(std::isnan(r.delta_pi));
    CHECK_FALSE(r.pass);
    CHECK(r.N == 150);
  }
}

TEST_CASE("bench output is deterministic and the summary matches the CSV") {
  ExperimentConfig cfg = config(std::string(kSmall) + "planner = lsvi\nn = 300\nreplication = 12\nseed = 4\n");
  cfg.threads = 1;
  std::ostringstream serial;
  write_bench_csv(serial, cmd_bench(cfg));
  cfg.threads = 4;
  const auto records = cmd_bench(cfg);
  std::ostringstream parallel;
  write_bench_csv(parallel, records);
  CHECK(serial.str() == parallel.str());

  const nlohmann::json summary = bench_summary(cfg, records);
  const auto rows = parse_csv(parallel.str());
  REQUIRE(rows.size() == 13);
  const std::vector<std::string>& header = rows.front();
  for (const std::string column : {"N", "delta_pi", "max_stage_err", "wall_ms", "pass"}) {
    const auto idx = static_cast<std::size_t>(std::find(header.begin(), header.end(), column) - header.begin());
    REQUIRE(idx < header.size());
    double sum = 0.0;
    int count = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const double v = std::stod(rows[r][idx]);
      if (std::isfinite(v)) {
        sum += v;
        ++count;
      }
    }
    const double mean = sum / count;
    CHECK(std::abs(summary["mean_" + column].get<double>() - mean) <= 1e-12);
  }
}

TEST_CASE("crash-free sweep over small instances and all planners") {
  for (int k = 2; k <= 4; ++k) {
    for (int H = 1; H <= 3; ++H) {
      for (const char* planner : {"lsvi", "random", "greedy-oracle", "first-action"}) {
        std::ostringstream text;
        text << "d = " << k + 1 << "\nH = " << H << "\ngamma = 0.25\nk = " << k
             << "\nplanner = " << planner << "\nn = 50\nreplication = 2\n";
        ExperimentConfig cfg = config(text.str());
        CHECK_NOTHROW(cmd_bench(cfg));
      }
    }
  }
}

TEST_CASE("adversary: constant planner never touches other actions") {
  ExperimentConfig cfg = config("d = 9\nH = 2\ngamma = 0.25\nk = 8\nplanner = first-action\ntrials = 20\n");
  const AdversaryReport report = cmd_adversary(cfg, 3);
  for (const auto& row : report.rows) {
    CHECK(row.not_queried[0] == 0.0);
    for (std::size_t a = 1; a < row.not_queried.size(); ++a) CHECK(row.not_queried[a] == 1.0);
  }
}

TEST_CASE("adversary: pigeonhole under a two-query budget") {
  ExperimentConfig cfg = config("d = 9\nH = 2\ngamma = 0.25\nk = 8\nplanner = random\nrollouts = 4\ntrials = 500\n");
  const AdversaryReport report = cmd_adversary(cfg, 2);
  CHECK(report.min_null_play <= 2.0 / 8.0);
  CHECK(report.rows.front().mean_queries == 2.0);
}

TEST_CASE("adversary: likelihood floor at the choice of n") {
  ExperimentConfig cfg = config("d = 9\nH = 2\ngamma = 0.25\nk = 8\nplanner = random\nrollouts = 4\ntrials = 4000\nseed = 17\n");
  const auto bundle = build_instance(cfg.instance, cfg.seed);
  const auto n = n_choice(bundle.params);
  REQUIRE(n >= 1);
  const AdversaryReport report = cmd_adversary(cfg, static_cast<std::uint64_t>(n));
  CHECK(report.floor > 0.75);
  CHECK(report.floor_holds);
  const double slack = 3.0 * std::sqrt(0.25 / 4000.0) / 0.75;
  CHECK(report.min_ratio >= 0.75 - slack);
}

TEST_CASE("solve writes the tables") {
  ExperimentConfig cfg = config(kSmall);
  std::ostringstream out;
  cmd_solve(cfg, out);
  const auto rows = parse_csv(out.str());
  CHECK(rows.front() == std::vector<std::string>{"h", "state", "action", "q", "v", "gap"});
  CHECK(rows.size() > 10);
}

TEST_CASE("parallel_for propagates worker exceptions") {
  CHECK_THROWS_AS(parallel_for(16, 4, [](int i) {
                    if (i == 7) throw EvaluationError("boom");
                  }),
                  EvaluationError);
}
