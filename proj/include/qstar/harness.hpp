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

#ifndef QSTAR_HARNESS_HPP_
#define QSTAR_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "qstar/config.hpp"
#include "qstar/hard_family.hpp"
#include "qstar/jl_vectors.hpp"
#include "qstar/lsvi.hpp"
#include "qstar/simulator.hpp"

namespace qstar {

struct InstanceBundle {
  HardParams params;
  VectorFamily family;
  std::optional<Action> a_star;

  HardInstance model(std::optional<Action> star, SigmaMode sigma = SigmaMode::kExact) const {
    return HardInstance(params, family, star, sigma);
  }
  HardInstance model() const { return model(a_star); }
};

// Resolves parameters and the vector family. Gaussian families are drawn
// from a stream derived from the master seed.
InstanceBundle build_instance(const InstanceConfig& config, std::uint64_t seed);

// Simulator wrapper enforcing an optional query budget and recording the set
// of actions queried. A batch that would cross the budget consumes what is
// left and then raises BudgetExhausted.
class BudgetedQueries : public QueryInterface {
 public:
  BudgetedQueries(Simulator& inner, std::optional<std::uint64_t> budget)
      : inner_(inner), budget_(budget) {}
  int num_actions() const override { return inner_.num_actions(); }
  QuerySample query(const StateId& s, Action a) override;
  QueryBatch query_many(const StateId& s, Action a, std::uint64_t count) override;
  std::uint64_t used() const { return inner_.meter().count(); }
  const std::set<Action>& actions() const { return actions_; }

 private:
  Simulator& inner_;
  std::optional<std::uint64_t> budget_;
  std::set<Action> actions_;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool ok() const;
};

VerifyReport cmd_verify(const ExperimentConfig& config, bool mutate = false);

struct RunRecord {
  std::uint64_t seed = 0;
  std::string planner;
  int k = 0;
  int H = 0;
  int d = 0;
  double gamma = 0.0;
  double epsilon = 0.0;
  std::uint64_t N = 0;
  double delta_pi = 0.0;       // NaN for truncated runs
  double max_stage_err = 0.0;  // NaN when the planner has no value estimate
  double wall_ms = 0.0;
  bool pass = false;
  bool truncated = false;
  Action root_action = 0;      // most likely action at the initial state
  std::vector<StageDiagnostic> stages;
};

struct BenchOptions {
  bool timing = false;  // record wall time; off keeps CSVs byte-identical
};

std::vector<RunRecord> cmd_bench(const ExperimentConfig& config, const BenchOptions& options = {});

void write_bench_csv(std::ostream& out, const std::vector<RunRecord>& records);
void write_bench_stage_csv(std::ostream& out, const std::vector<RunRecord>& records);
// Means are taken over finite entries; null when a column has none.
nlohmann::json bench_summary(const ExperimentConfig& config, const std::vector<RunRecord>& records);

struct AdversaryModelRow {
  Action a_star = 0;               // 0 for M_0
  std::vector<double> not_queried;  // index a-1: P(a not in A_{1:n})
  double mean_queries = 0.0;
};

struct AdversaryReport {
  std::uint64_t budget = 0;
  int trials = 0;
  std::int64_t n_choice = 0;
  double epsilon = 0.0;       // leaf-mean bound used in the floor
  double floor = 0.0;         // (1 - epsilon)^budget
  std::vector<AdversaryModelRow> rows;  // rows[0] is M_0
  std::vector<double> ratios;           // P_a(a not in A) / P_0(a not in A)
  double min_ratio = 0.0;
  double min_null_play = 0.0;           // min_a P_0(a in A_{1:n})
  bool floor_holds = true;              // within 3 standard errors
  bool ok() const { return floor_holds; }
};

AdversaryReport cmd_adversary(const ExperimentConfig& config, std::uint64_t budget);
nlohmann::json adversary_json(const AdversaryReport& report);

void cmd_solve(const ExperimentConfig& config, std::ostream& out);

// Runs fn(0..count-1) on a pool of workers; exceptions are rethrown.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace qstar

#endif  // QSTAR_HARNESS_HPP_
