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

#include "qstar/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "qstar/errors.hpp"
#include "qstar/exact_oracle.hpp"
#include "qstar/rng.hpp"

namespace qstar {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct PlannerRun {
  std::optional<StagePolicy> policy;
  std::optional<LsviResult> lsvi;
};

StagePolicy random_planner(const MdpModel& model, QueryInterface& queries, int rollouts,
                           RngStream& rng) {
  const int k = model.num_actions();
  const int H = model.horizon();
  using Key = std::pair<int, StateId>;
  auto stats = std::make_shared<std::map<Key, std::vector<std::pair<double, int>>>>();
  const std::uint64_t salt = rng();
  for (int r = 0; r < rollouts; ++r) {
    StateId s = model.initial_state();
    for (int h = 1; h <= H; ++h) {
      const Action a = rng.uniform_int(1, k);
      const QuerySample sample = queries.query(s, a);
      auto& slot = (*stats)[{h, s}];
      if (slot.empty()) slot.assign(static_cast<std::size_t>(k), {0.0, 0});
      slot[static_cast<std::size_t>(a - 1)].first += sample.reward;
      slot[static_cast<std::size_t>(a - 1)].second += 1;
      s = sample.next;
    }
  }
  return StagePolicy::deterministic(k, [stats, salt, k](int h, const StateId& s) {
    const auto it = stats->find({h, s});
    if (it != stats->end()) {
      Action best = 0;
      double best_mean = -std::numeric_limits<double>::infinity();
      for (Action a = 1; a <= k; ++a) {
        const auto& [sum, count] = it->second[static_cast<std::size_t>(a - 1)];
        if (count > 0 && sum / count > best_mean) {
          best_mean = sum / count;
          best = a;
        }
      }
      if (best != 0) return best;
    }
    const std::uint64_t mix =
        splitmix64(salt ^ (StateIdHash{}(s) + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(h)));
    return static_cast<Action>(mix % static_cast<std::uint64_t>(k)) + 1;
  });
}

PlannerRun run_planner(const ExperimentConfig& config, const MdpModel& model,
                       const FeatureMap& features, const ValueTables* tables,
                       QueryInterface& queries, RngStream& rng) {
  const int k = model.num_actions();
  const int H = model.horizon();
  PlannerRun run;
  switch (config.planner) {
    case PlannerKind::kGreedyOracle:
      if (tables == nullptr) throw ParameterError("greedy-oracle needs exact tables");
      run.policy = tables->greedy_policy();
      break;
    case PlannerKind::kFirstAction: {
      const std::uint64_t budget = config.budget.value_or(0);
      if (budget > 0) queries.query_many(model.initial_state(), 1, budget);
      run.policy = StagePolicy::deterministic(k, [](int, const StateId&) { return 1; });
      break;
    }
    case PlannerKind::kRandom:
      run.policy = random_planner(model, queries, config.rollouts, rng);
      break;
    case PlannerKind::kLsvi: {
      LsviConfig lc;
      lc.n = config.n.value_or(1);
      lc.auto_n = !config.n.has_value();
      lc.zeta = config.zeta;
      lc.delta_target = config.delta_target;
      lc.discount = model.discount();
      lc.design.tolerance = config.design_tolerance;
      lc.design.max_iters = config.design_max_iters;
      std::vector<std::vector<StateId>> stages(static_cast<std::size_t>(H) + 1);
      for (int h = 1; h <= H; ++h) {
        stages[static_cast<std::size_t>(h)] = model.stage_states(h, config.cap);
      }
      run.lsvi.emplace(lsvi_run(queries, features, stages, H, lc));
      run.policy = run.lsvi->greedy_policy();
      break;
    }
  }
  return run;
}

std::uint64_t replicate_seed(std::uint64_t master, int index) {
  return RngStream::derive(master, "replicate", static_cast<std::uint64_t>(index)).seed();
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

nlohmann::json finite_mean(const std::vector<double>& values) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++count;
    }
  }
  if (count == 0) return nullptr;
  return sum / static_cast<double>(count);
}

}  // namespace

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(worker_count(threads), count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

InstanceBundle build_instance(const InstanceConfig& config, std::uint64_t seed) {
  InstanceBundle bundle;
  HardParams params;
  int k = 0;
  if (config.eta) {
    params = derive_params(config.d, config.H, *config.eta, config.mode, config.alpha);
    k = config.k.value_or(params.k);
  } else {
    if (!config.gamma || !config.k) throw ParameterError("desk mode needs gamma and k");
    params = desk_params(config.d, config.H, *config.gamma, *config.k, config.mode, config.alpha);
    k = *config.k;
  }
  const int dim = config.d - 1;
  VectorMode mode = config.vectors;
  if (mode == VectorMode::kAuto) mode = k <= dim ? VectorMode::kOrthonormal : VectorMode::kGaussian;
  switch (mode) {
    case VectorMode::kOrthonormal:
      bundle.family = orthonormal_family(dim, k, params.gamma);
      break;
    case VectorMode::kGaussian: {
      RngStream rng = RngStream::derive(seed, "vectors");
      bundle.family = generate_family(dim, k, params.gamma, rng);
      break;
    }
    case VectorMode::kFile:
      bundle.family = load_family(config.vector_file);
      break;
    case VectorMode::kAuto:
      break;
  }
  if (params.paper_mode && (k != params.k || mode == VectorMode::kFile)) {
    params = override_k(params, k, bundle.family);
  }
  if (config.epsilon) params = override_epsilon(params, *config.epsilon);
  bundle.params = params;
  if (config.a_star > 0) {
    if (config.a_star > params.k) throw ParameterError("a_star must lie in 1..k");
    bundle.a_star = config.a_star;
  }
  return bundle;
}

QuerySample BudgetedQueries::query(const StateId& s, Action a) {
  if (budget_ && used() >= *budget_) throw BudgetExhausted("query budget exhausted");
  QuerySample sample = inner_.query(s, a);
  actions_.insert(a);
  return sample;
}

QueryBatch BudgetedQueries::query_many(const StateId& s, Action a, std::uint64_t count) {
  if (budget_) {
    const std::uint64_t left = *budget_ > used() ? *budget_ - used() : 0;
    if (count > left) {
      if (left > 0) {
        inner_.query_many(s, a, left);
        actions_.insert(a);
      }
      throw BudgetExhausted("query budget exhausted");
    }
  }
  QueryBatch batch = inner_.query_many(s, a, count);
  if (count > 0) actions_.insert(a);
  return batch;
}

bool VerifyReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

VerifyReport cmd_verify(const ExperimentConfig& config, bool mutate) {
  const InstanceBundle bundle = build_instance(config.instance, config.seed);
  const HardParams& p = bundle.params;
  const SigmaMode sigma = mutate ? SigmaMode::kCorrupted : SigmaMode::kExact;
  const HardInstance model = bundle.model(bundle.a_star, sigma);
  const HardInstance null_model = bundle.model(std::nullopt, sigma);
  VerifyReport report;
  auto add = [&](std::string name, bool pass, double value, std::string detail) {
    report.checks.push_back({std::move(name), pass, value, std::move(detail)});
  };

  const FamilyReport family = verify_family(bundle.family);
  add("family", family.passes(p.gamma), family.max_overlap,
      "max |<v_a, v_b>| against gamma " + std::to_string(p.gamma));

  const RangeReport ranges = check_ranges(model, config.cap);
  add("sigma-range", ranges.sigma_violations == 0, ranges.sigma_min,
      "sigma in [gamma, 1]; observed [" + std::to_string(ranges.sigma_min) + ", " +
          std::to_string(ranges.sigma_max) + "]");
  add("mu-range", ranges.leaf_mean_violations == 0, ranges.leaf_mean_max,
      "leaf means in [0, eps]");
  add("reward-range", ranges.reward_violations == 0, ranges.reward_max, "rewards in [0, 1]");
  add("value-range", ranges.value_bound_violations == 0 && ranges.optimal_reward_monotone,
      ranges.linear_value_max, "<phi, theta*> <= 1 and non-increasing along the optimal path");

  const ValueTables tables = solve_backward(model, config.cap);
  const RealizabilityReport real = check_realizability(model, tables);
  add("realizability", real.max_residual <= 1e-9, real.max_residual,
      "max |q* - <phi, theta*>| at h=" + std::to_string(real.h) + " s=" + real.s.to_string() +
          " a=" + std::to_string(real.a));
  const double residual = bellman_residual(model, tables);
  add("bellman-residual", residual <= 1e-9, residual, "exact solver self-consistency");

  if (bundle.a_star && p.k > 1) {
    const RootGapReport gaps = root_gaps(model, tables);
    const bool pass = gaps.min_gap >= 0.25 - 1e-12 &&
                      std::abs(gaps.min_gap - gaps.min_formula_gap) <= 1e-9;
    add("root-gap", pass, gaps.min_gap,
        "min gap at the root, formula value " + std::to_string(gaps.min_formula_gap));
  } else {
    add("root-gap", true, kNan, "not applicable (no suboptimal root action)");
  }

  if (p.k <= 6) {
    const SymmetryReport sym = check_symmetry(null_model, config.cap);
    add("m0-symmetry", sym.ok(), static_cast<double>(sym.violations),
        std::to_string(sym.permutations) + " permutations, " + std::to_string(sym.checks) +
            " checks" + (sym.ok() ? "" : "; first violation " + sym.first_violation));
  } else {
    add("m0-symmetry", true, kNan, "skipped: k! permutations too many for k > 6");
  }

  const std::int64_t nc = n_choice(p);
  if (bundle.a_star) {
    const LikelihoodFloor floor = likelihood_floor_check(model, std::max<std::int64_t>(nc, 1),
                                                         config.cap);
    const bool bound_ok = nc < 1 || std::pow(1.0 - p.leaf_mean_bound(), nc) > 0.75;
    add("likelihood-floor", floor.holds && bound_ok, floor.min_ratio,
        "min per-step ratio vs 1 - eps; n_choice = " + std::to_string(nc));
  } else {
    add("likelihood-floor", true, kNan, "not applicable for M_0");
  }
  return report;
}

std::vector<RunRecord> cmd_bench(const ExperimentConfig& config, const BenchOptions& options) {
  const InstanceBundle bundle = build_instance(config.instance, config.seed);
  const HardInstance model = bundle.model();
  const ValueTables tables = solve_backward(model, config.cap);
  std::vector<RunRecord> records(static_cast<std::size_t>(config.replication));

  parallel_for(config.replication, config.threads, [&](int i) {
    RunRecord rec;
    rec.seed = replicate_seed(config.seed, i);
    rec.planner = planner_name(config.planner);
    rec.k = bundle.params.k;
    rec.H = bundle.params.H;
    rec.d = bundle.params.d;
    rec.gamma = bundle.params.gamma;
    rec.epsilon = bundle.params.epsilon;
    rec.max_stage_err = kNan;

    QueryMeter meter;
    RngStream sim_rng = RngStream::derive(rec.seed, "simulator");
    RngStream plan_rng = RngStream::derive(rec.seed, "planner");
    Simulator sim(model, meter, sim_rng);
    BudgetedQueries queries(sim, config.budget);
    const auto start = std::chrono::steady_clock::now();
    std::optional<PlannerRun> run;
    try {
      run.emplace(run_planner(config, model, model, &tables, queries, plan_rng));
    } catch (const BudgetExhausted&) {
      rec.truncated = true;
    }
    rec.N = meter.count();
    if (rec.truncated) {
      rec.delta_pi = kNan;
    } else {
      rec.delta_pi = suboptimality(model, tables, *run->policy).delta_pi;
      const auto dist = run->policy->distribution(1, model.initial_state());
      rec.root_action =
          static_cast<Action>(std::max_element(dist.begin(), dist.end()) - dist.begin()) + 1;
      if (run->lsvi) {
        rec.stages = lsvi_diagnostics(model, tables, *run->lsvi);
        rec.max_stage_err = 0.0;
        for (const StageDiagnostic& s : rec.stages) {
          rec.max_stage_err = std::max(rec.max_stage_err, s.f_error);
        }
      } else if (config.planner == PlannerKind::kGreedyOracle) {
        rec.max_stage_err = 0.0;
      }
    }
    const auto stop = std::chrono::steady_clock::now();
    rec.wall_ms = options.timing
                      ? std::chrono::duration<double, std::milli>(stop - start).count()
                      : 0.0;
    rec.pass = !rec.truncated && rec.delta_pi <= config.delta_target;
    records[static_cast<std::size_t>(i)] = std::move(rec);
  });
  return records;
}

void write_bench_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "seed,planner,k,H,d,gamma,epsilon,N,delta_pi,max_stage_err,wall_ms,pass\n";
  const auto old_precision = out.precision(17);
  for (const RunRecord& r : records) {
    out << r.seed << ',' << r.planner << ',' << r.k << ',' << r.H << ',' << r.d << ','
        << r.gamma << ',' << r.epsilon << ',' << r.N << ',' << r.delta_pi << ','
        << r.max_stage_err << ',' << r.wall_ms << ',' << (r.pass ? 1 : 0) << '\n';
  }
  out.precision(old_precision);
}

void write_bench_stage_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "seed,h,support,beta,mu_error,f_error,envelope\n";
  const auto old_precision = out.precision(17);
  for (const RunRecord& r : records) {
    for (const StageDiagnostic& s : r.stages) {
      out << r.seed << ',' << s.h << ',' << s.support << ',' << s.beta << ',' << s.mu_error
          << ',' << s.f_error << ',' << s.envelope << '\n';
    }
  }
  out.precision(old_precision);
}

nlohmann::json bench_summary(const ExperimentConfig& config, const std::vector<RunRecord>& records) {
  std::vector<double> n, delta, err, wall, pass;
  std::uint64_t max_n = 0;
  double max_delta = kNan;
  int failures = 0;
  int truncated = 0;
  for (const RunRecord& r : records) {
    n.push_back(static_cast<double>(r.N));
    delta.push_back(r.delta_pi);
    err.push_back(r.max_stage_err);
    wall.push_back(r.wall_ms);
    pass.push_back(r.pass ? 1.0 : 0.0);
    max_n = std::max(max_n, r.N);
    if (std::isfinite(r.delta_pi) && !(r.delta_pi <= max_delta)) max_delta = r.delta_pi;
    if (r.truncated || r.delta_pi > config.delta_target) ++failures;
    if (r.truncated) ++truncated;
  }
  nlohmann::json j;
  j["planner"] = planner_name(config.planner);
  j["replicates"] = records.size();
  j["seed"] = config.seed;
  if (!records.empty()) {
    const RunRecord& r = records.front();
    j["instance"] = {{"k", r.k}, {"H", r.H}, {"d", r.d}, {"gamma", r.gamma},
                     {"epsilon", r.epsilon}, {"a_star", config.instance.a_star}};
  }
  j["delta_target"] = config.delta_target;
  j["zeta"] = config.zeta;
  j["mean_N"] = finite_mean(n);
  j["max_N"] = max_n;
  j["max_N_label"] = "empirical maximum over the sampled replicates, not a supremum over instances";
  j["mean_delta_pi"] = finite_mean(delta);
  j["max_delta_pi"] = std::isfinite(max_delta) ? nlohmann::json(max_delta) : nlohmann::json(nullptr);
  j["mean_max_stage_err"] = finite_mean(err);
  j["mean_wall_ms"] = finite_mean(wall);
  j["mean_pass"] = finite_mean(pass);
  j["truncated"] = truncated;
  j["soundness_failure_rate"] =
      records.empty() ? 0.0 : static_cast<double>(failures) / static_cast<double>(records.size());
  return j;
}

AdversaryReport cmd_adversary(const ExperimentConfig& config, std::uint64_t budget) {
  const InstanceBundle bundle = build_instance(config.instance, config.seed);
  const HardParams& p = bundle.params;
  const int k = p.k;
  const int trials = config.trials;
  ExperimentConfig run_config = config;
  run_config.budget = budget;

  AdversaryReport report;
  report.budget = budget;
  report.trials = trials;
  report.n_choice = n_choice(p);
  report.epsilon = p.leaf_mean_bound();
  report.floor = std::pow(1.0 - report.epsilon, static_cast<double>(budget));

  for (int m = 0; m <= k; ++m) {
    const std::optional<Action> star = m == 0 ? std::nullopt : std::optional<Action>(m);
    const HardInstance model = bundle.model(star);
    std::optional<ValueTables> tables;
    if (config.planner == PlannerKind::kGreedyOracle) tables = solve_backward(model, config.cap);
    std::vector<std::vector<char>> played(static_cast<std::size_t>(trials));
    std::vector<std::uint64_t> used(static_cast<std::size_t>(trials), 0);
    parallel_for(trials, config.threads, [&](int t) {
      // The trial stream does not depend on the model, coupling the runs.
      const std::uint64_t seed =
          RngStream::derive(config.seed, "adversary", static_cast<std::uint64_t>(t)).seed();
      QueryMeter meter;
      RngStream sim_rng = RngStream::derive(seed, "simulator");
      RngStream plan_rng = RngStream::derive(seed, "planner");
      Simulator sim(model, meter, sim_rng);
      BudgetedQueries queries(sim, budget);
      try {
        run_planner(run_config, model, model, tables ? &*tables : nullptr, queries, plan_rng);
      } catch (const BudgetExhausted&) {
      }
      std::vector<char> row(static_cast<std::size_t>(k), 0);
      for (Action a : queries.actions()) row[static_cast<std::size_t>(a - 1)] = 1;
      played[static_cast<std::size_t>(t)] = std::move(row);
      used[static_cast<std::size_t>(t)] = meter.count();
    });
    AdversaryModelRow row;
    row.a_star = m;
    row.not_queried.assign(static_cast<std::size_t>(k), 0.0);
    double total_used = 0.0;
    for (int t = 0; t < trials; ++t) {
      for (int a = 0; a < k; ++a) {
        if (!played[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)]) {
          row.not_queried[static_cast<std::size_t>(a)] += 1.0;
        }
      }
      total_used += static_cast<double>(used[static_cast<std::size_t>(t)]);
    }
    for (double& v : row.not_queried) v /= trials;
    row.mean_queries = total_used / trials;
    report.rows.push_back(std::move(row));
  }

  const auto& null_row = report.rows.front().not_queried;
  report.min_ratio = std::numeric_limits<double>::infinity();
  report.min_null_play = 1.0;
  for (int a = 1; a <= k; ++a) {
    const double p0 = null_row[static_cast<std::size_t>(a - 1)];
    const double pa = report.rows[static_cast<std::size_t>(a)].not_queried[static_cast<std::size_t>(a - 1)];
    report.min_null_play = std::min(report.min_null_play, 1.0 - p0);
    const double ratio = p0 > 0.0 ? pa / p0 : kNan;
    report.ratios.push_back(ratio);
    if (std::isfinite(ratio)) report.min_ratio = std::min(report.min_ratio, ratio);
    const double se = std::sqrt((pa * (1.0 - pa) + report.floor * report.floor * p0 * (1.0 - p0)) /
                                static_cast<double>(trials));
    const double slack = std::max(3.0 * se, 1.0 / static_cast<double>(trials));
    if (pa < report.floor * p0 - slack) report.floor_holds = false;
  }
  if (!std::isfinite(report.min_ratio)) report.min_ratio = kNan;
  return report;
}

nlohmann::json adversary_json(const AdversaryReport& report) {
  nlohmann::json j;
  j["budget"] = report.budget;
  j["trials"] = report.trials;
  j["n_choice"] = report.n_choice;
  j["epsilon"] = report.epsilon;
  j["floor"] = report.floor;
  auto number = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  j["min_ratio"] = number(report.min_ratio);
  j["min_null_play"] = report.min_null_play;
  j["floor_holds"] = report.floor_holds;
  nlohmann::json rows = nlohmann::json::array();
  for (const AdversaryModelRow& r : report.rows) {
    rows.push_back({{"a_star", r.a_star}, {"not_queried", r.not_queried},
                    {"mean_queries", r.mean_queries}});
  }
  j["models"] = rows;
  nlohmann::json ratios = nlohmann::json::array();
  for (double r : report.ratios) ratios.push_back(number(r));
  j["ratios"] = ratios;
  return j;
}

void cmd_solve(const ExperimentConfig& config, std::ostream& out) {
  const InstanceBundle bundle = build_instance(config.instance, config.seed);
  const HardInstance model = bundle.model();
  write_tables_csv(out, solve_backward(model, config.cap));
}

}  // namespace qstar
