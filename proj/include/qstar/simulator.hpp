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

#ifndef QSTAR_SIMULATOR_HPP_
#define QSTAR_SIMULATOR_HPP_

#include <atomic>
#include <cstdint>
#include <vector>

#include "qstar/mdp.hpp"
#include "qstar/policy.hpp"
#include "qstar/rng.hpp"

namespace qstar {

// Monotone query counter. Thread-safe so parallel samplers can share one.
class QueryMeter {
 public:
  std::uint64_t count() const { return count_.load(std::memory_order_relaxed); }
  void add(std::uint64_t n) { count_.fetch_add(n, std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> count_{0};
};

struct QuerySample {
  double reward;
  StateId next;
};

// Sufficient statistics of `count` i.i.d. queries at one (s, a).
struct QueryBatch {
  std::uint64_t count = 0;
  double reward_sum = 0.0;
  std::vector<std::pair<StateId, std::uint64_t>> next_counts;
};

// What a planner sees: (s, a) -> (reward, next state).
class QueryInterface {
 public:
  virtual ~QueryInterface() = default;
  virtual int num_actions() const = 0;
  virtual QuerySample query(const StateId& s, Action a) = 0;
  // Equivalent in distribution to `count` calls of query(); counts as
  // `count` queries. The default loops over query().
  virtual QueryBatch query_many(const StateId& s, Action a, std::uint64_t count);
};

// Generative model over an MdpModel with query accounting.
class Simulator : public QueryInterface {
 public:
  Simulator(const MdpModel& model, QueryMeter& meter, RngStream& rng)
      : model_(model), meter_(meter), rng_(rng) {}

  int num_actions() const override { return model_.num_actions(); }
  QuerySample query(const StateId& s, Action a) override;
  QueryBatch query_many(const StateId& s, Action a, std::uint64_t count) override;

  const MdpModel& model() const { return model_; }
  const QueryMeter& meter() const { return meter_; }

 private:
  void validate(const StateId& s, Action a) const;

  const MdpModel& model_;
  QueryMeter& meter_;
  RngStream& rng_;
};

// Samples one (reward, next) pair straight from the model laws, unmetered.
QuerySample sample_transition(const MdpModel& model, const StateId& s, Action a,
                              RngStream& rng);

struct Trajectory {
  std::vector<StateId> states;  // H+1 entries, states[0] is the initial state
  std::vector<Action> actions;  // H entries
  std::vector<double> rewards;  // H entries

  double total_reward() const;
};

// One episode of exactly H transitions from the initial state.
Trajectory run_policy(const MdpModel& model, const StagePolicy& policy,
                      RngStream& rng);

}  // namespace qstar

#endif  // QSTAR_SIMULATOR_HPP_
