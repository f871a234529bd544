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

#include "qstar/simulator.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "qstar/errors.hpp"

namespace qstar {

QueryBatch QueryInterface::query_many(const StateId& s, Action a,
                                      std::uint64_t count) {
  QueryBatch batch;
  std::map<StateId, std::uint64_t> counts;
  for (std::uint64_t i = 0; i < count; ++i) {
    QuerySample sample = query(s, a);
    batch.reward_sum += sample.reward;
    ++counts[sample.next];
    ++batch.count;
  }
  batch.next_counts.assign(counts.begin(), counts.end());
  return batch;
}

void Simulator::validate(const StateId& s, Action a) const {
  if (a < 1 || a > model_.num_actions()) {
    throw ProtocolError("action " + std::to_string(a) + " outside 1.." +
                        std::to_string(model_.num_actions()));
  }
  if (!model_.contains(s) || s.level() > model_.horizon()) {
    throw ProtocolError("state " + s.to_string() +
                        " is not a queryable state of the model");
  }
}

QuerySample sample_transition(const MdpModel& model, const StateId& s, Action a,
                              RngStream& rng) {
  const double reward = model.reward_law(s, a).sample(rng);
  const TransitionLaw law = model.transition_law(s, a);
  if (law.size() == 1) return {reward, law.front().next};
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& atom : law) {
    acc += atom.prob;
    if (u < acc) return {reward, atom.next};
  }
  return {reward, law.back().next};
}

QuerySample Simulator::query(const StateId& s, Action a) {
  validate(s, a);
  meter_.add(1);
  return sample_transition(model_, s, a, rng_);
}

QueryBatch Simulator::query_many(const StateId& s, Action a, std::uint64_t count) {
  validate(s, a);
  meter_.add(count);
  QueryBatch batch;
  batch.count = count;
  batch.reward_sum = model_.reward_law(s, a).sample_sum(count, rng_);
  const TransitionLaw law = model_.transition_law(s, a);
  std::uint64_t remaining = count;
  double mass_left = 1.0;
  for (std::size_t i = 0; i < law.size() && remaining > 0; ++i) {
    std::uint64_t c = remaining;
    if (i + 1 < law.size()) {
      const double p = mass_left > 0.0 ? law[i].prob / mass_left : 0.0;
      c = rng_.binomial(remaining, std::min(1.0, p));
    }
    if (c > 0) batch.next_counts.emplace_back(law[i].next, c);
    remaining -= c;
    mass_left -= law[i].prob;
  }
  return batch;
}

double Trajectory::total_reward() const {
  double total = 0.0;
  for (double r : rewards) total += r;
  return total;
}

Trajectory run_policy(const MdpModel& model, const StagePolicy& policy,
                      RngStream& rng) {
  Trajectory t;
  StateId s = model.initial_state();
  t.states.push_back(s);
  for (int h = 1; h <= model.horizon(); ++h) {
    const Action a = policy.sample(h, s, rng);
    QuerySample step = sample_transition(model, s, a, rng);
    t.actions.push_back(a);
    t.rewards.push_back(step.reward);
    s = std::move(step.next);
    t.states.push_back(s);
  }
  return t;
}

}  // namespace qstar
