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

#include "qstar/policy.hpp"

#include <cmath>
#include <string>

#include "qstar/errors.hpp"

namespace qstar {

StagePolicy::StagePolicy(int num_actions, Fn fn)
    : num_actions_(num_actions), fn_(std::move(fn)) {
  if (num_actions < 1) throw ParameterError("policy needs at least one action");
}

StagePolicy StagePolicy::deterministic(int num_actions, ActionFn choose) {
  return StagePolicy(num_actions,
                     [num_actions, choose = std::move(choose)](int h, const StateId& s) {
                       const Action a = choose(h, s);
                       std::vector<double> probs(static_cast<std::size_t>(num_actions), 0.0);
                       if (a < 1 || a > num_actions) return std::vector<double>{};
                       probs[static_cast<std::size_t>(a - 1)] = 1.0;
                       return probs;
                     });
}

StagePolicy StagePolicy::uniform(int num_actions) {
  return StagePolicy(num_actions, [num_actions](int, const StateId&) {
    return std::vector<double>(static_cast<std::size_t>(num_actions),
                               1.0 / num_actions);
  });
}

StagePolicy StagePolicy::greedy(int num_actions, ScoreFn score) {
  return deterministic(num_actions, [num_actions, score = std::move(score)](
                                        int h, const StateId& s) {
    return greedy_action(num_actions, [&](Action a) { return score(h, s, a); });
  });
}

std::vector<double> StagePolicy::distribution(int h, const StateId& s) const {
  std::vector<double> probs = fn_(h, s);
  if (probs.size() != static_cast<std::size_t>(num_actions_)) {
    throw EvaluationError("policy undefined at stage " + std::to_string(h) +
                          ", state " + s.to_string());
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) {
      throw EvaluationError("negative action probability at " + s.to_string());
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw EvaluationError("action probabilities at " + s.to_string() +
                          " sum to " + std::to_string(total));
  }
  return probs;
}

Action StagePolicy::sample(int h, const StateId& s, RngStream& rng) const {
  const std::vector<double> probs = distribution(h, s);
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<Action>(i) + 1;
  }
  // Round-off: fall back to the last action with positive mass.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<Action>(i) + 1;
  }
  return num_actions_;
}

Action greedy_action(int num_actions, const std::function<double(Action)>& score) {
  Action best = 1;
  double best_value = score(1);
  for (Action a = 2; a <= num_actions; ++a) {
    const double v = score(a);
    if (v > best_value) {
      best = a;
      best_value = v;
    }
  }
  return best;
}

}  // namespace qstar
