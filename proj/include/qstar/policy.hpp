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

#ifndef QSTAR_POLICY_HPP_
#define QSTAR_POLICY_HPP_

#include <functional>
#include <vector>

#include "qstar/rng.hpp"
#include "qstar/state.hpp"

namespace qstar {

// Memoryless stage-indexed policy: pi_h(. | s) as a probability vector over
// actions 1..k (stored at positions 0..k-1).
class StagePolicy {
 public:
  using Fn = std::function<std::vector<double>(int h, const StateId& s)>;
  using ActionFn = std::function<Action(int h, const StateId& s)>;
  using ScoreFn = std::function<double(int h, const StateId& s, Action a)>;

  StagePolicy(int num_actions, Fn fn);

  static StagePolicy deterministic(int num_actions, ActionFn choose);
  static StagePolicy uniform(int num_actions);
  // argmax_a score(h, s, a), ties broken by the lowest action index.
  static StagePolicy greedy(int num_actions, ScoreFn score);

  int num_actions() const { return num_actions_; }

  // Validated distribution; throws EvaluationError if the policy is
  // undefined at (h, s) or the vector is not a probability vector.
  std::vector<double> distribution(int h, const StateId& s) const;
  Action sample(int h, const StateId& s, RngStream& rng) const;

 private:
  int num_actions_;
  Fn fn_;
};

// Lowest-index argmax of score(a) over a = 1..k.
Action greedy_action(int num_actions, const std::function<double(Action)>& score);

}  // namespace qstar

#endif  // QSTAR_POLICY_HPP_
