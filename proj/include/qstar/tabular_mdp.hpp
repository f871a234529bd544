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

#ifndef QSTAR_TABULAR_MDP_HPP_
#define QSTAR_TABULAR_MDP_HPP_

#include <map>
#include <tuple>
#include <vector>

#include "qstar/mdp.hpp"

namespace qstar {

// Explicit stage-structured MDP over node states (level, index). Stage H+1
// holds the terminal nodes. Used for hand-built test models and the random
// small-MDP generator.
class TabularMdp : public MdpModel {
 public:
  // stage_sizes[h-1] = number of nodes at stage h, for h = 1..H+1.
  TabularMdp(int horizon, int num_actions, std::vector<int> stage_sizes,
             double discount = 1.0);

  void set_reward(int h, int index, Action a, RewardLaw law);
  // Distribution over node indices of stage h+1.
  void set_transition(int h, int index, Action a,
                      std::vector<std::pair<int, double>> next);

  int horizon() const override { return horizon_; }
  int num_actions() const override { return num_actions_; }
  double discount() const override { return discount_; }
  StateId initial_state() const override { return StateId::node(1, 0); }
  bool contains(const StateId& s) const override;
  RewardLaw reward_law(const StateId& s, Action a) const override;
  TransitionLaw transition_law(const StateId& s, Action a) const override;
  std::vector<StateId> stage_states(int h, std::size_t cap) const override;
  std::size_t stage_size_hint(int h) const override;

  int stage_size(int h) const { return stage_sizes_.at(static_cast<std::size_t>(h - 1)); }

 private:
  std::size_t slot(int h, int index, Action a) const;

  int horizon_;
  int num_actions_;
  std::vector<int> stage_sizes_;
  std::vector<std::size_t> stage_offsets_;
  double discount_;
  std::vector<RewardLaw> rewards_;
  std::vector<std::vector<std::pair<int, double>>> transitions_;
};

// Random small MDP: one initial node, 1..max_states nodes per inner stage,
// uniformly random deterministic transitions, rewards drawn uniformly from
// {0, 0.1, ..., 1} as point masses.
TabularMdp random_tabular_mdp(int horizon, int max_states, int num_actions,
                              RngStream& rng);

// Explicit feature table keyed by (h, state, action); unset entries are zero.
class TabularFeatures : public FeatureMap {
 public:
  explicit TabularFeatures(int dimension) : dimension_(dimension) {}

  void set(int h, const StateId& s, Action a, Eigen::VectorXd value);

  int dimension() const override { return dimension_; }
  Eigen::VectorXd phi(int h, const StateId& s, Action a) const override;

 private:
  int dimension_;
  std::map<std::tuple<int, StateId, Action>, Eigen::VectorXd> table_;
};

}  // namespace qstar

#endif  // QSTAR_TABULAR_MDP_HPP_
