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

#include "qstar/tabular_mdp.hpp"

#include <cmath>
#include <string>

#include "qstar/errors.hpp"

namespace qstar {

TabularMdp::TabularMdp(int horizon, int num_actions, std::vector<int> stage_sizes,
                       double discount)
    : horizon_(horizon),
      num_actions_(num_actions),
      stage_sizes_(std::move(stage_sizes)),
      discount_(discount) {
  if (horizon < 1 || num_actions < 1) {
    throw ParameterError("tabular MDP needs H >= 1 and k >= 1");
  }
  if (stage_sizes_.size() != static_cast<std::size_t>(horizon) + 1) {
    throw ParameterError("tabular MDP needs H+1 stage sizes");
  }
  if (stage_sizes_.front() != 1) {
    throw ParameterError("stage 1 must hold exactly the initial state");
  }
  std::size_t offset = 0;
  for (int h = 1; h <= horizon; ++h) {
    if (stage_sizes_[static_cast<std::size_t>(h - 1)] < 1) {
      throw ParameterError("empty stage " + std::to_string(h));
    }
    stage_offsets_.push_back(offset);
    offset += static_cast<std::size_t>(stage_sizes_[static_cast<std::size_t>(h - 1)]) *
              static_cast<std::size_t>(num_actions);
  }
  rewards_.assign(offset, RewardLaw::point(0.0));
  // Default: everything falls into terminal node 0.
  transitions_.assign(offset, {{0, 1.0}});
}

std::size_t TabularMdp::slot(int h, int index, Action a) const {
  if (h < 1 || h > horizon_ || index < 0 || index >= stage_size(h) || a < 1 ||
      a > num_actions_) {
    throw ParameterError("tabular MDP slot out of range");
  }
  return stage_offsets_[static_cast<std::size_t>(h - 1)] +
         static_cast<std::size_t>(index) * static_cast<std::size_t>(num_actions_) +
         static_cast<std::size_t>(a - 1);
}

void TabularMdp::set_reward(int h, int index, Action a, RewardLaw law) {
  rewards_[slot(h, index, a)] = std::move(law);
}

void TabularMdp::set_transition(int h, int index, Action a,
                                std::vector<std::pair<int, double>> next) {
  double total = 0.0;
  for (const auto& [j, p] : next) {
    if (j < 0 || j >= stage_size(h + 1) || p < 0.0) {
      throw ParameterError("invalid transition target at stage " + std::to_string(h));
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ParameterError("transition probabilities do not sum to 1");
  }
  transitions_[slot(h, index, a)] = std::move(next);
}

bool TabularMdp::contains(const StateId& s) const {
  return s.is_node() && s.level() >= 1 && s.level() <= horizon_ + 1 &&
         s.index() < stage_size(s.level());
}

RewardLaw TabularMdp::reward_law(const StateId& s, Action a) const {
  if (!contains(s)) throw ProtocolError("unknown state " + s.to_string());
  if (s.level() > horizon_) return RewardLaw::point(0.0);
  return rewards_[slot(s.level(), s.index(), a)];
}

TransitionLaw TabularMdp::transition_law(const StateId& s, Action a) const {
  if (!contains(s)) throw ProtocolError("unknown state " + s.to_string());
  if (s.level() > horizon_) return {{s, 1.0}};
  TransitionLaw law;
  for (const auto& [j, p] : transitions_[slot(s.level(), s.index(), a)]) {
    law.push_back({StateId::node(s.level() + 1, j), p});
  }
  return law;
}

std::vector<StateId> TabularMdp::stage_states(int h, std::size_t) const {
  std::vector<StateId> out;
  for (int i = 0; i < stage_size(h); ++i) out.push_back(StateId::node(h, i));
  return out;
}

std::size_t TabularMdp::stage_size_hint(int h) const {
  return static_cast<std::size_t>(stage_size(h));
}

TabularMdp random_tabular_mdp(int horizon, int max_states, int num_actions,
                              RngStream& rng) {
  std::vector<int> sizes{1};
  for (int h = 2; h <= horizon; ++h) sizes.push_back(rng.uniform_int(1, max_states));
  sizes.push_back(1);
  TabularMdp mdp(horizon, num_actions, sizes);
  for (int h = 1; h <= horizon; ++h) {
    for (int i = 0; i < mdp.stage_size(h); ++i) {
      for (Action a = 1; a <= num_actions; ++a) {
        mdp.set_reward(h, i, a, RewardLaw::point(rng.uniform_int(0, 10) / 10.0));
        mdp.set_transition(h, i, a, {{rng.uniform_int(0, mdp.stage_size(h + 1) - 1), 1.0}});
      }
    }
  }
  return mdp;
}

void TabularFeatures::set(int h, const StateId& s, Action a, Eigen::VectorXd value) {
  if (value.size() != dimension_) throw ParameterError("feature dimension mismatch");
  table_[{h, s, a}] = std::move(value);
}

Eigen::VectorXd TabularFeatures::phi(int h, const StateId& s, Action a) const {
  const auto it = table_.find({h, s, a});
  if (it == table_.end()) return Eigen::VectorXd::Zero(dimension_);
  return it->second;
}

}  // namespace qstar
