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

#include "qstar/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "qstar/errors.hpp"

namespace qstar {

RewardLaw RewardLaw::point(double value) {
  RewardLaw law;
  law.atoms_.push_back({value, 1.0});
  return law;
}

RewardLaw RewardLaw::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ParameterError("Bernoulli mean outside [0,1]: " + std::to_string(p));
  }
  RewardLaw law;
  law.atoms_.push_back({0.0, 1.0 - p});
  law.atoms_.push_back({1.0, p});
  law.bernoulli_ = true;
  return law;
}

RewardLaw RewardLaw::from_atoms(std::vector<RewardAtom> atoms) {
  if (atoms.empty()) throw ParameterError("reward law needs at least one atom");
  double total = 0.0;
  for (const auto& atom : atoms) {
    if (atom.prob < 0.0) throw ParameterError("negative reward probability");
    total += atom.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ParameterError("reward probabilities do not sum to 1");
  }
  RewardLaw law;
  law.atoms_ = std::move(atoms);
  return law;
}

double RewardLaw::mean() const {
  double m = 0.0;
  for (const auto& atom : atoms_) m += atom.value * atom.prob;
  return m;
}

double RewardLaw::prob_of(double value) const {
  double p = 0.0;
  for (const auto& atom : atoms_) {
    if (atom.value == value) p += atom.prob;
  }
  return p;
}

double RewardLaw::sample(RngStream& rng) const {
  if (atoms_.size() == 1) return atoms_.front().value;
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& atom : atoms_) {
    acc += atom.prob;
    if (u < acc) return atom.value;
  }
  return atoms_.back().value;
}

double RewardLaw::sample_sum(std::uint64_t count, RngStream& rng) const {
  if (count == 0) return 0.0;
  if (atoms_.size() == 1) return atoms_.front().value * static_cast<double>(count);
  // Multinomial counts by sequential conditional binomials.
  double sum = 0.0;
  std::uint64_t remaining = count;
  double mass_left = 1.0;
  for (std::size_t i = 0; i < atoms_.size() && remaining > 0; ++i) {
    std::uint64_t c = remaining;
    if (i + 1 < atoms_.size()) {
      const double p = mass_left > 0.0 ? atoms_[i].prob / mass_left : 0.0;
      c = rng.binomial(remaining, std::min(1.0, p));
    }
    sum += atoms_[i].value * static_cast<double>(c);
    remaining -= c;
    mass_left -= atoms_[i].prob;
  }
  return sum;
}

bool operator==(const RewardLaw& a, const RewardLaw& b) {
  // Compare as distributions: every value carries the same mass in both.
  for (const auto& atom : a.atoms_) {
    if (a.prob_of(atom.value) != b.prob_of(atom.value)) return false;
  }
  for (const auto& atom : b.atoms_) {
    if (a.prob_of(atom.value) != b.prob_of(atom.value)) return false;
  }
  return true;
}

std::vector<StateId> MdpModel::stage_states(int h, std::size_t cap) const {
  return reachable_states(*this, h, cap);
}

std::size_t MdpModel::stage_size_hint(int) const { return 0; }

std::vector<StateId> reachable_states(const MdpModel& model, int h,
                                      std::size_t cap) {
  const int horizon = model.horizon();
  if (h < 1 || h > horizon + 1) {
    throw ParameterError("stage " + std::to_string(h) + " outside 1.." +
                         std::to_string(horizon + 1));
  }
  std::set<StateId> current{model.initial_state()};
  std::size_t total = 1;
  for (int stage = 1; stage < h; ++stage) {
    std::set<StateId> next;
    for (const StateId& s : current) {
      for (Action a = 1; a <= model.num_actions(); ++a) {
        for (const auto& atom : model.transition_law(s, a)) {
          if (atom.prob > 0.0) next.insert(atom.next);
        }
      }
    }
    total += next.size();
    if (total > cap) {
      throw SizeError("state count exceeds cap " + std::to_string(cap) +
                      " at stage " + std::to_string(stage + 1));
    }
    current = std::move(next);
  }
  return {current.begin(), current.end()};
}

std::vector<std::vector<StateId>> enumerate_stages(const MdpModel& model,
                                                   std::size_t cap) {
  const int horizon = model.horizon();
  std::vector<std::vector<StateId>> stages(static_cast<std::size_t>(horizon) + 2);
  std::size_t total = 0;
  for (int h = 1; h <= horizon + 1; ++h) {
    const std::size_t hint = model.stage_size_hint(h);
    if (hint > 0 && total + hint > cap) {
      throw SizeError("state count exceeds cap " + std::to_string(cap) +
                      " at stage " + std::to_string(h));
    }
    stages[h] = model.stage_states(h, cap);
    total += stages[h].size();
    if (total > cap) {
      throw SizeError("state count exceeds cap " + std::to_string(cap) +
                      " at stage " + std::to_string(h));
    }
  }
  return stages;
}

}  // namespace qstar
