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

#ifndef QSTAR_MDP_HPP_
#define QSTAR_MDP_HPP_

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qstar/rng.hpp"
#include "qstar/state.hpp"

namespace qstar {

inline constexpr std::size_t kDefaultStateCap = 2'000'000;

// One atom of a finite reward distribution.
struct RewardAtom {
  double value;
  double prob;
};

// Finite reward distribution: point masses and Bernoullis, kept explicit so
// likelihoods can be computed exactly as well as sampled.
class RewardLaw {
 public:
  static RewardLaw point(double value);
  static RewardLaw bernoulli(double p);
  static RewardLaw from_atoms(std::vector<RewardAtom> atoms);

  const std::vector<RewardAtom>& atoms() const { return atoms_; }
  double mean() const;
  // Probability of observing exactly `value`.
  double prob_of(double value) const;
  double sample(RngStream& rng) const;
  // Sum of `count` i.i.d. draws.
  double sample_sum(std::uint64_t count, RngStream& rng) const;

  bool is_point() const { return atoms_.size() == 1; }
  bool is_bernoulli() const { return bernoulli_; }

  friend bool operator==(const RewardLaw& a, const RewardLaw& b);

 private:
  std::vector<RewardAtom> atoms_;
  bool bernoulli_ = false;
};

struct TransitionAtom {
  StateId next;
  double prob;
};
using TransitionLaw = std::vector<TransitionAtom>;

// A stage-structured MDP with finite reward and transition laws.
//
// States at stage h have level h; stage H+1 holds the terminal states. The
// state space at each stage must be enumerable for the exact oracle.
class MdpModel {
 public:
  virtual ~MdpModel() = default;

  virtual int horizon() const = 0;
  virtual int num_actions() const = 0;
  // 1 for fixed-horizon models.
  virtual double discount() const { return 1.0; }
  virtual StateId initial_state() const = 0;

  // True if s is a state of the model at some level in 1..H+1.
  virtual bool contains(const StateId& s) const = 0;
  virtual RewardLaw reward_law(const StateId& s, Action a) const = 0;
  virtual TransitionLaw transition_law(const StateId& s, Action a) const = 0;

  // The stage-h state set used by the oracle and by planners. Must be closed
  // under transitions. Defaults to the states accessible from the initial
  // state in h-1 steps.
  virtual std::vector<StateId> stage_states(int h, std::size_t cap) const;
  // Upper estimate of |stage_states(h)| used for cap checks before
  // enumeration; 0 when unknown.
  virtual std::size_t stage_size_hint(int h) const;
};

// Stage-indexed feature map phi_h(s, a) in R^d.
class FeatureMap {
 public:
  virtual ~FeatureMap() = default;
  virtual int dimension() const = 0;
  virtual Eigen::VectorXd phi(int h, const StateId& s, Action a) const = 0;
};

// S_h: states accessible from the initial state in h-1 steps, in canonical
// order. Throws SizeError naming the stage if cumulative size exceeds cap.
std::vector<StateId> reachable_states(const MdpModel& model, int h,
                                      std::size_t cap = kDefaultStateCap);

// stage_states(h) for h = 1..H+1 (index 0 unused), with the cap applied to
// the running total.
std::vector<std::vector<StateId>> enumerate_stages(
    const MdpModel& model, std::size_t cap = kDefaultStateCap);

}  // namespace qstar

#endif  // QSTAR_MDP_HPP_
