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

#ifndef QSTAR_EXACT_ORACLE_HPP_
#define QSTAR_EXACT_ORACLE_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "qstar/hard_family.hpp"
#include "qstar/mdp.hpp"
#include "qstar/policy.hpp"

namespace qstar {

// Enumerated stage state sets S_1..S_{H+1} with index lookup.
class StateSpace {
 public:
  StateSpace() = default;
  StateSpace(const MdpModel& model, std::size_t cap = kDefaultStateCap);

  int horizon() const { return static_cast<int>(stages_.size()) - 2; }
  const std::vector<StateId>& states(int h) const {
    return stages_.at(static_cast<std::size_t>(h));
  }
  // Index of s in stage h, or -1.
  int find(int h, const StateId& s) const;
  std::size_t total_size() const;

 private:
  std::vector<std::vector<StateId>> stages_;
  std::vector<std::unordered_map<StateId, int, StateIdHash>> index_;
};

// Function of (h, s, a), used for action-value estimates.
using StageActionFn = std::function<double(int h, const StateId& s, Action a)>;

// Exact q*_h, v*_h and action gaps by backward induction.
class ValueTables {
 public:
  int horizon() const { return space_->horizon(); }
  int num_actions() const { return num_actions_; }
  const StateSpace& space() const { return *space_; }
  std::shared_ptr<const StateSpace> shared_space() const { return space_; }

  double q(int h, const StateId& s, Action a) const;
  double v(int h, const StateId& s) const;
  double gap(int h, const StateId& s, Action a) const { return v(h, s) - q(h, s, a); }
  const Eigen::MatrixXd& q_stage(int h) const { return q_.at(static_cast<std::size_t>(h)); }
  const Eigen::VectorXd& v_stage(int h) const { return v_.at(static_cast<std::size_t>(h)); }

  StagePolicy greedy_policy() const;

 private:
  friend ValueTables solve_backward(const MdpModel&, std::shared_ptr<const StateSpace>);

  std::shared_ptr<const StateSpace> space_;
  int num_actions_ = 0;
  std::vector<Eigen::MatrixXd> q_;  // per stage: |S_h| x k
  std::vector<Eigen::VectorXd> v_;  // per stage, v_{H+1} = 0
};

ValueTables solve_backward(const MdpModel& model, std::shared_ptr<const StateSpace> space);
ValueTables solve_backward(const MdpModel& model, std::size_t cap = kDefaultStateCap);

// Max residual of the two Bellman displays recomputed from the model laws.
double bellman_residual(const MdpModel& model, const ValueTables& tables);

// Exact v^pi per stage, on the same state space as the tables.
class PolicyValues {
 public:
  double v(int h, const StateId& s) const;
  const Eigen::VectorXd& v_stage(int h) const { return v_.at(static_cast<std::size_t>(h)); }

 private:
  friend PolicyValues policy_value(const MdpModel&, std::shared_ptr<const StateSpace>,
                                   const StagePolicy&);
  std::shared_ptr<const StateSpace> space_;
  std::vector<Eigen::VectorXd> v_;
};

PolicyValues policy_value(const MdpModel& model, std::shared_ptr<const StateSpace> space,
                          const StagePolicy& policy);
PolicyValues policy_value(const MdpModel& model, const ValueTables& tables,
                          const StagePolicy& policy);

struct StageStateLocation {
  int h = 0;
  StateId s;
};

struct Suboptimality {
  double delta_pi = 0.0;  // sup_{h, s in S_h} v*_h(s) - v^pi_h(s)
  StageStateLocation where;
};

Suboptimality suboptimality(const MdpModel& model, const ValueTables& tables,
                            const StagePolicy& policy);

struct TransitionSoundness {
  double worst_mass = 0.0;  // max_{h,s} sum_a 1{gap >= delta} pi_h(a|s)
  StageStateLocation where;
};

TransitionSoundness check_transition_soundness(const ValueTables& tables,
                                               const StagePolicy& policy, double delta);

struct SoundnessConversion {
  double delta_pi = 0.0;
  double mass_at_delta = 0.0;
  double mass_at_delta_over_zeta = 0.0;
  // (delta, zeta)-transition-sound  =>  delta_pi <= H delta + H(H+1) zeta / 2
  bool first_holds = true;
  // delta_pi <= delta  =>  (delta/zeta, zeta)-transition-sound
  bool second_holds = true;
};

// Requires zeta in (0, 1].
SoundnessConversion prop1_check(const MdpModel& model, const ValueTables& tables,
                                const StagePolicy& policy, double delta, double zeta);

struct GreedyErrorCheck {
  double lhs = 0.0;  // max_h ||v*_h - v^pi_h||_inf for pi greedy on f
  double rhs = 0.0;  // 2 sum_h ||q*_h - f_h||_inf
  double first_stage_rhs = 0.0;  // 2 H ||q*_1 - f_1||_inf, reported only
  bool holds = true;
};

GreedyErrorCheck lemma8_check(const MdpModel& model, const ValueTables& tables,
                              const StageActionFn& f);

struct RealizabilityReport {
  double max_residual = 0.0;
  int h = 0;
  StateId s;
  Action a = 0;
};

// reachable[h][i] is true when states(h)[i] has positive probability under
// some action sequence from the stage-1 states.
std::vector<std::vector<bool>> reachable_states(const MdpModel& model, const StateSpace& space);

// max over reachable (h, s, a) of |q*_h(s,a) - <phi_h(s,a), theta>|. Tree
// states that contain a* are enumerated but never reached in M_{a*}.
RealizabilityReport check_realizability(const MdpModel& model, const FeatureMap& features,
                                        const Eigen::VectorXd& theta,
                                        const ValueTables& tables);
RealizabilityReport check_realizability(const HardInstance& instance,
                                        const ValueTables& tables);

struct RootGapReport {
  double min_gap = 0.0;          // min_{a != a*} Delta*_1(root, a) from the tables
  double min_formula_gap = 0.0;  // min_{a != a*} eps x^H (1 - <v_a*, v_a>)
  Action argmin = 0;
};

RootGapReport root_gaps(const HardInstance& instance, const ValueTables& tables);

struct LikelihoodFloor {
  double min_ratio = 1.0;  // min per-step P_{a*}(r|s,a) / P_0(r|s,a)
  std::int64_t n = 0;
  double floor = 1.0;      // min_ratio^n
  double bound = 1.0;      // (1 - eps')^n, eps' the leaf-mean bound
  StateId where;
  Action where_action = 0;
  bool holds = true;       // min_ratio >= 1 - eps'
};

LikelihoodFloor likelihood_floor_check(const HardInstance& instance, std::int64_t n,
                                       std::size_t cap = kDefaultStateCap);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t episodes = 0;
};

// Discounted return from the initial state averaged over rollouts.
MonteCarloEstimate monte_carlo_value(const MdpModel& model, const StagePolicy& policy,
                                     std::int64_t episodes, RngStream& rng);

// CSV: h,state,action,q,v,gap with 17 significant digits.
void write_tables_csv(std::ostream& out, const ValueTables& tables);

}  // namespace qstar

#endif  // QSTAR_EXACT_ORACLE_HPP_
