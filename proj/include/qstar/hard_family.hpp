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

#ifndef QSTAR_HARD_FAMILY_HPP_
#define QSTAR_HARD_FAMILY_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qstar/jl_vectors.hpp"
#include "qstar/mdp.hpp"

namespace qstar {

enum class HorizonMode { kFixed, kDiscounted };

// Parameters of the hard family M_{a*,eps} / M_0.
//
// In paper mode gamma, k and epsilon follow from (d, eta). In desk mode the
// caller fixes gamma and k directly (any vector family with overlaps <= gamma
// keeps every structural property), and eta is only recorded.
struct HardParams {
  int d = 0;
  int H = 0;
  double eta = 0.0;
  double gamma = 0.0;
  int k = 0;
  double epsilon = 0.0;
  double x = 0.0;  // (1 - gamma) / (2 gamma)
  HorizonMode mode = HorizonMode::kFixed;
  double alpha = 1.0;
  bool paper_mode = false;

  double discount() const { return mode == HorizonMode::kDiscounted ? alpha : 1.0; }
  // Upper bound on leaf Bernoulli means: eps, or alpha^{-H+1} eps when
  // discounted.
  double leaf_mean_bound() const;
};

// Paper-mode parameters. Requires d >= 18, H >= 1,
// 0 < eta <= 1/2 - 2/log2(d-1), and alpha in [2/3, 1) when discounted.
HardParams derive_params(int d, int H, double eta,
                         HorizonMode mode = HorizonMode::kFixed,
                         double alpha = 1.0);

// Desk-scale parameters with gamma and k chosen by the caller; d >= 2,
// 0 < gamma <= 1/4. epsilon = x^{-H}/3 as in paper mode.
HardParams desk_params(int d, int H, double gamma, int k,
                       HorizonMode mode = HorizonMode::kFixed,
                       double alpha = 1.0);

// Replaces k after checking that `family` has k unit vectors of dimension
// d-1 with overlaps <= gamma.
HardParams override_k(const HardParams& params, int k, const VectorFamily& family);

// Lowers epsilon; raising it above x^{-H}/3 would break the reward bounds.
HardParams override_epsilon(const HardParams& params, double epsilon);

// Per-stage bias c_h = 1/2 + ((1+gamma)/2) sum_{l=1}^{H-h} x^l.
double c_of(int h, const HardParams& params);

// n = floor(min(k/4, (1/eps - 1)/3.5)).
std::int64_t n_choice(const HardParams& params);

enum class SigmaMode {
  kExact,
  // Shrinks the constant term of the recursion; realizability must then
  // fail. Used as an expected-failure fixture.
  kCorrupted,
};

// One member of the hard family: M_{a*,eps} when a_star is set, M_0
// otherwise. Immutable after construction; the sigma memo is a write-once
// map and safe to share across threads.
class HardInstance : public MdpModel, public FeatureMap {
 public:
  HardInstance(HardParams params, VectorFamily vectors, std::optional<Action> a_star,
               SigmaMode sigma_mode = SigmaMode::kExact);

  const HardParams& params() const { return params_; }
  const VectorFamily& vectors() const { return vectors_; }
  std::optional<Action> a_star() const { return a_star_; }
  bool is_null_model() const { return !a_star_.has_value(); }
  const Eigen::VectorXd& theta_star() const { return theta_star_; }
  double c(int h) const { return c_.at(static_cast<std::size_t>(h - 1)); }

  // sigma_{s,a}; requires a tree state s and a not in s.
  double sigma(const StateId& s, Action a) const;
  // mu_a(s) for leaf states, a != a*, a not in s.
  double leaf_mean(const StateId& s, Action a) const;
  // g(s, a); deterministic.
  StateId transition(const StateId& s, Action a) const;
  // <phi_h(s,a), theta*>.
  double linear_value(int h, const StateId& s, Action a) const;

  // MdpModel
  int horizon() const override { return params_.H; }
  int num_actions() const override { return params_.k; }
  double discount() const override { return params_.discount(); }
  StateId initial_state() const override { return StateId::root(); }
  bool contains(const StateId& s) const override;
  RewardLaw reward_law(const StateId& s, Action a) const override;
  TransitionLaw transition_law(const StateId& s, Action a) const override;
  // The full stage-h state space {f_h} U {duplicate-free sequences of
  // length h-1}; it does not depend on a*.
  std::vector<StateId> stage_states(int h, std::size_t cap) const override;
  std::size_t stage_size_hint(int h) const override;

  // FeatureMap: phi_h(s, a), scaled by alpha^{-h+1} when discounted and zero
  // beyond stage H.
  int dimension() const override { return params_.d; }
  Eigen::VectorXd phi(int h, const StateId& s, Action a) const override;

  std::size_t sigma_cache_size() const;

 private:
  struct SigmaMemo;

  HardParams params_;
  VectorFamily vectors_;
  std::optional<Action> a_star_;
  SigmaMode sigma_mode_;
  std::vector<double> c_;
  Eigen::VectorXd theta_star_;
  std::shared_ptr<SigmaMemo> memo_;
};

// Relabels the actions of a state by perm (perm[a-1] is the image of a).
StateId relabel(const StateId& s, const std::vector<Action>& perm);

// Structural range checks over every state of the instance.
struct RangeReport {
  double sigma_min = 1.0;
  double sigma_max = 1.0;
  double leaf_mean_min = 0.0;
  double leaf_mean_max = 0.0;
  double reward_min = 0.0;
  double reward_max = 0.0;
  double linear_value_max = 0.0;   // max <phi'_h(s,a), theta*> over all triples
  bool optimal_reward_monotone = true;  // r(s, a*) decreasing in level
  std::size_t sigma_violations = 0;
  std::size_t leaf_mean_violations = 0;
  std::size_t reward_violations = 0;
  std::size_t value_bound_violations = 0;
  std::size_t pairs_checked = 0;

  bool ok() const {
    return sigma_violations == 0 && leaf_mean_violations == 0 &&
           reward_violations == 0 && value_bound_violations == 0 &&
           optimal_reward_monotone;
  }
};

RangeReport check_ranges(const HardInstance& instance,
                         std::size_t cap = kDefaultStateCap);

struct SymmetryReport {
  std::size_t permutations = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
  std::string first_violation;

  bool ok() const { return violations == 0; }
};

// For every permutation of [k]: transition and reward laws commute with the
// induced relabeling of states and actions.
SymmetryReport check_symmetry(const HardInstance& instance,
                              std::size_t cap = kDefaultStateCap);

}  // namespace qstar

#endif  // QSTAR_HARD_FAMILY_HPP_
