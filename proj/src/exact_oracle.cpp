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

#include "qstar/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "qstar/errors.hpp"
#include "qstar/simulator.hpp"

namespace qstar {
namespace {

constexpr double kTol = 1e-12;

// Expected value of v over the transition law of (s, a); next states must
// lie in stage h+1 of the space.
double expected_next(const MdpModel& model, const StateSpace& space,
                     const Eigen::VectorXd& v_next, int h, const StateId& s, Action a) {
  double total = 0.0;
  for (const auto& atom : model.transition_law(s, a)) {
    if (atom.prob == 0.0) continue;
    const int j = space.find(h + 1, atom.next);
    if (j < 0) {
      throw EvaluationError("transition from " + s.to_string() + " leaves the stage-" +
                            std::to_string(h + 1) + " state set (" +
                            atom.next.to_string() + ")");
    }
    total += atom.prob * v_next(j);
  }
  return total;
}

double mass_with_gap_at_least(const ValueTables& tables, const StagePolicy& policy,
                              double threshold, StageStateLocation* where) {
  double worst = 0.0;
  for (int h = 1; h <= tables.horizon(); ++h) {
    for (const StateId& s : tables.space().states(h)) {
      const std::vector<double> probs = policy.distribution(h, s);
      double mass = 0.0;
      for (Action a = 1; a <= tables.num_actions(); ++a) {
        if (tables.gap(h, s, a) >= threshold - kTol) {
          mass += probs[static_cast<std::size_t>(a - 1)];
        }
      }
      if (mass > worst) {
        worst = mass;
        if (where) *where = {h, s};
      }
    }
  }
  return worst;
}

}  // namespace

StateSpace::StateSpace(const MdpModel& model, std::size_t cap)
    : stages_(enumerate_stages(model, cap)) {
  index_.resize(stages_.size());
  for (std::size_t h = 1; h < stages_.size(); ++h) {
    for (std::size_t i = 0; i < stages_[h].size(); ++i) {
      index_[h].emplace(stages_[h][i], static_cast<int>(i));
    }
  }
}

int StateSpace::find(int h, const StateId& s) const {
  if (h < 1 || static_cast<std::size_t>(h) >= index_.size()) return -1;
  const auto& idx = index_[static_cast<std::size_t>(h)];
  const auto it = idx.find(s);
  return it == idx.end() ? -1 : it->second;
}

std::size_t StateSpace::total_size() const {
  std::size_t total = 0;
  for (const auto& stage : stages_) total += stage.size();
  return total;
}

double ValueTables::q(int h, const StateId& s, Action a) const {
  const int i = space_->find(h, s);
  if (i < 0 || h > horizon()) {
    throw EvaluationError("no q value at stage " + std::to_string(h) + ", state " +
                          s.to_string());
  }
  return q_[static_cast<std::size_t>(h)](i, a - 1);
}

double ValueTables::v(int h, const StateId& s) const {
  const int i = space_->find(h, s);
  if (i < 0) {
    throw EvaluationError("no v value at stage " + std::to_string(h) + ", state " +
                          s.to_string());
  }
  return v_[static_cast<std::size_t>(h)](i);
}

StagePolicy ValueTables::greedy_policy() const {
  auto space = space_;
  auto q = q_;
  return StagePolicy::greedy(num_actions_, [space, q](int h, const StateId& s, Action a) {
    const int i = space->find(h, s);
    if (i < 0) return 0.0;
    return q[static_cast<std::size_t>(h)](i, a - 1);
  });
}

ValueTables solve_backward(const MdpModel& model, std::shared_ptr<const StateSpace> space) {
  const int H = model.horizon();
  const int k = model.num_actions();
  const double alpha = model.discount();
  ValueTables tables;
  tables.num_actions_ = k;
  tables.q_.resize(static_cast<std::size_t>(H) + 2);
  tables.v_.resize(static_cast<std::size_t>(H) + 2);
  tables.v_[static_cast<std::size_t>(H) + 1] =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space->states(H + 1).size()));
  for (int h = H; h >= 1; --h) {
    const auto& states = space->states(h);
    const auto n = static_cast<Eigen::Index>(states.size());
    Eigen::MatrixXd q(n, k);
    Eigen::VectorXd v(n);
    const Eigen::VectorXd& v_next = tables.v_[static_cast<std::size_t>(h) + 1];
    for (Eigen::Index i = 0; i < n; ++i) {
      const StateId& s = states[static_cast<std::size_t>(i)];
      for (Action a = 1; a <= k; ++a) {
        q(i, a - 1) = model.reward_law(s, a).mean() +
                      alpha * expected_next(model, *space, v_next, h, s, a);
      }
      v(i) = q.row(i).maxCoeff();
    }
    tables.q_[static_cast<std::size_t>(h)] = std::move(q);
    tables.v_[static_cast<std::size_t>(h)] = std::move(v);
  }
  tables.space_ = std::move(space);
  return tables;
}

ValueTables solve_backward(const MdpModel& model, std::size_t cap) {
  return solve_backward(model, std::make_shared<const StateSpace>(model, cap));
}

double bellman_residual(const MdpModel& model, const ValueTables& tables) {
  const StateSpace& space = tables.space();
  double worst = 0.0;
  for (int h = 1; h <= tables.horizon(); ++h) {
    const Eigen::VectorXd& v_next = tables.v_stage(h + 1);
    for (const StateId& s : space.states(h)) {
      double best = -std::numeric_limits<double>::infinity();
      for (Action a = 1; a <= tables.num_actions(); ++a) {
        const double backup = model.reward_law(s, a).mean() +
                              model.discount() * expected_next(model, space, v_next, h, s, a);
        worst = std::max(worst, std::abs(tables.q(h, s, a) - backup));
        best = std::max(best, tables.q(h, s, a));
      }
      worst = std::max(worst, std::abs(tables.v(h, s) - best));
    }
  }
  worst = std::max(worst, tables.v_stage(tables.horizon() + 1).cwiseAbs().maxCoeff());
  return worst;
}

double PolicyValues::v(int h, const StateId& s) const {
  const int i = space_->find(h, s);
  if (i < 0) throw EvaluationError("no policy value at " + s.to_string());
  return v_[static_cast<std::size_t>(h)](i);
}

PolicyValues policy_value(const MdpModel& model, std::shared_ptr<const StateSpace> space,
                          const StagePolicy& policy) {
  const int H = model.horizon();
  const int k = model.num_actions();
  PolicyValues out;
  out.v_.resize(static_cast<std::size_t>(H) + 2);
  out.v_[static_cast<std::size_t>(H) + 1] =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space->states(H + 1).size()));
  for (int h = H; h >= 1; --h) {
    const auto& states = space->states(h);
    Eigen::VectorXd v(static_cast<Eigen::Index>(states.size()));
    const Eigen::VectorXd& v_next = out.v_[static_cast<std::size_t>(h) + 1];
    for (std::size_t i = 0; i < states.size(); ++i) {
      const std::vector<double> probs = policy.distribution(h, states[i]);
      double value = 0.0;
      for (Action a = 1; a <= k; ++a) {
        const double p = probs[static_cast<std::size_t>(a - 1)];
        if (p == 0.0) continue;
        value += p * (model.reward_law(states[i], a).mean() +
                      model.discount() *
                          expected_next(model, *space, v_next, h, states[i], a));
      }
      v(static_cast<Eigen::Index>(i)) = value;
    }
    out.v_[static_cast<std::size_t>(h)] = std::move(v);
  }
  out.space_ = std::move(space);
  return out;
}

PolicyValues policy_value(const MdpModel& model, const ValueTables& tables,
                          const StagePolicy& policy) {
  return policy_value(model, tables.shared_space(), policy);
}

Suboptimality suboptimality(const MdpModel& model, const ValueTables& tables,
                            const StagePolicy& policy) {
  const PolicyValues values = policy_value(model, tables, policy);
  Suboptimality out;
  out.delta_pi = -std::numeric_limits<double>::infinity();
  for (int h = 1; h <= tables.horizon(); ++h) {
    const auto& states = tables.space().states(h);
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      const double diff = tables.v_stage(h)(idx) - values.v_stage(h)(idx);
      if (diff > out.delta_pi) {
        out.delta_pi = diff;
        out.where = {h, states[i]};
      }
    }
  }
  // v* >= v^pi exactly; clamp round-off.
  out.delta_pi = std::max(0.0, out.delta_pi);
  return out;
}

TransitionSoundness check_transition_soundness(const ValueTables& tables,
                                               const StagePolicy& policy, double delta) {
  TransitionSoundness out;
  out.worst_mass = mass_with_gap_at_least(tables, policy, delta, &out.where);
  return out;
}

SoundnessConversion prop1_check(const MdpModel& model, const ValueTables& tables,
                                const StagePolicy& policy, double delta, double zeta) {
  if (!(zeta > 0.0 && zeta <= 1.0)) throw ParameterError("zeta must lie in (0, 1]");
  const double H = tables.horizon();
  SoundnessConversion out;
  out.delta_pi = suboptimality(model, tables, policy).delta_pi;
  out.mass_at_delta = mass_with_gap_at_least(tables, policy, delta, nullptr);
  out.mass_at_delta_over_zeta = mass_with_gap_at_least(tables, policy, delta / zeta, nullptr);
  if (out.mass_at_delta <= zeta) {
    out.first_holds = out.delta_pi <= H * delta + H * (H + 1.0) * zeta / 2.0 + 1e-9;
  }
  if (out.delta_pi <= delta) {
    out.second_holds = out.mass_at_delta_over_zeta <= zeta + kTol;
  }
  return out;
}

GreedyErrorCheck lemma8_check(const MdpModel& model, const ValueTables& tables,
                              const StageActionFn& f) {
  const int k = tables.num_actions();
  const StagePolicy greedy = StagePolicy::greedy(k, f);
  const PolicyValues values = policy_value(model, tables, greedy);
  GreedyErrorCheck out;
  double sum = 0.0;
  for (int h = 1; h <= tables.horizon(); ++h) {
    double stage_err = 0.0;
    const auto& states = tables.space().states(h);
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      out.lhs = std::max(out.lhs, std::abs(tables.v_stage(h)(idx) - values.v_stage(h)(idx)));
      for (Action a = 1; a <= k; ++a) {
        stage_err = std::max(stage_err,
                             std::abs(tables.q_stage(h)(idx, a - 1) - f(h, states[i], a)));
      }
    }
    sum += stage_err;
    if (h == 1) out.first_stage_rhs = 2.0 * tables.horizon() * stage_err;
  }
  out.rhs = 2.0 * sum;
  out.holds = out.lhs <= out.rhs + kTol;
  return out;
}

std::vector<std::vector<bool>> reachable_states(const MdpModel& model, const StateSpace& space) {
  const int last = space.horizon() + 1;
  std::vector<std::vector<bool>> out(static_cast<std::size_t>(last) + 1);
  for (int h = 1; h <= last; ++h) out[static_cast<std::size_t>(h)].assign(space.states(h).size(), h == 1);
  for (int h = 1; h < last; ++h) {
    const auto& states = space.states(h);
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (!out[static_cast<std::size_t>(h)][i]) continue;
      for (Action a = 1; a <= model.num_actions(); ++a) {
        for (const auto& atom : model.transition_law(states[i], a)) {
          if (atom.prob <= 0.0) continue;
          const int j = space.find(h + 1, atom.next);
          if (j >= 0) out[static_cast<std::size_t>(h) + 1][static_cast<std::size_t>(j)] = true;
        }
      }
    }
  }
  return out;
}

RealizabilityReport check_realizability(const MdpModel& model, const FeatureMap& features,
                                        const Eigen::VectorXd& theta,
                                        const ValueTables& tables) {
  RealizabilityReport out;
  out.max_residual = -1.0;
  const auto reachable = reachable_states(model, tables.space());
  for (int h = 1; h <= tables.horizon(); ++h) {
    const auto& states = tables.space().states(h);
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (!reachable[static_cast<std::size_t>(h)][i]) continue;
      for (Action a = 1; a <= tables.num_actions(); ++a) {
        const double residual =
            std::abs(tables.q_stage(h)(static_cast<Eigen::Index>(i), a - 1) -
                     features.phi(h, states[i], a).dot(theta));
        if (residual > out.max_residual) {
          out.max_residual = residual;
          out.h = h;
          out.s = states[i];
          out.a = a;
        }
      }
    }
  }
  out.max_residual = std::max(0.0, out.max_residual);
  return out;
}

RealizabilityReport check_realizability(const HardInstance& instance,
                                        const ValueTables& tables) {
  return check_realizability(instance, instance, instance.theta_star(), tables);
}

RootGapReport root_gaps(const HardInstance& instance, const ValueTables& tables) {
  if (instance.is_null_model()) throw ParameterError("M_0 has no special action");
  const HardParams& p = instance.params();
  const Action star = *instance.a_star();
  RootGapReport out;
  out.min_gap = std::numeric_limits<double>::infinity();
  out.min_formula_gap = std::numeric_limits<double>::infinity();
  const StateId root = StateId::root();
  for (Action a = 1; a <= p.k; ++a) {
    if (a == star) continue;
    const double gap = tables.gap(1, root, a);
    if (gap < out.min_gap) {
      out.min_gap = gap;
      out.argmin = a;
    }
    const double formula = p.epsilon * std::pow(p.x, p.H) *
                           (1.0 - instance.vectors()[star].dot(instance.vectors()[a]));
    out.min_formula_gap = std::min(out.min_formula_gap, formula);
  }
  return out;
}

LikelihoodFloor likelihood_floor_check(const HardInstance& instance, std::int64_t n,
                                       std::size_t cap) {
  if (instance.is_null_model()) throw ParameterError("likelihood floor needs a* to be set");
  if (n < 1) throw ParameterError("likelihood floor needs n >= 1");
  const HardParams& p = instance.params();
  const Action star = *instance.a_star();
  const HardInstance null_model(p, instance.vectors(), std::nullopt);
  LikelihoodFloor out;
  out.n = n;
  for (int h = 1; h <= p.H; ++h) {
    for (const StateId& s : null_model.stage_states(h, cap)) {
      for (Action a = 1; a <= p.k; ++a) {
        if (a == star) continue;
        const RewardLaw law0 = null_model.reward_law(s, a);
        const RewardLaw law = instance.reward_law(s, a);
        for (const auto& atom : law0.atoms()) {
          const double p0 = law0.prob_of(atom.value);
          if (p0 <= 0.0) continue;
          const double ratio = law.prob_of(atom.value) / p0;
          if (ratio < out.min_ratio) {
            out.min_ratio = ratio;
            out.where = s;
            out.where_action = a;
          }
        }
      }
    }
  }
  const double eps = p.leaf_mean_bound();
  out.floor = std::pow(out.min_ratio, static_cast<double>(n));
  out.bound = std::pow(1.0 - eps, static_cast<double>(n));
  out.holds = out.min_ratio >= 1.0 - eps;
  return out;
}

MonteCarloEstimate monte_carlo_value(const MdpModel& model, const StagePolicy& policy,
                                     std::int64_t episodes, RngStream& rng) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::int64_t e = 0; e < episodes; ++e) {
    const Trajectory t = run_policy(model, policy, rng);
    double ret = 0.0;
    double scale = 1.0;
    for (double r : t.rewards) {
      ret += scale * r;
      scale *= model.discount();
    }
    sum += ret;
    sum_sq += ret * ret;
  }
  MonteCarloEstimate out;
  out.episodes = episodes;
  out.mean = sum / static_cast<double>(episodes);
  const double var = std::max(0.0, sum_sq / static_cast<double>(episodes) - out.mean * out.mean);
  out.std_error = std::sqrt(var / static_cast<double>(episodes));
  return out;
}

void write_tables_csv(std::ostream& out, const ValueTables& tables) {
  out << "h,state,action,q,v,gap\n" << std::setprecision(17);
  for (int h = 1; h <= tables.horizon(); ++h) {
    for (const StateId& s : tables.space().states(h)) {
      for (Action a = 1; a <= tables.num_actions(); ++a) {
        out << h << ',' << s.to_string() << ',' << a << ',' << tables.q(h, s, a) << ','
            << tables.v(h, s) << ',' << tables.gap(h, s, a) << '\n';
      }
    }
  }
}

}  // namespace qstar
