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

#include "qstar/hard_family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "qstar/errors.hpp"

namespace qstar {
namespace {

constexpr double kTol = 1e-12;

void finish_params(HardParams& p) {
  p.x = (1.0 - p.gamma) / (2.0 * p.gamma);
  p.epsilon = std::pow(p.x, -p.H) / 3.0;
}

void check_common(int H, HorizonMode mode, double alpha) {
  if (H < 1) throw ParameterError("H must be >= 1");
  if (mode == HorizonMode::kDiscounted && !(alpha >= 2.0 / 3.0 && alpha < 1.0)) {
    throw ParameterError("discount alpha must lie in [2/3, 1), got " +
                         std::to_string(alpha));
  }
}

// Falling factorial k (k-1) ... (k-m+1), saturating.
std::size_t falling(int k, int m) {
  std::size_t out = 1;
  for (int i = 0; i < m; ++i) {
    const auto f = static_cast<std::size_t>(std::max(0, k - i));
    if (f == 0) return 0;
    if (out > std::numeric_limits<std::size_t>::max() / f) {
      return std::numeric_limits<std::size_t>::max();
    }
    out *= f;
  }
  return out;
}

struct ActionsHash {
  std::size_t operator()(const std::vector<Action>& v) const noexcept {
    std::size_t h = v.size();
    for (Action a : v) h ^= static_cast<std::size_t>(a) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

}  // namespace

double HardParams::leaf_mean_bound() const {
  return mode == HorizonMode::kDiscounted ? std::pow(alpha, -(H - 1)) * epsilon : epsilon;
}

HardParams derive_params(int d, int H, double eta, HorizonMode mode, double alpha) {
  if (d < 18) throw ParameterError("d must be >= 18 in paper mode, got " + std::to_string(d));
  check_common(H, mode, alpha);
  const double eta_max = 0.5 - 2.0 / std::log2(static_cast<double>(d - 1));
  if (!(eta > 0.0)) throw ParameterError("eta must satisfy 0 < eta");
  if (eta > eta_max + kTol) {
    std::ostringstream msg;
    msg << "eta must satisfy eta <= 1/2 - 2/log2(d-1) = " << eta_max << ", got " << eta;
    throw ParameterError(msg.str());
  }
  HardParams p;
  p.d = d;
  p.H = H;
  p.eta = eta;
  p.mode = mode;
  p.alpha = mode == HorizonMode::kDiscounted ? alpha : 1.0;
  p.paper_mode = true;
  p.gamma = std::pow(static_cast<double>(d - 1), -0.5 + eta);
  // At the upper end of the eta range gamma equals 1/4 up to round-off.
  if (p.gamma > 0.25 && p.gamma <= 0.25 + kTol) p.gamma = 0.25;
  if (p.gamma > 0.25) throw ParameterError("gamma exceeds 1/4");
  const double k = std::floor(std::exp(std::pow(static_cast<double>(d - 1), 2.0 * eta) / 8.0));
  if (k > static_cast<double>(std::numeric_limits<int>::max())) {
    throw ParameterError("k = floor(exp((d-1)^{2 eta}/8)) does not fit; use override_k");
  }
  p.k = static_cast<int>(k);
  finish_params(p);
  return p;
}

HardParams desk_params(int d, int H, double gamma, int k, HorizonMode mode, double alpha) {
  if (d < 2) throw ParameterError("d must be >= 2");
  if (k < 1) throw ParameterError("k must be >= 1");
  if (!(gamma > 0.0 && gamma <= 0.25)) {
    throw ParameterError("gamma must lie in (0, 1/4], got " + std::to_string(gamma));
  }
  check_common(H, mode, alpha);
  HardParams p;
  p.d = d;
  p.H = H;
  p.gamma = gamma;
  p.k = k;
  p.mode = mode;
  p.alpha = mode == HorizonMode::kDiscounted ? alpha : 1.0;
  p.eta = d > 2 ? 0.5 + std::log(gamma) / std::log(static_cast<double>(d - 1))
                : std::numeric_limits<double>::quiet_NaN();
  finish_params(p);
  return p;
}

HardParams override_k(const HardParams& params, int k, const VectorFamily& family) {
  if (family.size() != k) {
    throw ParameterError("family holds " + std::to_string(family.size()) +
                         " vectors, expected k = " + std::to_string(k));
  }
  if (family.dim != params.d - 1) {
    throw ParameterError("family dimension " + std::to_string(family.dim) +
                         " must equal d-1 = " + std::to_string(params.d - 1));
  }
  const FamilyReport report = verify_family(family);
  if (!report.passes(params.gamma)) {
    std::ostringstream msg;
    msg << "family rejected: max overlap " << report.max_overlap << " (gamma "
        << params.gamma << "), max norm deviation " << report.max_norm_dev;
    throw ParameterError(msg.str());
  }
  HardParams p = params;
  p.k = k;
  p.paper_mode = false;
  return p;
}

HardParams override_epsilon(const HardParams& params, double epsilon) {
  const double ceiling = std::pow(params.x, -params.H) / 3.0;
  if (!(epsilon > 0.0) || epsilon > ceiling + kTol) {
    throw ParameterError("epsilon must lie in (0, x^{-H}/3]");
  }
  HardParams p = params;
  p.epsilon = epsilon;
  return p;
}

double c_of(int h, const HardParams& params) {
  if (h < 1 || h > params.H) throw ParameterError("c_h needs 1 <= h <= H");
  double sum = 0.0;
  for (int l = 1; l <= params.H - h; ++l) sum += std::pow(params.x, l);
  return 0.5 + 0.5 * (1.0 + params.gamma) * sum;
}

std::int64_t n_choice(const HardParams& params) {
  const double by_k = params.k / 4.0;
  const double by_eps = (1.0 / params.epsilon - 1.0) / 3.5;
  return static_cast<std::int64_t>(std::floor(std::min(by_k, by_eps)));
}

struct HardInstance::SigmaMemo {
  std::shared_mutex mutex;
  std::unordered_map<std::vector<Action>, double, ActionsHash> values;
};

HardInstance::HardInstance(HardParams params, VectorFamily vectors,
                           std::optional<Action> a_star, SigmaMode sigma_mode)
    : params_(std::move(params)),
      vectors_(std::move(vectors)),
      a_star_(a_star),
      sigma_mode_(sigma_mode),
      memo_(std::make_shared<SigmaMemo>()) {
  if (vectors_.size() != params_.k || vectors_.dim != params_.d - 1) {
    throw ParameterError("vector family must hold k vectors of dimension d-1");
  }
  if (!verify_family(vectors_).passes(params_.gamma)) {
    throw ParameterError("vector family violates the overlap bound gamma");
  }
  if (a_star_ && (*a_star_ < 1 || *a_star_ > params_.k)) {
    throw ParameterError("a* must lie in 1..k");
  }
  for (int h = 1; h <= params_.H; ++h) c_.push_back(c_of(h, params_));
  theta_star_ = Eigen::VectorXd::Zero(params_.d);
  if (a_star_) {
    theta_star_(0) = params_.epsilon;
    theta_star_.tail(params_.d - 1) = params_.epsilon * vectors_[*a_star_];
  }
}

double HardInstance::sigma(const StateId& s, Action a) const {
  if (!s.is_tree()) throw ParameterError("sigma is defined on tree states only");
  if (a < 1 || a > params_.k) throw ParameterError("sigma: action out of range");
  if (s.contains(a)) {
    throw ParameterError("sigma contract violation: action " + std::to_string(a) +
                         " already in " + s.to_string());
  }
  if (s.is_root()) return 1.0;
  std::vector<Action> key = s.actions();
  key.push_back(a);
  {
    std::shared_lock lock(memo_->mutex);
    if (auto it = memo_->values.find(key); it != memo_->values.end()) return it->second;
  }
  const double shift = sigma_mode_ == SigmaMode::kExact ? 0.5 * (1.0 + params_.gamma)
                                                         : 0.45 * (1.0 + params_.gamma);
  // sigma_{(),a_1} = 1; sigma_{p b, a'} = sigma_{p,b} x <v_b, v_a'> + shift.
  const auto& seq = s.actions();
  double value = 1.0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Action from = seq[i];
    const Action to = i + 1 < seq.size() ? seq[i + 1] : a;
    value = value * params_.x * vectors_[from].dot(vectors_[to]) + shift;
  }
  std::unique_lock lock(memo_->mutex);
  memo_->values.emplace(std::move(key), value);
  return value;
}

std::size_t HardInstance::sigma_cache_size() const {
  std::shared_lock lock(memo_->mutex);
  return memo_->values.size();
}

double HardInstance::leaf_mean(const StateId& s, Action a) const {
  if (!a_star_) return 0.0;
  const double eps = params_.epsilon;
  const double base = eps * sigma(s, a) * params_.x * vectors_[a].dot(vectors_[*a_star_]) +
                      eps / 2.0;
  return params_.mode == HorizonMode::kDiscounted
             ? std::pow(params_.alpha, -(params_.H - 1)) * base
             : base;
}

bool HardInstance::contains(const StateId& s) const {
  switch (s.kind()) {
    case StateId::Kind::kTree:
      if (s.level() > params_.H) return false;
      return std::all_of(s.actions().begin(), s.actions().end(),
                         [this](Action a) { return a >= 1 && a <= params_.k; });
    case StateId::Kind::kGameOver:
      return s.level() >= 2 && s.level() <= params_.H + 1;
    case StateId::Kind::kNode:
      return false;
  }
  return false;
}

StateId HardInstance::transition(const StateId& s, Action a) const {
  const int level = s.level();
  if (level >= params_.H) return StateId::game_over(params_.H + 1);
  if (s.is_game_over() || (a_star_ && a == *a_star_) || s.contains(a)) {
    return StateId::game_over(level + 1);
  }
  return s.extended(a);
}

Eigen::VectorXd HardInstance::phi(int h, const StateId& s, Action a) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(params_.d);
  if (h < 1) throw ParameterError("phi needs h >= 1");
  if (h > params_.H || !s.is_tree() || s.contains(a)) return out;
  out(0) = c(h);
  out.tail(params_.d - 1) =
      std::pow(params_.x, params_.H - h + 1) * sigma(s, a) * vectors_[a];
  if (params_.mode == HorizonMode::kDiscounted) out *= std::pow(params_.alpha, -(h - 1));
  return out;
}

double HardInstance::linear_value(int h, const StateId& s, Action a) const {
  return phi(h, s, a).dot(theta_star_);
}

RewardLaw HardInstance::reward_law(const StateId& s, Action a) const {
  if (!a_star_ || !s.is_tree()) return RewardLaw::point(0.0);
  if (a == *a_star_) return RewardLaw::point(linear_value(s.level(), s, a));
  if (s.level() == params_.H && !s.contains(a)) {
    return RewardLaw::bernoulli(leaf_mean(s, a));
  }
  return RewardLaw::point(0.0);
}

TransitionLaw HardInstance::transition_law(const StateId& s, Action a) const {
  return {{transition(s, a), 1.0}};
}

std::vector<StateId> HardInstance::stage_states(int h, std::size_t cap) const {
  if (h < 1 || h > params_.H + 1) throw ParameterError("stage out of range");
  const std::size_t hint = stage_size_hint(h);
  if (hint > cap) {
    throw SizeError("state count " + std::to_string(hint) + " exceeds cap " +
                    std::to_string(cap) + " at stage " + std::to_string(h));
  }
  std::vector<StateId> out;
  if (h == params_.H + 1) return {StateId::game_over(h)};
  // Duplicate-free sequences of length h-1, depth first in lexicographic order.
  std::vector<Action> seq;
  std::vector<bool> used(static_cast<std::size_t>(params_.k) + 1, false);
  const int len = h - 1;
  auto recurse = [&](auto&& self) -> void {
    if (static_cast<int>(seq.size()) == len) {
      out.push_back(StateId::tree(seq));
      return;
    }
    for (Action a = 1; a <= params_.k; ++a) {
      if (used[static_cast<std::size_t>(a)]) continue;
      used[static_cast<std::size_t>(a)] = true;
      seq.push_back(a);
      self(self);
      seq.pop_back();
      used[static_cast<std::size_t>(a)] = false;
    }
  };
  recurse(recurse);
  if (h >= 2) out.push_back(StateId::game_over(h));
  return out;
}

std::size_t HardInstance::stage_size_hint(int h) const {
  if (h == 1 || h == params_.H + 1) return 1;
  const std::size_t trees = falling(params_.k, h - 1);
  return trees == std::numeric_limits<std::size_t>::max() ? trees : trees + 1;
}

StateId relabel(const StateId& s, const std::vector<Action>& perm) {
  if (!s.is_tree()) return s;
  std::vector<Action> mapped;
  mapped.reserve(s.actions().size());
  for (Action a : s.actions()) mapped.push_back(perm.at(static_cast<std::size_t>(a - 1)));
  return StateId::tree(std::move(mapped));
}

RangeReport check_ranges(const HardInstance& instance, std::size_t cap) {
  const HardParams& p = instance.params();
  RangeReport report;
  report.sigma_min = std::numeric_limits<double>::infinity();
  report.sigma_max = -std::numeric_limits<double>::infinity();
  report.leaf_mean_min = std::numeric_limits<double>::infinity();
  report.leaf_mean_max = -std::numeric_limits<double>::infinity();
  report.reward_min = std::numeric_limits<double>::infinity();
  report.reward_max = -std::numeric_limits<double>::infinity();
  report.linear_value_max = -std::numeric_limits<double>::infinity();
  const auto a_star = instance.a_star();
  const auto stages = enumerate_stages(instance, cap);
  for (int h = 1; h <= p.H; ++h) {
    for (const StateId& s : stages[static_cast<std::size_t>(h)]) {
      for (Action a = 1; a <= p.k; ++a) {
        ++report.pairs_checked;
        if (s.is_tree() && !s.contains(a)) {
          const double sg = instance.sigma(s, a);
          report.sigma_min = std::min(report.sigma_min, sg);
          report.sigma_max = std::max(report.sigma_max, sg);
          if (sg < p.gamma - kTol || sg > 1.0 + kTol) ++report.sigma_violations;
          if (a_star && a != *a_star && h == p.H) {
            const double mu = instance.leaf_mean(s, a);
            report.leaf_mean_min = std::min(report.leaf_mean_min, mu);
            report.leaf_mean_max = std::max(report.leaf_mean_max, mu);
            if (mu < -kTol || mu > p.leaf_mean_bound() + kTol) ++report.leaf_mean_violations;
          }
        }
        for (const auto& atom : instance.reward_law(s, a).atoms()) {
          if (atom.prob <= 0.0) continue;
          report.reward_min = std::min(report.reward_min, atom.value);
          report.reward_max = std::max(report.reward_max, atom.value);
          if (atom.value < -kTol || atom.value > 1.0 + kTol) ++report.reward_violations;
        }
        const double value = instance.linear_value(h, s, a);
        report.linear_value_max = std::max(report.linear_value_max, value);
        if (value > 1.0 + kTol) ++report.value_bound_violations;
        // The undiscounted a*-reward must not increase along tree edges.
        if (a_star && s.is_tree() && a != *a_star && !s.contains(a) &&
            !s.contains(*a_star) && h < p.H) {
          const double parent =
              std::pow(p.discount(), h - 1) * instance.linear_value(h, s, *a_star);
          const double child = std::pow(p.discount(), h) *
                               instance.linear_value(h + 1, s.extended(a), *a_star);
          if (child > parent + kTol) report.optimal_reward_monotone = false;
        }
      }
    }
  }
  if (report.leaf_mean_min > report.leaf_mean_max) {
    report.leaf_mean_min = report.leaf_mean_max = 0.0;
  }
  if (report.sigma_min > report.sigma_max) report.sigma_min = report.sigma_max = 1.0;
  return report;
}

SymmetryReport check_symmetry(const HardInstance& instance, std::size_t cap) {
  const HardParams& p = instance.params();
  SymmetryReport report;
  const auto stages = enumerate_stages(instance, cap);
  std::vector<Action> perm(static_cast<std::size_t>(p.k));
  std::iota(perm.begin(), perm.end(), 1);
  do {
    ++report.permutations;
    for (int h = 1; h <= p.H; ++h) {
      for (const StateId& s : stages[static_cast<std::size_t>(h)]) {
        const StateId image = relabel(s, perm);
        for (Action a = 1; a <= p.k; ++a) {
          ++report.checks;
          const Action pa = perm[static_cast<std::size_t>(a - 1)];
          const bool same_next =
              instance.transition(image, pa) == relabel(instance.transition(s, a), perm);
          const bool same_reward = instance.reward_law(image, pa) == instance.reward_law(s, a);
          if (!same_next || !same_reward) {
            if (report.violations == 0) {
              report.first_violation = "state " + s.to_string() + ", action " +
                                       std::to_string(a);
            }
            ++report.violations;
          }
        }
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return report;
}

}  // namespace qstar
