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

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "qstar/errors.hpp"
#include "qstar/exact_oracle.hpp"
#include "qstar/hard_family.hpp"
#include "qstar/jl_vectors.hpp"
#include "qstar/rng.hpp"
#include "qstar/tabular_mdp.hpp"

using namespace qstar;

namespace {

HardInstance orthonormal(std::optional<Action> star, int H = 2, int k = 3,
                         HorizonMode mode = HorizonMode::kFixed, double alpha = 1.0) {
  return HardInstance(desk_params(k + 1, H, 0.25, k, mode, alpha),
                      orthonormal_family(k, k, 0.25), star);
}

// Random stochastic policy frozen into a table over the enumerated states.
StagePolicy random_policy(const StateSpace& space, int k, RngStream& rng) {
  auto table = std::make_shared<std::map<std::pair<int, StateId>, std::vector<double>>>();
  for (int h = 1; h <= space.horizon(); ++h) {
    for (const StateId& s : space.states(h)) {
      std::vector<double> p(static_cast<std::size_t>(k));
      double total = 0.0;
      for (double& x : p) {
        // Sparse-ish: some actions get no mass.
        x = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
        total += x;
      }
      if (total == 0.0) {
        p[0] = 1.0;
        total = 1.0;
      }
      for (double& x : p) x /= total;
      (*table)[{h, s}] = p;
    }
  }
  return StagePolicy(k, [table](int h, const StateId& s) { return table->at({h, s}); });
}

TabularMdp stochastic_mdp(int H, int max_states, int k, RngStream& rng) {
  std::vector<int> sizes{1};
  for (int h = 2; h <= H; ++h) sizes.push_back(rng.uniform_int(1, max_states));
  sizes.push_back(1);
  TabularMdp m(H, k, sizes);
  for (int h = 1; h <= H; ++h) {
    for (int i = 0; i < m.stage_size(h); ++i) {
      for (Action a = 1; a <= k; ++a) {
        m.set_reward(h, i, a, RewardLaw::bernoulli(rng.uniform_int(0, 10) / 10.0));
        const int next = m.stage_size(h + 1);
        const int j1 = rng.uniform_int(0, next - 1);
        const int j2 = rng.uniform_int(0, next - 1);
        const double p = rng.uniform();
        if (j1 == j2) {
          m.set_transition(h, i, a, {{j1, 1.0}});
        } else {
          m.set_transition(h, i, a, {{j1, p}, {j2, 1.0 - p}});
        }
      }
    }
  }
  return m;
}

}  // namespace

TEST_CASE("one-state two-action bandit") {
  TabularMdp m(1, 2, {1, 1});
  m.set_reward(1, 0, 1, RewardLaw::point(1.0));
  m.set_reward(1, 0, 2, RewardLaw::point(0.0));
  const ValueTables t = solve_backward(m);
  CHECK(t.v(1, m.initial_state()) == 1.0);
  CHECK(t.gap(1, m.initial_state(), 2) == 1.0);
  CHECK(t.v(2, StateId::node(2, 0)) == 0.0);
}

TEST_CASE("null model has zero values") {
  const HardInstance m = orthonormal(std::nullopt, 3, 3);
  const ValueTables t = solve_backward(m);
  for (int h = 1; h <= 4; ++h) CHECK(t.v_stage(h).cwiseAbs().maxCoeff() == 0.0);
  const PolicyValues pv = policy_value(m, t, StagePolicy::uniform(3));
  CHECK(pv.v(1, StateId::root()) == 0.0);
}

TEST_CASE("hard instance optimal values and gaps") {
  const HardInstance m = orthonormal(2);
  const ValueTables t = solve_backward(m);
  CHECK(t.q(1, StateId::root(), 2) == doctest::Approx(59.0 / 108.0).epsilon(1e-14));
  CHECK(bellman_residual(m, t) <= 1e-12);
  const RealizabilityReport r = check_realizability(m, t);
  CHECK(r.max_residual <= 1e-9);
  const RootGapReport g = root_gaps(m, t);
  CHECK(g.min_gap == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(g.min_formula_gap == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const auto reachable = reachable_states(m, t.space());
  for (int h = 1; h <= 2; ++h) {
    const auto& states = t.space().states(h);
    for (std::size_t i = 0; i < states.size(); ++i) {
      CHECK(reachable[static_cast<std::size_t>(h)][i] == !states[i].contains(2));
      if (states[i].is_tree() && !states[i].contains(2)) CHECK(std::abs(t.gap(h, states[i], 2)) <= 1e-12);
    }
  }
}

TEST_CASE("states holding a* are skipped by the realizability check") {
  const HardInstance m = orthonormal(3, 3, 3);
  const ValueTables t = solve_backward(m);
  CHECK(check_realizability(m, t).max_residual <= 1e-9);
  // The enumerated but unreachable state (3) does not satisfy the identity.
  const StateId s = StateId::tree({3});
  CHECK(std::abs(t.q(2, s, 1) - m.linear_value(2, s, 1)) > 1e-3);
}

TEST_CASE("perturbed theta shows up in the realizability residual") {
  const HardInstance m = orthonormal(1);
  const ValueTables t = solve_backward(m);
  Eigen::VectorXd theta = m.theta_star();
  theta(0) += 1e-3;
  const RealizabilityReport r = check_realizability(m, m, theta, t);
  CHECK(r.max_residual == doctest::Approx(1e-3 * m.c(1)).epsilon(1e-9));
}

TEST_CASE("discounted variant is realizable") {
  for (double alpha : {2.0 / 3.0, 0.9}) {
    const HardInstance m = orthonormal(3, 3, 3, HorizonMode::kDiscounted, alpha);
    const ValueTables t = solve_backward(m);
    CHECK(check_realizability(m, t).max_residual <= 1e-9);
    CHECK(check_ranges(m).ok());
  }
}

TEST_CASE("policy values and Monte Carlo agree") {
  const HardInstance m = orthonormal(1);
  const ValueTables t = solve_backward(m);
  const StagePolicy uniform = StagePolicy::uniform(3);
  const PolicyValues pv = policy_value(m, t, uniform);
  RngStream rng(2024);
  const MonteCarloEstimate mc = monte_carlo_value(m, uniform, 100000, rng);
  CHECK(std::abs(mc.mean - pv.v(1, StateId::root())) <= 3.0 * mc.std_error);
  const PolicyValues opt = policy_value(m, t, t.greedy_policy());
  CHECK(opt.v(1, StateId::root()) == doctest::Approx(t.v(1, StateId::root())));
}

TEST_CASE("suboptimality") {
  const HardInstance m = orthonormal(1);
  const ValueTables t = solve_backward(m);
  CHECK(suboptimality(m, t, t.greedy_policy()).delta_pi == 0.0);
  const StagePolicy avoid = StagePolicy::deterministic(3, [](int, const StateId& s) {
    for (Action a = 2; a <= 3; ++a) {
      if (!s.contains(a)) return a;
    }
    return 2;
  });
  CHECK(suboptimality(m, t, avoid).delta_pi >= 0.25);
}

TEST_CASE("suboptimality matches brute force over deterministic policies") {
  RngStream rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    TabularMdp m(2, 2, {1, 2, 1});
    for (int h = 1; h <= 2; ++h) {
      for (int i = 0; i < m.stage_size(h); ++i) {
        for (Action a = 1; a <= 2; ++a) {
          m.set_reward(h, i, a, RewardLaw::point(rng.uniform_int(0, 10) / 10.0));
          if (h == 1) m.set_transition(h, i, a, {{rng.uniform_int(0, 1), 1.0}});
        }
      }
    }
    const ValueTables t = solve_backward(m);
    const std::vector<StateId> states{StateId::node(1, 0), StateId::node(2, 0), StateId::node(2, 1)};
    std::map<StateId, double> best;
    for (int mask = 0; mask < 8; ++mask) {
      const StagePolicy det = StagePolicy::deterministic(2, [mask, states](int, const StateId& s) {
        const auto idx = std::find(states.begin(), states.end(), s) - states.begin();
        return ((mask >> idx) & 1) + 1;
      });
      const PolicyValues pv = policy_value(m, t, det);
      for (const StateId& s : states) {
        const double v = pv.v(s.level(), s);
        if (!best.count(s) || v > best[s]) best[s] = v;
      }
    }
    const StagePolicy pi = random_policy(t.space(), 2, rng);
    const PolicyValues pv = policy_value(m, t, pi);
    double brute = 0.0;
    for (const StateId& s : states) brute = std::max(brute, best[s] - pv.v(s.level(), s));
    CHECK(suboptimality(m, t, pi).delta_pi == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("transition soundness") {
  TabularMdp m(1, 4, {1, 1});
  m.set_reward(1, 0, 1, RewardLaw::point(1.0));
  m.set_reward(1, 0, 2, RewardLaw::point(1.0));
  m.set_reward(1, 0, 3, RewardLaw::point(1.0));
  m.set_reward(1, 0, 4, RewardLaw::point(0.0));
  const ValueTables t = solve_backward(m);
  CHECK(check_transition_soundness(t, StagePolicy::uniform(4), 0.5).worst_mass == 0.25);
  CHECK(check_transition_soundness(t, t.greedy_policy(), 0.5).worst_mass == 0.0);
  CHECK(check_transition_soundness(t, StagePolicy::uniform(4), 2.0).worst_mass == 0.0);
}

TEST_CASE("soundness conversion holds on random MDPs") {
  RngStream rng(404);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int H = rng.uniform_int(1, 3);
    const int k = rng.uniform_int(2, 3);
    const TabularMdp m = trial % 2 == 0 ? random_tabular_mdp(H, 4, k, rng)
                                        : stochastic_mdp(H, 4, k, rng);
    const ValueTables t = solve_backward(m);
    const StagePolicy pi = random_policy(t.space(), k, rng);
    const double delta = 0.05 + 0.5 * rng.uniform();
    const double zeta = 0.01 + 0.99 * rng.uniform();
    const SoundnessConversion c = prop1_check(m, t, pi, delta, zeta);
    if (!c.first_holds || !c.second_holds) ++violations;
  }
  CHECK(violations == 0);
  const HardInstance null = orthonormal(std::nullopt);
  const ValueTables nt = solve_backward(null);
  const SoundnessConversion c = prop1_check(null, nt, StagePolicy::uniform(3), 0.1, 0.2);
  CHECK(c.delta_pi == 0.0);
  CHECK(c.first_holds);
  CHECK(c.second_holds);
  CHECK_THROWS_AS(prop1_check(null, nt, StagePolicy::uniform(3), 0.1, 0.0), ParameterError);
}

TEST_CASE("greedy error bound holds under perturbations") {
  RngStream rng(505);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int H = rng.uniform_int(1, 3);
    const int k = rng.uniform_int(2, 3);
    const TabularMdp m = trial % 2 == 0 ? random_tabular_mdp(H, 4, k, rng)
                                        : stochastic_mdp(H, 4, k, rng);
    const ValueTables t = solve_backward(m);
    const double scale = rng.uniform();
    const std::uint64_t salt = rng();
    const StageActionFn f = [&t, scale, salt](int h, const StateId& s, Action a) {
      const std::uint64_t z = splitmix64(salt ^ (StateIdHash{}(s) * 31 + static_cast<std::uint64_t>(h * 7 + a)));
      const double noise = (static_cast<double>(z >> 11) * 0x1.0p-53 - 0.5) * scale;
      return t.q(h, s, a) + noise;
    };
    if (!lemma8_check(m, t, f).holds) ++violations;
  }
  CHECK(violations == 0);

  const HardInstance hard = orthonormal(1);
  const ValueTables ht = solve_backward(hard);
  const GreedyErrorCheck exact = lemma8_check(hard, ht, [&ht](int h, const StateId& s, Action a) {
    return ht.q(h, s, a);
  });
  CHECK(exact.lhs == 0.0);
  const GreedyErrorCheck zero = lemma8_check(hard, ht, [](int, const StateId&, Action) { return 0.0; });
  CHECK(zero.holds);
  CHECK(zero.rhs - zero.lhs >= 0.0);
}

TEST_CASE("likelihood floor") {
  const HardInstance m = orthonormal(1);
  const LikelihoodFloor f = likelihood_floor_check(m, 1);
  CHECK(f.min_ratio == doctest::Approx(1.0 - 2.0 / 27.0).epsilon(1e-14));
  CHECK(f.holds);
  const HardInstance wide = orthonormal(1, 2, 4);
  const auto n = n_choice(wide.params());
  REQUIRE(n >= 1);
  const LikelihoodFloor g = likelihood_floor_check(wide, n);
  CHECK(g.floor > 0.75);
  CHECK(g.holds);
}

TEST_CASE("tables export as CSV") {
  const HardInstance m = orthonormal(1);
  std::ostringstream out;
  write_tables_csv(out, solve_backward(m));
  const std::string text = out.str();
  CHECK(text.rfind("h,state,action,q,v,gap\n", 0) == 0);
  CHECK(text.find("\n1,root,1,") != std::string::npos);
  CHECK(text.find(",f2,") != std::string::npos);
}

TEST_CASE("state cap is enforced") {
  const HardInstance m = orthonormal(1, 3, 3);
  CHECK_THROWS_AS(solve_backward(m, 3), SizeError);
}
