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

#include <cmath>

#include "doctest.h"
#include "qstar/errors.hpp"
#include "qstar/exact_oracle.hpp"
#include "qstar/hard_family.hpp"
#include "qstar/jl_vectors.hpp"
#include "qstar/lsvi.hpp"
#include "qstar/tabular_mdp.hpp"

using namespace qstar;

namespace {

std::vector<std::vector<StateId>> stages_of(const MdpModel& m) {
  std::vector<std::vector<StateId>> out(static_cast<std::size_t>(m.horizon()) + 1);
  for (int h = 1; h <= m.horizon(); ++h) out[static_cast<std::size_t>(h)] = m.stage_states(h, 100000);
  return out;
}

HardInstance hard(std::optional<Action> star) {
  return HardInstance(desk_params(4, 2, 0.25, 3), orthonormal_family(3, 3, 0.25), star);
}

}  // namespace

TEST_CASE("sample size") {
  CHECK(sample_size(1, 2, 3, 1.0) == 716);
  const double ratio = static_cast<double>(sample_size(2, 4, 6, 0.125)) /
                       static_cast<double>(sample_size(2, 4, 6, 0.25));
  CHECK(ratio > 4.0);
  CHECK(ratio < 4.6);
  CHECK_THROWS_AS(sample_size(1, 2, 3, 0.0), ParameterError);
}

TEST_CASE("beta") {
  CHECK(beta_of(1000, 2, 5, 0.1).beta == doctest::Approx(0.2058).epsilon(1e-3));
  CHECK(beta_of(4000, 2, 5, 0.1).beta == doctest::Approx(beta_of(1000, 2, 5, 0.1).beta / 2));
  const BetaValue degenerate = beta_of(10, 2, 5, 20.0);
  CHECK(degenerate.beta == 0.0);
  CHECK(degenerate.clamped);
  CHECK_FALSE(beta_of(10, 2, 5, 0.5).clamped);
}

TEST_CASE("error envelope") {
  CHECK(error_envelope(3, 3, 8, 0.1) == doctest::Approx(0.1 * (1.0 + 4.0)));
  RngStream rng(12);
  for (int i = 0; i < 10; ++i) {
    const int H = rng.uniform_int(2, 6);
    const int h = rng.uniform_int(1, H - 1);
    const int d = rng.uniform_int(1, 20);
    const double beta = rng.uniform();
    const double root = 2.0 + std::sqrt(2.0 * d);
    const double lhs = error_envelope(h, H, d, beta) - root * error_envelope(h + 1, H, d, beta);
    CHECK(lhs == doctest::Approx(beta * (1.0 + std::sqrt(2.0 * d))).epsilon(1e-9));
  }
  CHECK(error_envelope(1, 4, 5, 0.0) == 0.0);
}

TEST_CASE("one-step problem with one-hot features") {
  TabularMdp m(1, 2, {1, 1});
  m.set_reward(1, 0, 1, RewardLaw::point(1.0));
  m.set_reward(1, 0, 2, RewardLaw::point(0.0));
  TabularFeatures features(2);
  features.set(1, m.initial_state(), 1, Eigen::Vector2d(1.0, 0.0));
  features.set(1, m.initial_state(), 2, Eigen::Vector2d(0.0, 1.0));
  QueryMeter meter;
  RngStream rng(1);
  Simulator sim(m, meter, rng);
  LsviConfig config;
  config.n = 1;
  const LsviResult result = lsvi_run(sim, features, stages_of(m), 1, config);
  CHECK(result.f(1, m.initial_state(), 1) == doctest::Approx(1.0));
  CHECK(result.f(1, m.initial_state(), 2) == doctest::Approx(0.0));
  const auto dist = greedy_policy(result).distribution(1, m.initial_state());
  CHECK(dist[0] == 1.0);
  CHECK(meter.count() == 2);
}

TEST_CASE("greedy ties go to the lowest action") {
  TabularMdp m(1, 3, {1, 1});
  TabularFeatures features(1);
  QueryMeter meter;
  RngStream rng(1);
  Simulator sim(m, meter, rng);
  const LsviResult result = lsvi_run(sim, features, stages_of(m), 1, LsviConfig{});
  CHECK(result.greedy_policy().distribution(1, m.initial_state())[0] == 1.0);
  CHECK(meter.count() == 0);
}

TEST_CASE("query accounting on the hard instance") {
  const HardInstance m = hard(1);
  QueryMeter meter;
  RngStream rng(2);
  Simulator sim(m, meter, rng);
  LsviConfig config;
  config.n = 500;
  const LsviResult result = lsvi_run(sim, m, stages_of(m), 2, config);
  std::uint64_t support = 0;
  for (int h = 1; h <= 2; ++h) support += result.stage(h).design.support.size();
  CHECK(meter.count() == 500 * support);
  CHECK(result.queries == meter.count());
  CHECK(meter.count() <= 500 * static_cast<std::uint64_t>(result.max_support) * 2);
  for (int h = 1; h <= 2; ++h) {
    for (const StateId& s : m.stage_states(h, 1000)) {
      for (Action a = 1; a <= 3; ++a) CHECK(std::abs(result.f(h, s, a)) <= 2.0);
    }
  }
}

TEST_CASE("envelope holds on the hard instance whenever the backups concentrate") {
  const HardInstance m = hard(2);
  const ValueTables tables = solve_backward(m);
  int concentrated = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    QueryMeter meter;
    RngStream rng(seed);
    Simulator sim(m, meter, rng);
    LsviConfig config;
    config.n = 20000;
    const LsviResult result = lsvi_run(sim, m, stages_of(m), 2, config);
    const auto rows = lsvi_diagnostics(m, tables, result);
    bool all_within = true;
    for (const auto& row : rows) all_within = all_within && row.mu_error <= row.beta;
    if (!all_within) continue;
    ++concentrated;
    for (const auto& row : rows) CHECK(row.f_error <= row.envelope);
    // Stage-1 error below half the root gap: greedy plays a* at the root.
    if (rows.front().f_error < 1.0 / 6.0) {
      CHECK(result.greedy_policy().distribution(1, StateId::root())[1] == 1.0);
    }
  }
  CHECK(concentrated >= 8);
}

TEST_CASE("null model: estimates near zero and nothing to lose") {
  const HardInstance m = hard(std::nullopt);
  const ValueTables tables = solve_backward(m);
  QueryMeter meter;
  RngStream rng(3);
  Simulator sim(m, meter, rng);
  LsviConfig config;
  config.n = 100;
  const LsviResult result = lsvi_run(sim, m, stages_of(m), 2, config);
  for (int h = 1; h <= 2; ++h) {
    for (const StateId& s : m.stage_states(h, 1000)) {
      for (Action a = 1; a <= 3; ++a) CHECK(std::abs(result.f(h, s, a)) <= 1e-12);
    }
  }
  CHECK(suboptimality(m, tables, result.greedy_policy()).delta_pi == 0.0);
}

TEST_CASE("auto sample size uses the realized support") {
  const HardInstance m = hard(1);
  QueryMeter meter;
  RngStream rng(4);
  Simulator sim(m, meter, rng);
  LsviConfig config;
  config.auto_n = true;
  config.delta_target = 0.25;
  const LsviResult result = lsvi_run(sim, m, stages_of(m), 2, config);
  CHECK(result.n == sample_size(2, 4, result.max_support, 0.25));
  LsviConfig bad_n;
  bad_n.n = 0;
  CHECK_THROWS_AS(bad_n.validate(), ParameterError);
  LsviConfig bad_zeta;
  bad_zeta.zeta = 1.5;
  CHECK_THROWS_AS(bad_zeta.validate(), ParameterError);
}
