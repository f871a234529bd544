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

#ifndef QSTAR_LSVI_HPP_
#define QSTAR_LSVI_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qstar/design.hpp"
#include "qstar/exact_oracle.hpp"
#include "qstar/mdp.hpp"
#include "qstar/policy.hpp"
#include "qstar/simulator.hpp"
#include "qstar/state.hpp"

namespace qstar {

struct LsviConfig {
  std::uint64_t n = 1;        // samples per design point, ignored when auto_n
  double zeta = 0.1;
  double delta_target = 0.25;
  bool auto_n = false;        // n = sample_size(H, d, max support, delta_target)
  double discount = 1.0;      // multiplies the next-stage backup
  DesignOptions design;

  void validate() const;
};

struct StagePoint {
  StateId s;
  Action a = 0;
};

struct StageEstimate {
  int h = 0;
  std::vector<StagePoint> candidates;  // S_h x A, state-major
  std::vector<Eigen::VectorXd> features;
  Design design;
  std::vector<double> mu_hat;          // aligned with design.support
  Eigen::VectorXd theta_hat;
  std::uint64_t queries = 0;

  const StagePoint& support_point(std::size_t i) const {
    return candidates.at(static_cast<std::size_t>(design.support.at(i)));
  }
};

class LsviResult {
 public:
  LsviResult(const FeatureMap& features, int horizon, int num_actions)
      : features_(&features), horizon_(horizon), num_actions_(num_actions),
        stages_(static_cast<std::size_t>(horizon) + 1) {}

  int horizon() const { return horizon_; }
  int num_actions() const { return num_actions_; }
  std::uint64_t n = 0;
  std::uint64_t queries = 0;
  double beta = 0.0;
  bool beta_clamped = false;
  int max_support = 0;

  StageEstimate& stage(int h) { return stages_.at(static_cast<std::size_t>(h)); }
  const StageEstimate& stage(int h) const { return stages_.at(static_cast<std::size_t>(h)); }

  // Pi_H(<phi_h(s, a), theta_hat_h>), and 0 for h = H + 1.
  double f(int h, const StateId& s, Action a) const;
  double max_f(int h, const StateId& s) const;
  StagePolicy greedy_policy() const;

 private:
  const FeatureMap* features_;
  int horizon_;
  int num_actions_;
  std::vector<StageEstimate> stages_;
};

// Runs least-squares value iteration. stage_states[h] lists S_h for h = 1..H
// (index 0 unused). Throws DesignError (with the stage in the message) when a
// design cannot be computed.
LsviResult lsvi_run(QueryInterface& simulator, const FeatureMap& features,
                    const std::vector<std::vector<StateId>>& stage_states, int horizon,
                    const LsviConfig& config);

std::uint64_t sample_size(int horizon, int d, int m, double delta);

struct BetaValue {
  double beta = 0.0;
  bool clamped = false;
};
BetaValue beta_of(std::uint64_t n, int horizon, int m, double zeta);

double error_envelope(int h, int horizon, int d, double beta);

StagePolicy greedy_policy(const LsviResult& result);

struct StageDiagnostic {
  int h = 0;
  int support = 0;
  double beta = 0.0;
  double mu_error = 0.0;   // max_z |mu_hat_h(z) - mu_h(z)| over the support
  double f_error = 0.0;    // ||f_h - q*_h||_inf over S_h x A
  double envelope = 0.0;   // eps_h
};

// Compares a run against the exact model: mu_h(z) is computed from the true
// reward and transition laws using the estimated f_{h+1}.
std::vector<StageDiagnostic> lsvi_diagnostics(const MdpModel& model, const ValueTables& tables,
                                              const LsviResult& result);

void write_stage_csv(std::ostream& out, const std::vector<StageDiagnostic>& rows);

}  // namespace qstar

#endif  // QSTAR_LSVI_HPP_
