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

#ifndef QSTAR_CONFIG_HPP_
#define QSTAR_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "qstar/hard_family.hpp"
#include "qstar/mdp.hpp"

namespace qstar {

enum class PlannerKind { kLsvi, kRandom, kGreedyOracle, kFirstAction };
enum class VectorMode { kAuto, kOrthonormal, kGaussian, kFile };

std::string planner_name(PlannerKind planner);
PlannerKind parse_planner(const std::string& text);

struct InstanceConfig {
  int d = 0;
  int H = 0;
  std::optional<double> eta;    // paper mode
  std::optional<double> gamma;  // desk mode
  std::optional<int> k;
  std::optional<double> epsilon;
  HorizonMode mode = HorizonMode::kFixed;
  double alpha = 1.0;
  int a_star = 1;  // 0 selects the null model M_0
  VectorMode vectors = VectorMode::kAuto;
  std::string vector_file;
};

struct ExperimentConfig {
  InstanceConfig instance;
  PlannerKind planner = PlannerKind::kLsvi;
  int replication = 1;
  std::uint64_t seed = 0;
  std::string out_dir;
  double delta_target = 0.25;
  double zeta = 0.1;
  std::optional<std::uint64_t> n;       // unset: derived from sample_size
  std::optional<std::uint64_t> budget;  // query cap per planner call
  std::size_t cap = kDefaultStateCap;
  double design_tolerance = 0.01;
  int design_max_iters = 10000;
  int rollouts = 8;    // random planner
  int trials = 1000;   // adversary Monte Carlo trials per model
  int threads = 0;     // 0: hardware concurrency
};

// Parses `key = value` lines; `#` starts a comment. Unknown keys, missing
// required keys (d, H, and one of eta / gamma) and out-of-range values raise
// ConfigError with the offending line. Relative vector_file paths resolve
// against base_dir.
ExperimentConfig parse_config(std::istream& in, const std::string& base_dir = "");
ExperimentConfig load_config(const std::string& path);

}  // namespace qstar

#endif  // QSTAR_CONFIG_HPP_
