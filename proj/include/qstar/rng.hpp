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

#ifndef QSTAR_RNG_HPP_
#define QSTAR_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace qstar {

// A named random stream. Streams are derived from a master seed, a name and
// a counter, so every consumer gets an independent, replayable sequence.
class RngStream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit RngStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  static RngStream derive(std::uint64_t master_seed, std::string_view name,
                          std::uint64_t counter = 0);

  // Child stream keyed by this stream's seed; does not advance this stream.
  RngStream split(std::string_view name, std::uint64_t counter = 0) const;

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer on [lo, hi].
  int uniform_int(int lo, int hi);
  double normal();
  std::uint64_t binomial(std::uint64_t trials, double p);

  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace qstar

#endif  // QSTAR_RNG_HPP_
