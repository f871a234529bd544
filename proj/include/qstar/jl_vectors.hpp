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

#ifndef QSTAR_JL_VECTORS_HPP_
#define QSTAR_JL_VECTORS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qstar/rng.hpp"

namespace qstar {

// k unit vectors in R^{d'} with pairwise overlaps |<v_a, v_b>| <= gamma.
// vectors[a-1] is v_a.
struct VectorFamily {
  int dim = 0;
  double gamma = 0.0;
  std::vector<Eigen::VectorXd> vectors;

  int size() const { return static_cast<int>(vectors.size()); }
  const Eigen::VectorXd& operator[](int action) const {
    return vectors.at(static_cast<std::size_t>(action - 1));
  }
};

struct FamilyReport {
  double max_overlap = 0.0;   // max_{a != b} |<v_a, v_b>|
  double max_norm_dev = 0.0;  // max_a | ||v_a|| - 1 |
  int worst_a = 0;            // pair attaining max_overlap (0 if k < 2)
  int worst_b = 0;

  bool passes(double gamma, double norm_tol = 1e-12) const {
    return max_overlap <= gamma && max_norm_dev <= norm_tol;
  }
};

inline constexpr int kDefaultFamilyRetries = 1000;

// ceil(8 ln k / gamma^2), the dimension that guarantees such a family exists.
int jl_min_dimension(int k, double gamma);

// Gaussian vectors, normalized; the whole family is redrawn until every
// pairwise overlap is within gamma. Throws ParameterError when d' is below
// jl_min_dimension and GenerationError when retries run out.
VectorFamily generate_family(int dim, int k, double gamma, RngStream& rng,
                             int max_retries = kDefaultFamilyRetries);

// Standard basis e_1..e_k; overlaps are exactly zero.
VectorFamily orthonormal_family(int dim, int k, double gamma);

FamilyReport verify_family(const VectorFamily& family);

// Text format: "d_prime k gamma" then k lines of d' floats, 17 significant
// digits.
void write_family(std::ostream& out, const VectorFamily& family);
VectorFamily read_family(std::istream& in);
void save_family(const std::string& path, const VectorFamily& family);
VectorFamily load_family(const std::string& path);

}  // namespace qstar

#endif  // QSTAR_JL_VECTORS_HPP_
