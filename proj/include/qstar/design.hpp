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

#ifndef QSTAR_DESIGN_HPP_
#define QSTAR_DESIGN_HPP_

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qstar {

struct DesignOptions {
  // Frank-Wolfe stops once max leverage <= (1 + tolerance) * rank.
  double tolerance = 0.01;
  int max_iters = 10000;
};

// Finitely supported design rho over a candidate feature set, with its
// information matrix G(rho) = sum rho(x) phi(x) phi(x)^T.
//
// When the candidates do not span R^d, everything is computed inside their
// span: leverages and the estimator use the pseudo-inverse of G.
struct Design {
  int dim = 0;
  std::vector<int> support;     // indices into the candidate list
  std::vector<double> weights;  // aligned with support, sums to 1
  Eigen::MatrixXd info;         // G(rho)
  Eigen::MatrixXd pinv;         // G(rho)^+
  int rank = 0;
  double max_leverage = 0.0;    // over all candidates
  int iterations = 0;
  bool converged = false;       // reached the tolerance target
  bool rank_deficient = false;  // rank < dim

  // phi^T G^+ phi.
  double leverage(const Eigen::VectorXd& phi) const;
  // 4 d ln ln(max(d, 3)) + 16, the Kiefer-Wolfowitz support-size benchmark.
  double support_benchmark() const;
};

// Near-G-optimal design by Frank-Wolfe ascent (with away steps) on log det G,
// started from the uniform design over candidates with nonzero features.
// Weights below 1e-6/|support| are pruned afterwards. Throws DesignError if
// the final max leverage exceeds 2d.
Design g_optimal_design(std::span<const Eigen::VectorXd> candidates, int dim,
                        const DesignOptions& options = {});

// Largest leverage over the candidate list under the design.
double max_leverage(const Design& design, std::span<const Eigen::VectorXd> candidates);

// theta = G^+ sum_{x in supp} rho(x) r(x) phi(x); responses are aligned with
// design.support.
Eigen::VectorXd least_squares(const Design& design,
                              std::span<const Eigen::VectorXd> candidates,
                              std::span<const double> responses);

}  // namespace qstar

#endif  // QSTAR_DESIGN_HPP_
