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

#include "qstar/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_set>

#include "qstar/errors.hpp"

namespace qstar {
namespace {

struct Spectral {
  Eigen::MatrixXd pinv;
  int rank = 0;
};

Spectral pseudo_inverse(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double top = values.size() ? values.maxCoeff() : 0.0;
  const double cutoff = std::max(top, 0.0) * 1e-10;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(values.size());
  Spectral out;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) > cutoff && values(i) > 0.0) {
      inv(i) = 1.0 / values(i);
      ++out.rank;
    }
  }
  out.pinv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  return out;
}

Eigen::MatrixXd information(std::span<const Eigen::VectorXd> candidates,
                            const std::vector<double>& w, int dim) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (w[i] > 0.0) g.selfadjointView<Eigen::Lower>().rankUpdate(candidates[i], w[i]);
  }
  return g.selfadjointView<Eigen::Lower>();
}

}  // namespace

double Design::leverage(const Eigen::VectorXd& phi) const { return phi.dot(pinv * phi); }

double Design::support_benchmark() const {
  const double d = dim;
  return 4.0 * d * std::log(std::log(std::max(d, 3.0))) + 16.0;
}

Design g_optimal_design(std::span<const Eigen::VectorXd> candidates, int dim,
                        const DesignOptions& options) {
  const std::size_t n = candidates.size();
  Design design;
  design.dim = dim;
  design.pinv = Eigen::MatrixXd::Zero(dim, dim);
  design.info = Eigen::MatrixXd::Zero(dim, dim);

  // Start from the distinct nonzero candidates; repeats carry no information.
  std::vector<std::size_t> active;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    if (candidates[i].size() != dim) throw DesignError("candidate dimension mismatch", 0.0);
    if (candidates[i].squaredNorm() == 0.0) continue;
    std::string key(reinterpret_cast<const char*>(candidates[i].data()),
                    sizeof(double) * static_cast<std::size_t>(dim));
    if (seen.insert(std::move(key)).second) active.push_back(i);
  }
  if (active.empty()) {
    design.converged = true;
    design.rank_deficient = dim > 0;
    return design;
  }

  std::vector<double> w(n, 0.0);
  for (std::size_t i : active) w[i] = 1.0 / static_cast<double>(active.size());
  std::vector<double> lev(n, 0.0);

  Spectral spec;
  double top = 0.0;
  int iter = 0;
  for (;; ++iter) {
    spec = pseudo_inverse(information(candidates, w, dim));
    const double r = spec.rank;
    std::size_t best = active.front();
    std::size_t worst = active.front();
    top = -1.0;
    double bottom = std::numeric_limits<double>::infinity();
    for (std::size_t i : active) {
      lev[i] = candidates[i].dot(spec.pinv * candidates[i]);
      if (lev[i] > top) {
        top = lev[i];
        best = i;
      }
      if (w[i] > 0.0 && lev[i] < bottom) {
        bottom = lev[i];
        worst = i;
      }
    }
    if (top <= (1.0 + options.tolerance) * r) {
      design.converged = true;
      break;
    }
    if (iter >= options.max_iters) break;

    const double toward_gap = top - r;
    const double away_gap = r - bottom;
    if (toward_gap >= away_gap || r <= 1.0 || bottom <= 0.0) {
      // Move mass toward the highest-leverage point.
      const double step = (top / r - 1.0) / (top - 1.0);
      for (double& wi : w) wi *= (1.0 - step);
      w[best] += step;
    } else {
      // Move mass away from the lowest-leverage support point, dropping it
      // entirely when the line search hits the boundary.
      const double t_opt = (r - bottom) / (bottom * (r - 1.0));
      const double t = std::min(t_opt, w[worst]);
      const bool drop = t_opt >= w[worst];
      const double scale = 1.0 / (1.0 - t);
      for (double& wi : w) wi *= scale;
      w[worst] -= t * scale;
      if (drop || w[worst] < 1e-15) w[worst] = 0.0;
    }
  }
  design.iterations = iter;
  const int rank_before = spec.rank;

  // Prune negligible weights and re-verify.
  std::size_t support_size = 0;
  for (double wi : w) support_size += wi > 0.0 ? 1 : 0;
  const double w_min = 1e-6 / static_cast<double>(support_size);
  std::vector<double> pruned = w;
  double total = 0.0;
  for (double& wi : pruned) {
    if (wi < w_min) wi = 0.0;
    total += wi;
  }
  for (double& wi : pruned) wi /= total;
  Spectral pruned_spec = pseudo_inverse(information(candidates, pruned, dim));
  if (pruned_spec.rank == rank_before) {
    w = std::move(pruned);
    spec = std::move(pruned_spec);
  } else {
    double sum = 0.0;
    for (double wi : w) sum += wi;
    for (double& wi : w) wi /= sum;
  }

  design.info = information(candidates, w, dim);
  design.pinv = spec.pinv;
  design.rank = spec.rank;
  design.rank_deficient = spec.rank < dim;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] > 0.0) {
      design.support.push_back(static_cast<int>(i));
      design.weights.push_back(w[i]);
    }
  }
  design.max_leverage = max_leverage(design, candidates);
  if (design.max_leverage > 2.0 * dim + 1e-9) {
    std::ostringstream msg;
    msg << "design did not reach leverage <= 2d after " << iter
        << " iterations; final max leverage " << design.max_leverage;
    throw DesignError(msg.str(), design.max_leverage);
  }
  return design;
}

double max_leverage(const Design& design, std::span<const Eigen::VectorXd> candidates) {
  double top = 0.0;
  for (const auto& phi : candidates) top = std::max(top, design.leverage(phi));
  return top;
}

Eigen::VectorXd least_squares(const Design& design,
                              std::span<const Eigen::VectorXd> candidates,
                              std::span<const double> responses) {
  if (responses.size() != design.support.size()) {
    throw ParameterError("least squares needs one response per support point");
  }
  Eigen::VectorXd moment = Eigen::VectorXd::Zero(design.dim);
  for (std::size_t i = 0; i < design.support.size(); ++i) {
    moment += design.weights[i] * responses[i] *
              candidates[static_cast<std::size_t>(design.support[i])];
  }
  return design.pinv * moment;
}

}  // namespace qstar
