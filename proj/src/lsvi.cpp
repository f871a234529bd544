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

#include "qstar/lsvi.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include "qstar/errors.hpp"

namespace qstar {
namespace {

double clip(double value, double bound) { return std::max(-bound, std::min(value, bound)); }

}  // namespace

void LsviConfig::validate() const {
  if (!auto_n && n < 1) throw ParameterError("lsvi: n must be at least 1");
  if (!(zeta > 0.0 && zeta <= 1.0)) throw ParameterError("lsvi: zeta must lie in (0, 1]");
  if (auto_n && !(delta_target > 0.0)) throw ParameterError("lsvi: delta_target must be positive");
  if (!(discount > 0.0 && discount <= 1.0)) throw ParameterError("lsvi: discount must lie in (0, 1]");
}

double LsviResult::f(int h, const StateId& s, Action a) const {
  if (h > horizon_) return 0.0;
  const StageEstimate& est = stage(h);
  if (est.theta_hat.size() == 0) return 0.0;
  return clip(features_->phi(h, s, a).dot(est.theta_hat), static_cast<double>(horizon_));
}

double LsviResult::max_f(int h, const StateId& s) const {
  if (h > horizon_) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (Action a = 1; a <= num_actions_; ++a) best = std::max(best, f(h, s, a));
  return best;
}

StagePolicy LsviResult::greedy_policy() const {
  // Copy the state needed by the closure so the policy outlives the result.
  auto snapshot = std::make_shared<LsviResult>(*this);
  return StagePolicy::greedy(num_actions_, [snapshot](int h, const StateId& s, Action a) {
    return snapshot->f(h, s, a);
  });
}

StagePolicy greedy_policy(const LsviResult& result) { return result.greedy_policy(); }

std::uint64_t sample_size(int horizon, int d, int m, double delta) {
  if (!(delta > 0.0)) throw ParameterError("sample_size: delta must be positive");
  const double H = horizon;
  const double growth = std::pow(2.0 + std::sqrt(2.0 * d), H) - 1.0;
  const double log_term = std::max(0.0, std::log(4.0 * H * m / delta));
  const double n = 32.0 * std::pow(H, 4) * log_term * growth * growth / (delta * delta);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(n)));
}

BetaValue beta_of(std::uint64_t n, int horizon, int m, double zeta) {
  if (n < 1) throw ParameterError("beta_of: n must be at least 1");
  if (!(zeta > 0.0)) throw ParameterError("beta_of: zeta must be positive");
  const double log_term = std::log(2.0 * horizon * m / zeta);
  BetaValue out;
  out.clamped = !(log_term > 0.0);
  out.beta = out.clamped ? 0.0
                         : horizon * std::sqrt(2.0 / static_cast<double>(n) * log_term);
  return out;
}

double error_envelope(int h, int horizon, int d, double beta) {
  return beta * (std::pow(2.0 + std::sqrt(2.0 * d), horizon - h + 1) - 1.0);
}

LsviResult lsvi_run(QueryInterface& simulator, const FeatureMap& features,
                    const std::vector<std::vector<StateId>>& stage_states, int horizon,
                    const LsviConfig& config) {
  config.validate();
  if (horizon < 1) throw ParameterError("lsvi: horizon must be at least 1");
  if (stage_states.size() < static_cast<std::size_t>(horizon) + 1) {
    throw ParameterError("lsvi: stage states missing");
  }
  const int k = simulator.num_actions();
  const int d = features.dimension();
  LsviResult result(features, horizon, k);

  for (int h = horizon; h >= 1; --h) {
    StageEstimate& est = result.stage(h);
    est.h = h;
    for (const StateId& s : stage_states[static_cast<std::size_t>(h)]) {
      for (Action a = 1; a <= k; ++a) {
        est.candidates.push_back({s, a});
        est.features.push_back(features.phi(h, s, a));
      }
    }
    try {
      est.design = g_optimal_design(est.features, d, config.design);
    } catch (const DesignError& e) {
      std::ostringstream msg;
      msg << "stage " << h << ": " << e.what();
      throw DesignError(msg.str(), e.max_leverage());
    }
    result.max_support =
        std::max(result.max_support, static_cast<int>(est.design.support.size()));
  }

  result.n = config.auto_n
                 ? sample_size(horizon, d, std::max(result.max_support, 1), config.delta_target)
                 : config.n;
  const BetaValue beta = beta_of(result.n, horizon, std::max(result.max_support, 1), config.zeta);
  result.beta = beta.beta;
  result.beta_clamped = beta.clamped;

  for (int h = horizon; h >= 1; --h) {
    StageEstimate& est = result.stage(h);
    est.mu_hat.reserve(est.design.support.size());
    for (std::size_t i = 0; i < est.design.support.size(); ++i) {
      const StagePoint& z = est.support_point(i);
      const QueryBatch batch = simulator.query_many(z.s, z.a, result.n);
      double total = batch.reward_sum;
      if (h < horizon) {
        for (const auto& [next, count] : batch.next_counts) {
          total += config.discount * static_cast<double>(count) * result.max_f(h + 1, next);
        }
      }
      est.mu_hat.push_back(total / static_cast<double>(result.n));
      est.queries += batch.count;
    }
    est.theta_hat = least_squares(est.design, est.features, est.mu_hat);
    result.queries += est.queries;
  }
  return result;
}

std::vector<StageDiagnostic> lsvi_diagnostics(const MdpModel& model, const ValueTables& tables,
                                              const LsviResult& result) {
  const int H = result.horizon();
  const int k = result.num_actions();
  const double alpha = model.discount();
  std::vector<StageDiagnostic> rows;
  for (int h = 1; h <= H; ++h) {
    const StageEstimate& est = result.stage(h);
    StageDiagnostic row;
    row.h = h;
    row.support = static_cast<int>(est.design.support.size());
    row.beta = result.beta;
    row.envelope = error_envelope(h, H, static_cast<int>(est.theta_hat.size()), result.beta);
    for (std::size_t i = 0; i < est.design.support.size(); ++i) {
      const StagePoint& z = est.support_point(i);
      double mu = model.reward_law(z.s, z.a).mean();
      if (h < H) {
        for (const TransitionAtom& t : model.transition_law(z.s, z.a)) {
          mu += alpha * t.prob * result.max_f(h + 1, t.next);
        }
      }
      row.mu_error = std::max(row.mu_error, std::abs(est.mu_hat[i] - mu));
    }
    for (const StateId& s : tables.space().states(h)) {
      for (Action a = 1; a <= k; ++a) {
        row.f_error = std::max(row.f_error, std::abs(result.f(h, s, a) - tables.q(h, s, a)));
      }
    }
    rows.push_back(row);
  }
  return rows;
}

void write_stage_csv(std::ostream& out, const std::vector<StageDiagnostic>& rows) {
  out << "h,support,beta,mu_error,f_error,envelope\n";
  out << std::setprecision(17);
  for (const StageDiagnostic& r : rows) {
    out << r.h << ',' << r.support << ',' << r.beta << ',' << r.mu_error << ',' << r.f_error
        << ',' << r.envelope << '\n';
  }
}

}  // namespace qstar
