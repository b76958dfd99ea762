// Copyright 2026 The spiketrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spiketrace/policy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spiketrace {

void PolicyConfig::validate() const {
  if (perturbations < 1) throw std::invalid_argument("policy.perturbations must be >= 1");
  if (sigma_pi2 <= 0.0) throw std::invalid_argument("policy.sigma_pi2 must be > 0");
  if (epsilon <= 0.0) throw std::invalid_argument("policy.epsilon must be > 0");
  if (dim < 1) throw std::invalid_argument("policy.dim must be >= 1");
}

PolicyState PolicyState::init(std::span<const double> theta0) {
  PolicyState s;
  s.theta.assign(theta0.begin(), theta0.end());
  s.theta_star = s.theta;
  return s;
}

std::vector<std::vector<double>> sample_perturbations(std::span<const double> theta,
                                                      const PolicyConfig& cfg,
                                                      RngStream& rng) {
  cfg.validate();
  if (theta.size() != static_cast<std::size_t>(cfg.dim))
    throw std::invalid_argument("sample_perturbations: theta size != dim");
  const double sigma = std::sqrt(cfg.sigma_pi2 / 2.0);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(cfg.perturbations));
  // Mirrored sampling: candidates come in (+eta, -eta) pairs (plus one free
  // draw when B is odd). Marginally each candidate is the Gaussian above;
  // pairing cancels the common-mode sum of the offsets, which otherwise
  // dominates the update noise once the losses have flattened.
  std::vector<double> eta(theta.size());
  for (std::size_t b = 0; b < out.size(); ++b) {
    out[b].resize(theta.size());
    if (b % 2 == 0) {
      for (std::size_t i = 0; i < theta.size(); ++i) {
        eta[i] = sigma * rng.gaussian();
        out[b][i] = theta[i] + eta[i];
      }
    } else {
      for (std::size_t i = 0; i < theta.size(); ++i) out[b][i] = theta[i] - eta[i];
    }
  }
  return out;
}

std::vector<double> pg_gradient_estimate(
    const std::vector<std::vector<double>>& perturbed, std::span<const double> losses,
    std::span<const double> theta, const PolicyConfig& cfg) {
  if (perturbed.size() != losses.size())
    throw std::invalid_argument("pg_gradient_estimate: perturbations/losses mismatch");
  if (perturbed.empty())
    throw std::invalid_argument("pg_gradient_estimate: no samples");
  const auto n = theta.size();
  const double coeff =
      2.0 / (static_cast<double>(n) * cfg.sigma_pi2 * static_cast<double>(perturbed.size()));
  std::vector<double> grad(n, 0.0);
  for (std::size_t b = 0; b < perturbed.size(); ++b) {
    if (perturbed[b].size() != n)
      throw std::invalid_argument("pg_gradient_estimate: candidate size mismatch");
    for (std::size_t i = 0; i < n; ++i)
      grad[i] += losses[b] * (perturbed[b][i] - theta[i]);
  }
  for (auto& g : grad) g *= coeff;
  return grad;
}

PolicyState stabilized_update(const PolicyState& state,
                              const std::vector<std::vector<double>>& perturbed,
                              std::span<const double> losses, double loss_theta,
                              const PolicyConfig& cfg) {
  if (loss_theta <= 0.0)
    throw std::domain_error("stabilized_update: loss_theta must be positive");
  if (perturbed.size() != losses.size())
    throw std::invalid_argument("stabilized_update: perturbations/losses mismatch");
  const auto n = state.theta.size();

  PolicyState next = state;
  std::vector<double> sum(n, 0.0);
  for (std::size_t b = 0; b < perturbed.size(); ++b) {
    const double weight = (losses[b] - loss_theta) / loss_theta;
    for (std::size_t i = 0; i < n; ++i)
      sum[i] += weight * (perturbed[b][i] - state.theta[i]);
  }
  for (std::size_t i = 0; i < n; ++i)
    next.theta[i] = 0.5 * (state.theta[i] - cfg.epsilon * sum[i] + state.theta_star[i]);

  next.history.emplace_back(state.iteration, loss_theta);
  next.iteration = state.iteration + 1;

  // Greedy tracking happens after the update, so the rule above always uses
  // the star of the previous iteration.
  if (loss_theta < next.loss_star) {
    next.loss_star = loss_theta;
    next.theta_star.assign(state.theta.begin(), state.theta.end());
  }
  if (cfg.star_from_perturbations) {
    for (std::size_t b = 0; b < perturbed.size(); ++b) {
      if (losses[b] < next.loss_star) {
        next.loss_star = losses[b];
        next.theta_star = perturbed[b];
      }
    }
  }
  return next;
}

PolicyState optimize(const LossEvaluator& evaluator, const PolicyConfig& cfg,
                     int iterations, RngStream& rng, std::span<const double> theta0,
                     const IterationObserver& observer) {
  cfg.validate();
  if (iterations < 0) throw std::invalid_argument("optimize: iterations must be >= 0");
  PolicyState state = PolicyState::init(theta0);
  std::vector<double> losses(static_cast<std::size_t>(cfg.perturbations));
  for (int it = 0; it < iterations; ++it) {
    try {
      const double loss_theta = evaluator(state.theta);
      const auto perturbed = sample_perturbations(state.theta, cfg, rng);
      for (std::size_t b = 0; b < perturbed.size(); ++b) losses[b] = evaluator(perturbed[b]);
      state = stabilized_update(state, perturbed, losses, loss_theta, cfg);
    } catch (const std::exception& e) {
      throw std::runtime_error("pg optimize: iteration " + std::to_string(it) +
                               ": " + e.what());
    }
    if (observer) observer(state);
  }
  return state;
}

}  // namespace spiketrace
