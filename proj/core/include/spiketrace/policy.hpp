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

#pragma once

#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "spiketrace/rng.hpp"

namespace spiketrace {

// Gaussian-policy black-box optimizer for non-differentiable parameters.
//
// Candidates are drawn from pi(theta~|theta) ~ exp(-||theta~ - theta||^2 /
// sigma_pi^2), i.e. with per-coordinate variance sigma_pi^2 / 2. The score-
// function gradient estimate is
//   (1/B) sum_b loss_b * 2/(N sigma_pi^2) * (theta~_b - theta)
// and the stabilized update applied in practice is
//   theta <- 1/2 * (theta - eps * sum_b (loss_b - loss_theta)/loss_theta
//                          * (theta~_b - theta) + theta*)
// where theta* is the best evaluated theta so far. The constant 2/(B N
// sigma_pi^2) is absorbed into eps, and the baseline makes the update
// invariant to a positive rescaling of the losses.

struct PolicyConfig {
  int perturbations = 20;     // B
  double sigma_pi2 = 0.01;    // policy variance sigma_pi^2
  double epsilon = 0.5;       // learning rate
  int dim = 0;                // N
  // When set, theta* may also be refreshed from perturbation candidates;
  // off by default because their losses are single-batch estimates.
  bool star_from_perturbations = false;

  void validate() const;
};

struct PolicyState {
  std::vector<double> theta;
  std::vector<double> theta_star;
  double loss_star = std::numeric_limits<double>::infinity();
  int iteration = 0;
  std::vector<std::pair<int, double>> history;  // (iteration, loss_theta)

  static PolicyState init(std::span<const double> theta0);
};

// Draws B candidates around theta; mirrored in (+eta, -eta) pairs, which
// keeps the marginals Gaussian while cancelling the common-mode noise of the
// score-function update.
std::vector<std::vector<double>> sample_perturbations(std::span<const double> theta,
                                                      const PolicyConfig& cfg,
                                                      RngStream& rng);

std::vector<double> pg_gradient_estimate(
    const std::vector<std::vector<double>>& perturbed, std::span<const double> losses,
    std::span<const double> theta, const PolicyConfig& cfg);

// Applies the stabilized rule with the state's current theta*, then refreshes
// (theta*, loss*) from the evaluated theta. Requires loss_theta > 0.
PolicyState stabilized_update(const PolicyState& state,
                              const std::vector<std::vector<double>>& perturbed,
                              std::span<const double> losses, double loss_theta,
                              const PolicyConfig& cfg);

using LossEvaluator = std::function<double(std::span<const double>)>;
using IterationObserver = std::function<void(const PolicyState&)>;

// Full loop: evaluate theta, sample B candidates, evaluate them, update.
// Evaluator failures are rethrown with iteration context; the observer (if
// any) sees the state after every update.
PolicyState optimize(const LossEvaluator& evaluator, const PolicyConfig& cfg,
                     int iterations, RngStream& rng, std::span<const double> theta0,
                     const IterationObserver& observer = {});

}  // namespace spiketrace
