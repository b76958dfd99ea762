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
#include <optional>
#include <string>
#include <vector>

#include "spiketrace/config.hpp"
#include "spiketrace/metrics.hpp"
#include "spiketrace/model.hpp"

namespace spiketrace {

// Training schedule: every epoch draws a fresh batch from the link, runs one
// BPTT weight update, and during the first epochs_joint epochs additionally
// runs one policy-gradient update of the encoder on the same batch (common
// random numbers). Afterwards the encoder is frozen at theta*.

struct RunRecord {
  EncodingParams encoder;  // deployed encoder (theta* once any PG update ran)
  SnnParams snn;
  std::vector<double> ce_curve;         // mean batch CE per epoch
  std::vector<double> loss_star_curve;  // best encoder loss per joint epoch
  // One row per joint epoch: iteration, loss_theta, loss_star, theta...
  std::vector<std::vector<double>> pg_trace;
  MetricsReport metrics;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  bool aborted = false;  // non-finite loss; encoder/snn hold the last finite state
  int aborted_epoch = -1;
};

using ProgressFn = std::function<void(int epoch, double mean_ce, double loss_star)>;

RunRecord train(const ExperimentConfig& cfg, const ProgressFn& progress = {});

Checkpoint make_checkpoint(const ExperimentConfig& cfg, const RunRecord& record);

// Mean batch CE of a fixed network/encoder over precomputed tap windows;
// exposed for evaluation tooling and tests. When `grads` is non-null the
// backward pass runs as well and the batch-mean gradients are written there.
double batch_pass(const TapMatrix& taps, const EncodingParams& enc,
                  const SnnParams& snn, const NeuronConfig& ncfg, int threads,
                  Gradients* grads = nullptr);

struct SweepCell {
  int j = 0;
  int k = 0;
  bool ok = false;
  std::string error;
  std::optional<RunRecord> record;
};

// Independent training run per (J, K) pair with deterministically derived
// seeds; cell failures are recorded and the sweep continues.
std::vector<SweepCell> sweep(const std::vector<int>& j_list, const std::vector<int>& k_list,
                             const ExperimentConfig& tmpl, const ProgressFn& progress = {});

}  // namespace spiketrace
