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

#include <cstdint>
#include <span>
#include <vector>

#include "spiketrace/encoder.hpp"
#include "spiketrace/rng.hpp"

namespace spiketrace {

// Two-layer feed-forward network of discrete-time leaky integrators: spiking
// LIF hidden layer, non-spiking LI readout, bias-free linear connections.
//
// Per step k (exponential-Euler decays b_s = exp(-dt/tau_s), b_m likewise):
//   i[k]   = b_s * i[k-1] + W z_in[k]
//   v~[k]  = b_m * v[k-1] + i[k]
//   z[k]   = 1{v~[k] >= v_th}            (hidden only)
//   v[k]   = v~[k] - v_th * z[k]         (soft reset)
// Synaptic current integrates into the membrane directly (second-order LIF in
// the snnTorch convention); with the unit threshold and 1/sqrt(fan_in) weight
// init this puts initial membranes at spiking scale, which the training loop
// needs. The readout runs the same recurrences on W_out z[k] without
// threshold or reset; class scores are the per-neuron maxima of the readout
// membrane over the K steps (ties resolved to the earliest step).

enum class SpikeMode {
  kHard,    // Heaviside spikes; backward uses the surrogate derivative
  kSmooth,  // continuous relaxation of the threshold, exact derivative;
            // diagnostic mode used by the gradient checks
};

struct NeuronConfig {
  double tau_m_ms = 6.0;
  double tau_s_ms = 6.0;
  double v_th = 1.0;
  double dt_ms = 0.5;
  double surrogate_steepness = 100.0;  // gamma in 1/(gamma|v - v_th| + 1)^2
  bool plain_euler = false;            // 1 - dt/tau decays instead of exp(-dt/tau)
  SpikeMode spike_mode = SpikeMode::kHard;

  double beta_m() const;
  double beta_s() const;
  void validate() const;
};

struct SnnDims {
  int n_in = 0;
  int n_hidden = 0;
  int n_out = 4;
  long param_count() const {
    return static_cast<long>(n_hidden) * (static_cast<long>(n_in) + n_out);
  }
  bool operator==(const SnnDims&) const = default;
};

// Weights are stored transposed relative to the usual (out x in) convention
// so that a presynaptic spike touches one contiguous row: w_in_t is
// n_in x n_hidden, w_out_t is n_hidden x n_out. The revision counter tags
// forward traces so a stale trace cannot be replayed against updated weights.
struct SnnParams {
  SnnDims dims;
  std::vector<double> w_in_t;
  std::vector<double> w_out_t;
  std::uint64_t revision = 0;

  double& w_in(int hidden, int in) {
    return w_in_t[static_cast<std::size_t>(in) * dims.n_hidden + hidden];
  }
  double w_in(int hidden, int in) const {
    return w_in_t[static_cast<std::size_t>(in) * dims.n_hidden + hidden];
  }
  double& w_out(int out, int hidden) {
    return w_out_t[static_cast<std::size_t>(hidden) * dims.n_out + out];
  }
  double w_out(int out, int hidden) const {
    return w_out_t[static_cast<std::size_t>(hidden) * dims.n_out + out];
  }
};

// Kaiming-style uniform init, U(-1/sqrt(fan_in), +1/sqrt(fan_in)).
SnnParams init_weights(SnnDims dims, RngStream& rng);

// Everything the backward pass needs to replay the forward exactly.
struct ForwardTrace {
  SnnDims dims;
  int k_steps = 0;
  std::uint64_t params_revision = 0;

  std::vector<double> syn_current;   // K x n_hidden
  std::vector<double> v_pre;         // K x n_hidden, membrane before reset
  std::vector<double> spikes;        // K x n_hidden (0/1 in hard mode)
  std::vector<double> v_out;         // K x n_out
  std::vector<double> scores;        // n_out
  std::vector<int> argmax_step;      // n_out
  int hidden_spike_count = 0;

  // Input raster copy for weight gradients.
  std::vector<std::uint16_t> input_fire_row;
  std::vector<std::int32_t> input_row_offsets;
  std::vector<std::uint16_t> input_cols_by_row;
};

void forward(const SpikeRaster& raster, const SnnParams& params,
             const NeuronConfig& cfg, ForwardTrace& trace);

struct CeLoss {
  double loss = 0.0;
  std::vector<double> grad_scores;
};

// Softmax cross-entropy on the class scores.
CeLoss ce_loss(std::span<const double> scores, int label);
// Allocation-free variant for batch loops; returns the loss and writes
// softmax(scores) - one_hot(label) into grad_out.
double ce_loss_grad(std::span<const double> scores, int label,
                    std::span<double> grad_out);

struct Gradients {
  SnnDims dims;
  std::vector<double> gw_in_t;
  std::vector<double> gw_out_t;

  explicit Gradients(SnnDims d);
  void clear();
  void scale(double c);
  void add(const Gradients& other);
};

// Reverse-mode pass through the recurrences above; accumulates (+=) into
// `grads`. In hard mode the Heaviside derivative is replaced by the
// surrogate 1/(gamma |v~ - v_th| + 1)^2.
void backward(const ForwardTrace& trace, std::span<const double> grad_scores,
              const SnnParams& params, const NeuronConfig& cfg, Gradients& grads);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<double> m_in, v_in, m_out, v_out;

  explicit AdamState(SnnDims dims);
};

// One Adam update; refuses the step (throws) on non-finite gradients.
void optimizer_step(SnnParams& params, const Gradients& grads, AdamState& state,
                    double lr);

}  // namespace spiketrace
