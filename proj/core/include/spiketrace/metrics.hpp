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
#include <functional>
#include <string>
#include <utility>

#include "spiketrace/link.hpp"
#include "spiketrace/model.hpp"

namespace spiketrace {

struct MetricsReport {
  double ber = 0.0;
  double ser = 0.0;
  double wilson_lo = 0.0;     // 95% interval on the bit-error proportion
  double wilson_hi = 0.0;
  double z_avg = 0.0;         // spikes per inference, input + hidden
  double z_avg_input = 0.0;
  double z_avg_hidden = 0.0;
  long long mac_count = 0;
  long long param_count = 0;
  long long n_eval = 0;       // symbols
  double noise_power_db = 0.0;
};

// Digital-hardware cost per inference, N_hid * (7J + N_out) * K.
long long mac_count(int j, int k, int n_hidden, int n_out = 4);
// Adaptable weights, N_hid * (7J + N_out).
long long param_count(int j, int n_hidden, int n_out = 4);

// Wilson 95% score interval for an error proportion over n trials.
std::pair<double, double> confidence_interval(double p_hat, long long n);

// One symbol decision plus its spike cost.
struct Decision {
  int cls = 0;
  double z_input = 0.0;
  double z_hidden = 0.0;
};
using Decider = std::function<Decision(const double* taps, int n_tap)>;

struct StreamCounts {
  long long n_symbols = 0;
  long long bit_errors = 0;
  long long sym_errors = 0;
  double z_input_sum = 0.0;
  double z_hidden_sum = 0.0;

  double ber() const { return n_symbols ? static_cast<double>(bit_errors) / (2.0 * n_symbols) : 0.0; }
  double ser() const { return n_symbols ? static_cast<double>(sym_errors) / static_cast<double>(n_symbols) : 0.0; }
  void add(const StreamCounts& o);
};

// Monte-Carlo driver: streams fresh frames through the link, hands each
// centered tap window to the decider, and counts Gray-bit and symbol errors.
// Frames are seeded per index, so results are identical for any thread count.
StreamCounts evaluate_stream(const Decider& decider, const LinkConfig& link, int n_tap,
                             long long n_symbols, std::uint64_t seed, int threads = 1);

// Full model evaluation at a given noise power (overrides the checkpoint's).
MetricsReport estimate_ber(const Checkpoint& ckpt, long long n_samples,
                           double noise_power_db, std::uint64_t seed, int threads = 1);

// Genie-calibrated 3-threshold slicer on the same channel; the conventional
// memoryless baseline.
StreamCounts slicer_baseline(const LinkConfig& link, long long n_symbols,
                             std::uint64_t seed, int threads = 1);

std::string metrics_to_json(const MetricsReport& report);
void save_metrics(const MetricsReport& report, const std::string& path);

}  // namespace spiketrace
