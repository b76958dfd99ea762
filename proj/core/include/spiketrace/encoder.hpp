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

namespace spiketrace {

// Time-to-first-spike encoder. Each scalar x is mapped to J parallel
// single-spike signals through the delay characteristic
//   t_j(x) = min(alpha_j * |x - chi_j|, t_max)
// and its time-discretized version k_j(x) = floor(min(alpha_j |x - chi_j|, K)).
// A discrete fire time of K means the spike falls outside the window and no
// spike is emitted.

struct EncodingParams {
  std::vector<double> alpha;  // slopes, one per channel, >= 0
  std::vector<double> chi;    // references, one per channel
  int channels = 0;           // J
  int k_steps = 0;            // K
  double t_max = 0.0;

  void validate() const;

  // chi_j = j * y_max / J (j = 1..J), alpha_j = y_max * K / 6, t_max = K.
  static EncodingParams init(int channels, int k_steps, double y_max);
};

double fire_time_continuous(double x, int channel, const EncodingParams& params);

// Discrete fire time in [0, K]; K means "no spike in the window". Times
// within 1e-9 of an integer boundary round up so that characteristics defined
// by decimal parameters quantize as written.
int fire_time_discrete(double x, int channel, const EncodingParams& params);

// One-spike-per-column raster for a tap window; column (m, j) holds channel j
// of tap m at flat index m*J + j. Stored as per-column fire rows plus a
// row-bucketed column list for fast per-step iteration.
struct SpikeRaster {
  int k_steps = 0;
  int n_columns = 0;
  std::vector<std::uint16_t> fire_row;     // per column; == k_steps when silent
  std::vector<std::int32_t> row_offsets;   // size k_steps + 1
  std::vector<std::uint16_t> cols_by_row;  // spiking columns grouped by row

  bool bit(int k, int col) const { return fire_row[static_cast<std::size_t>(col)] == k; }
  int total_spikes() const { return row_offsets.empty() ? 0 : row_offsets[static_cast<std::size_t>(k_steps)]; }
  std::span<const std::uint16_t> columns_at(int k) const {
    return {cols_by_row.data() + row_offsets[static_cast<std::size_t>(k)],
            cols_by_row.data() + row_offsets[static_cast<std::size_t>(k) + 1]};
  }
};

void encode_window(std::span<const double> taps, const EncodingParams& params,
                   SpikeRaster& out);
SpikeRaster encode_window(std::span<const double> taps, const EncodingParams& params);

// Flattened policy-gradient view of the parameters: theta = [alpha..., chi...].
std::vector<double> theta_from_params(const EncodingParams& params);
// Inverse of theta_from_params; slopes pass through |.| so that perturbed
// vectors stay in the admissible space.
EncodingParams params_from_theta(std::span<const double> theta, int channels, int k_steps);

}  // namespace spiketrace
