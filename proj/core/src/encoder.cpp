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

#include "spiketrace/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace spiketrace {
namespace {

// Guards against decimal parameters landing one ulp below an integer
// boundary (e.g. 20 * |0.3 - 0.25|).
constexpr double kBoundarySnap = 1e-9;

void check_channel(int channel, const EncodingParams& params) {
  if (channel < 0 || channel >= params.channels)
    throw std::out_of_range("encoder: channel index out of range");
}

}  // namespace

void EncodingParams::validate() const {
  if (channels < 1) throw std::invalid_argument("encoder: channels must be >= 1");
  if (k_steps < 1) throw std::invalid_argument("encoder: k_steps must be >= 1");
  if (k_steps > 0xFFFF - 1) throw std::invalid_argument("encoder: k_steps too large");
  if (t_max <= 0.0) throw std::invalid_argument("encoder: t_max must be > 0");
  if (alpha.size() != static_cast<std::size_t>(channels) ||
      chi.size() != static_cast<std::size_t>(channels))
    throw std::invalid_argument("encoder: alpha/chi must have one entry per channel");
  for (double a : alpha)
    if (!(a >= 0.0)) throw std::invalid_argument("encoder: alpha entries must be >= 0");
}

EncodingParams EncodingParams::init(int channels, int k_steps, double y_max) {
  if (channels < 1 || k_steps < 1 || y_max <= 0.0)
    throw std::invalid_argument("EncodingParams::init: arguments must be positive");
  EncodingParams p;
  p.channels = channels;
  p.k_steps = k_steps;
  p.t_max = static_cast<double>(k_steps);
  p.alpha.assign(static_cast<std::size_t>(channels), y_max * k_steps / 6.0);
  p.chi.resize(static_cast<std::size_t>(channels));
  for (int j = 0; j < channels; ++j)
    p.chi[static_cast<std::size_t>(j)] = (j + 1) * y_max / channels;
  return p;
}

double fire_time_continuous(double x, int channel, const EncodingParams& params) {
  check_channel(channel, params);
  const auto j = static_cast<std::size_t>(channel);
  return std::min(params.alpha[j] * std::abs(x - params.chi[j]), params.t_max);
}

int fire_time_discrete(double x, int channel, const EncodingParams& params) {
  check_channel(channel, params);
  const auto j = static_cast<std::size_t>(channel);
  const double k_max = static_cast<double>(params.k_steps);
  const double t = std::min(params.alpha[j] * std::abs(x - params.chi[j]), k_max);
  return static_cast<int>(std::floor(t + kBoundarySnap));
}

void encode_window(std::span<const double> taps, const EncodingParams& params,
                   SpikeRaster& out) {
  params.validate();
  const int n_tap = static_cast<int>(taps.size());
  if (n_tap < 1) throw std::invalid_argument("encode_window: empty tap window");
  const int j_count = params.channels;
  const int k = params.k_steps;
  const int n_cols = n_tap * j_count;

  out.k_steps = k;
  out.n_columns = n_cols;
  out.fire_row.resize(static_cast<std::size_t>(n_cols));
  out.row_offsets.assign(static_cast<std::size_t>(k) + 1, 0);
  out.cols_by_row.resize(static_cast<std::size_t>(n_cols));

  for (int m = 0; m < n_tap; ++m) {
    const double x = taps[static_cast<std::size_t>(m)];
    for (int j = 0; j < j_count; ++j) {
      const int row = fire_time_discrete(x, j, params);
      out.fire_row[static_cast<std::size_t>(m * j_count + j)] =
          static_cast<std::uint16_t>(row);
      if (row < k) ++out.row_offsets[static_cast<std::size_t>(row) + 1];
    }
  }
  for (int r = 0; r < k; ++r)
    out.row_offsets[static_cast<std::size_t>(r) + 1] += out.row_offsets[static_cast<std::size_t>(r)];

  // Counting sort of spiking columns by row.
  thread_local std::vector<std::int32_t> cursor;
  cursor.assign(out.row_offsets.begin(), out.row_offsets.end() - 1);
  for (int col = 0; col < n_cols; ++col) {
    const int row = out.fire_row[static_cast<std::size_t>(col)];
    if (row < k)
      out.cols_by_row[static_cast<std::size_t>(cursor[static_cast<std::size_t>(row)]++)] =
          static_cast<std::uint16_t>(col);
  }
  out.cols_by_row.resize(static_cast<std::size_t>(out.row_offsets[static_cast<std::size_t>(k)]));
}

SpikeRaster encode_window(std::span<const double> taps, const EncodingParams& params) {
  SpikeRaster raster;
  encode_window(taps, params, raster);
  return raster;
}

std::vector<double> theta_from_params(const EncodingParams& params) {
  std::vector<double> theta;
  theta.reserve(params.alpha.size() + params.chi.size());
  theta.insert(theta.end(), params.alpha.begin(), params.alpha.end());
  theta.insert(theta.end(), params.chi.begin(), params.chi.end());
  return theta;
}

EncodingParams params_from_theta(std::span<const double> theta, int channels,
                                 int k_steps) {
  if (theta.size() != 2 * static_cast<std::size_t>(channels))
    throw std::invalid_argument("params_from_theta: theta must have length 2*J");
  EncodingParams p;
  p.channels = channels;
  p.k_steps = k_steps;
  p.t_max = static_cast<double>(k_steps);
  p.alpha.resize(static_cast<std::size_t>(channels));
  p.chi.resize(static_cast<std::size_t>(channels));
  for (int j = 0; j < channels; ++j) {
    p.alpha[static_cast<std::size_t>(j)] = std::abs(theta[static_cast<std::size_t>(j)]);
    p.chi[static_cast<std::size_t>(j)] = theta[static_cast<std::size_t>(channels + j)];
  }
  return p;
}

}  // namespace spiketrace
