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

#include "spiketrace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "spiketrace/parallel.hpp"

namespace spiketrace {
namespace {

constexpr long long kFrameSymbols = 7936;  // (7936 + guards) * 4 is a power of two
constexpr double kWilsonZ = 1.959963984540054;

}  // namespace

long long mac_count(int j, int k, int n_hidden, int n_out) {
  if (j < 1 || k < 1 || n_hidden < 1 || n_out < 1)
    throw std::invalid_argument("mac_count: arguments must be positive");
  return static_cast<long long>(n_hidden) * (7LL * j + n_out) * k;
}

long long param_count(int j, int n_hidden, int n_out) {
  if (j < 1 || n_hidden < 1 || n_out < 1)
    throw std::invalid_argument("param_count: arguments must be positive");
  return static_cast<long long>(n_hidden) * (7LL * j + n_out);
}

std::pair<double, double> confidence_interval(double p_hat, long long n) {
  if (n <= 0) throw std::domain_error("confidence_interval: n must be positive");
  const double z2 = kWilsonZ * kWilsonZ;
  const double nn = static_cast<double>(n);
  const double denom = 1.0 + z2 / nn;
  const double center = (p_hat + z2 / (2.0 * nn)) / denom;
  const double half =
      kWilsonZ * std::sqrt(p_hat * (1.0 - p_hat) / nn + z2 / (4.0 * nn * nn)) / denom;
  // At the extremes center and half coincide analytically; avoid the rounding
  // residue so the bound is exact there.
  const double lo = (p_hat == 0.0) ? 0.0 : std::max(0.0, center - half);
  const double hi = (p_hat == 1.0) ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

void StreamCounts::add(const StreamCounts& o) {
  n_symbols += o.n_symbols;
  bit_errors += o.bit_errors;
  sym_errors += o.sym_errors;
  z_input_sum += o.z_input_sum;
  z_hidden_sum += o.z_hidden_sum;
}

StreamCounts evaluate_stream(const Decider& decider, const LinkConfig& link, int n_tap,
                             long long n_symbols, std::uint64_t seed, int threads) {
  if (n_symbols < 1) throw std::invalid_argument("evaluate_stream: n_symbols must be >= 1");
  const auto n_frames =
      static_cast<std::size_t>((n_symbols + kFrameSymbols - 1) / kFrameSymbols);
  std::vector<StreamCounts> per_frame(n_frames);

  parallel_chunks(n_frames, 1, threads, [&](std::size_t f, std::size_t, std::size_t) {
    const long long start = static_cast<long long>(f) * kFrameSymbols;
    const long long payload = std::min(kFrameSymbols, n_symbols - start);
    RngStream rng = RngStream::derive(seed, Stream::kEval, static_cast<std::uint64_t>(f));

    std::vector<std::uint8_t> bits(static_cast<std::size_t>(2 * payload));
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform_below(2));
    const PamFrame frame = map_bits_to_pam(bits);
    const ReceiveRecord record = simulate_link(frame, link, rng);
    const TapMatrix taps = sliding_taps(record, n_tap);

    StreamCounts& c = per_frame[f];
    for (std::size_t i = 0; i < taps.count(); ++i) {
      const Decision d = decider(taps.row(i), n_tap);
      const std::uint8_t truth = taps.labels[i];
      c.bit_errors += gray_bit_distance(truth, static_cast<std::uint8_t>(d.cls));
      c.sym_errors += (d.cls != truth);
      c.z_input_sum += d.z_input;
      c.z_hidden_sum += d.z_hidden;
    }
    c.n_symbols = payload;
  });

  StreamCounts total;
  for (const auto& c : per_frame) total.add(c);
  return total;
}

MetricsReport estimate_ber(const Checkpoint& ckpt, long long n_samples,
                           double noise_power_db, std::uint64_t seed, int threads) {
  if (n_samples < 1) throw std::invalid_argument("estimate_ber: n_samples must be >= 1");
  ckpt.validate();

  LinkConfig link = ckpt.config.link;
  link.noise_power_db = noise_power_db;

  const EncodingParams* enc = &ckpt.encoder;
  const SnnParams* params = &ckpt.snn;
  const NeuronConfig* ncfg = &ckpt.config.snn.neuron;

  Decider decider = [enc, params, ncfg](const double* taps, int n_tap) {
    thread_local SpikeRaster raster;
    thread_local ForwardTrace trace;
    encode_window(std::span<const double>(taps, static_cast<std::size_t>(n_tap)), *enc,
                  raster);
    forward(raster, *params, *ncfg, trace);
    int best = 0;
    for (std::size_t c = 1; c < trace.scores.size(); ++c)
      if (trace.scores[c] > trace.scores[static_cast<std::size_t>(best)])
        best = static_cast<int>(c);
    return Decision{.cls = best,
                    .z_input = static_cast<double>(raster.total_spikes()),
                    .z_hidden = static_cast<double>(trace.hidden_spike_count)};
  };

  const StreamCounts counts =
      evaluate_stream(decider, link, ckpt.config.train.n_tap, n_samples, seed, threads);

  MetricsReport report;
  report.ber = counts.ber();
  report.ser = counts.ser();
  const auto wilson = confidence_interval(report.ber, 2 * counts.n_symbols);
  report.wilson_lo = wilson.first;
  report.wilson_hi = wilson.second;
  report.z_avg_input = counts.z_input_sum / static_cast<double>(counts.n_symbols);
  report.z_avg_hidden = counts.z_hidden_sum / static_cast<double>(counts.n_symbols);
  report.z_avg = report.z_avg_input + report.z_avg_hidden;
  report.mac_count = mac_count(ckpt.config.encoder.j, ckpt.config.encoder.k,
                               ckpt.config.snn.n_hidden);
  report.param_count = param_count(ckpt.config.encoder.j, ckpt.config.snn.n_hidden);
  report.n_eval = counts.n_symbols;
  report.noise_power_db = noise_power_db;
  return report;
}

StreamCounts slicer_baseline(const LinkConfig& link, long long n_symbols,
                             std::uint64_t seed, int threads) {
  // Genie calibration on a dedicated frame from the same channel.
  RngStream cal_rng = RngStream::derive(seed, Stream::kCalibration);
  PamFrame cal_frame;
  cal_frame.levels.resize(8192);
  for (auto& l : cal_frame.levels) l = static_cast<std::uint8_t>(cal_rng.uniform_below(4));
  const ReceiveRecord cal_record = simulate_link(cal_frame, link, cal_rng);
  const Slicer slicer = Slicer::calibrate(cal_record);

  Decider decider = [slicer](const double* taps, int n_tap) {
    return Decision{.cls = slicer.decide(taps[n_tap / 2])};
  };
  return evaluate_stream(decider, link, /*n_tap=*/1, n_symbols, seed, threads);
}

}  // namespace spiketrace
