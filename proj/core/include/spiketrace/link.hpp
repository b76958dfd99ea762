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

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "spiketrace/rng.hpp"

namespace spiketrace {

// Dispersive intensity-modulation / direct-detection channel at symbol level.
//
// Transmit chain per frame: zero-stuffed PAM-4 levels -> zero-phase
// root-raised-cosine shaping -> constant bias -> chromatic dispersion
// (cyclic all-pass, quadratic phase) -> square-law photodetection ->
// additive white Gaussian noise -> matched filter -> symbol-rate sampling ->
// affine normalization calibrated so the back-to-back noiseless level means
// land on [0, 7]. All filters are zero-phase, so the alignment offset is the
// guard length exactly.

struct LinkConfig {
  double baud_rate = 112e9;           // symbols per second
  double wavelength = 1270e-9;        // meters
  double dispersion_ps_nm_km = -5.0;  // D, entered in ps/(nm km)
  double fiber_length = 5000.0;       // meters
  int oversampling = 4;               // samples per symbol
  double rolloff = 0.2;               // RRC rolloff in [0, 1]
  double noise_power_db = -20.0;      // post-detection noise power; <= -300 means off
  double bias = 2.25;                 // field bias added after pulse shaping

  // Group velocity dispersion beta2 = -D * lambda^2 / (2 pi c) in s^2/m,
  // recomputed from the configured values on every call.
  double beta2() const;

  bool noise_enabled() const { return noise_power_db > -300.0; }
  double noise_power() const;  // linear, 0 when disabled

  void validate() const;  // throws std::invalid_argument
};

// Gray mapping 00->0, 01->1, 11->2, 10->3.
std::uint8_t gray_level_from_bits(int b0, int b1);
std::array<int, 2> gray_bits_from_level(std::uint8_t level);
// Number of differing Gray bits between two levels (0..2).
int gray_bit_distance(std::uint8_t a, std::uint8_t b);

struct PamFrame {
  std::vector<std::uint8_t> levels;  // PAM-4 levels 0..3; labels are the same indices
  std::size_t size() const { return levels.size(); }
  bool empty() const { return levels.empty(); }
};

PamFrame map_bits_to_pam(std::span<const std::uint8_t> bits);

struct ReceiveRecord {
  std::vector<double> samples;        // one per symbol, post detection + matched filter
  std::vector<std::uint8_t> labels;   // transmitted level per symbol
  double y_max_observed = 0.0;
};

// Dispersion transfer function H[f] = exp(+j/2 * beta2 * L * (2 pi f)^2) on
// the n_fft grid at rate baud_rate * oversampling. |H| == 1 everywhere.
std::vector<std::complex<double>> cd_frequency_response(const LinkConfig& config,
                                                        std::size_t n_fft);

ReceiveRecord simulate_link(const PamFrame& frame, const LinkConfig& config,
                            RngStream& rng);

// n_tap-wide windows centered per symbol, edge samples replicated.
struct TapMatrix {
  int n_tap = 0;
  std::vector<double> taps;          // row-major, count() x n_tap
  std::vector<std::uint8_t> labels;
  std::size_t count() const { return labels.size(); }
  const double* row(std::size_t i) const { return taps.data() + i * static_cast<std::size_t>(n_tap); }
};

TapMatrix sliding_taps(const ReceiveRecord& record, int n_tap);

// Genie-calibrated 3-threshold slicer: thresholds at midpoints of the
// label-conditional sample means of a calibration record.
struct Slicer {
  std::array<double, 3> thresholds{};
  std::uint8_t decide(double sample) const {
    if (sample < thresholds[0]) return 0;
    if (sample < thresholds[1]) return 1;
    if (sample < thresholds[2]) return 2;
    return 3;
  }
  static Slicer calibrate(const ReceiveRecord& record);
};

// Normalization constants derived from a noiseless back-to-back run; they
// depend only on (oversampling, rolloff, bias).
struct LinkCalibration {
  double offset = 0.0;  // level-0 mean before normalization
  double scale = 1.0;   // maps level-3 mean to kNominalYMax
};

inline constexpr double kNominalYMax = 7.0;

LinkCalibration link_calibration(const LinkConfig& config);

}  // namespace spiketrace
