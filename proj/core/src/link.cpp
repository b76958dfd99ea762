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

#include "spiketrace/link.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "spiketrace/dsp.hpp"

namespace spiketrace {
namespace {

constexpr double kSpeedOfLight = 299792458.0;  // m/s
constexpr std::size_t kGuardSamples = 512;     // random guard symbols, each side
constexpr std::uint64_t kCalibrationSeed = 0x5EEDC0DEULL;

std::size_t guard_symbols(int oversampling) {
  return (kGuardSamples + static_cast<std::size_t>(oversampling) - 1) /
         static_cast<std::size_t>(oversampling);
}

// Shared transmit + receive chain. Noise drawn only when sigma > 0; guard
// symbols are always drawn first so that noise-on/off runs with the same
// stream see identical frames.
std::vector<double> run_chain(const PamFrame& frame, const LinkConfig& config,
                              RngStream& rng, double fiber_length,
                              double noise_sigma) {
  const int s = config.oversampling;
  const std::size_t guard = guard_symbols(s);
  const std::size_t total_syms = frame.size() + 2 * guard;
  const std::size_t n_fft = dsp::next_pow2(total_syms * static_cast<std::size_t>(s));
  const std::size_t occupied = total_syms * static_cast<std::size_t>(s);

  std::vector<std::uint8_t> guard_levels(2 * guard);
  for (auto& g : guard_levels) g = static_cast<std::uint8_t>(rng.uniform_below(4));

  std::vector<dsp::cplx> buf(n_fft, dsp::cplx{0.0, 0.0});
  for (std::size_t i = 0; i < guard; ++i)
    buf[i * s] = static_cast<double>(guard_levels[i]);
  for (std::size_t i = 0; i < frame.size(); ++i)
    buf[(guard + i) * s] = static_cast<double>(frame.levels[i]);
  for (std::size_t i = 0; i < guard; ++i)
    buf[(guard + frame.size() + i) * s] = static_cast<double>(guard_levels[guard + i]);

  const dsp::Fft fft(n_fft);
  const auto rrc = dsp::rrc_frequency_response(n_fft, s, config.rolloff);

  fft.forward(buf);
  dsp::apply_response(buf, rrc);
  // Bias is a DC term; adding it in the frequency domain saves a transform.
  buf[0] += config.bias * static_cast<double>(n_fft);

  LinkConfig disp = config;
  disp.fiber_length = fiber_length;
  const auto cd = cd_frequency_response(disp, n_fft);
  dsp::apply_response(buf, cd);
  fft.inverse(buf);

  // Square-law detection, then electrical noise.
  for (std::size_t i = 0; i < n_fft; ++i) buf[i] = dsp::cplx{std::norm(buf[i]), 0.0};
  if (noise_sigma > 0.0) {
    for (std::size_t i = 0; i < occupied; ++i)
      buf[i] += dsp::cplx{noise_sigma * rng.gaussian(), 0.0};
  }

  fft.forward(buf);
  dsp::apply_response(buf, rrc);
  fft.inverse(buf);

  std::vector<double> out(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i)
    out[i] = buf[(guard + i) * s].real();
  return out;
}

struct CalKey {
  int oversampling;
  std::uint64_t rolloff_bits;
  std::uint64_t bias_bits;
  auto operator<=>(const CalKey&) const = default;
};

}  // namespace

double LinkConfig::beta2() const {
  const double d_si = dispersion_ps_nm_km * 1e-6;  // s/m^2
  return -d_si * wavelength * wavelength / (2.0 * std::numbers::pi * kSpeedOfLight);
}

double LinkConfig::noise_power() const {
  return noise_enabled() ? std::pow(10.0, noise_power_db / 10.0) : 0.0;
}

void LinkConfig::validate() const {
  if (baud_rate <= 0.0) throw std::invalid_argument("link.baud_rate must be > 0");
  if (wavelength <= 0.0) throw std::invalid_argument("link.wavelength must be > 0");
  if (fiber_length < 0.0) throw std::invalid_argument("link.fiber_length must be >= 0");
  if (oversampling < 2) throw std::invalid_argument("link.oversampling must be >= 2");
  if (rolloff < 0.0 || rolloff > 1.0)
    throw std::invalid_argument("link.rolloff must be in [0, 1]");
  if (bias < 0.0) throw std::invalid_argument("link.bias must be >= 0");
  if (!std::isfinite(beta2())) throw std::invalid_argument("link: beta2 is not finite");
}

std::uint8_t gray_level_from_bits(int b0, int b1) {
  static constexpr std::uint8_t lut[4] = {0, 1, 3, 2};  // 00,01,10,11 -> 0,1,3,2
  return lut[(b0 << 1) | b1];
}

std::array<int, 2> gray_bits_from_level(std::uint8_t level) {
  static constexpr std::array<std::array<int, 2>, 4> lut = {{{0, 0}, {0, 1}, {1, 1}, {1, 0}}};
  return lut[level];
}

int gray_bit_distance(std::uint8_t a, std::uint8_t b) {
  const auto ba = gray_bits_from_level(a);
  const auto bb = gray_bits_from_level(b);
  return (ba[0] != bb[0]) + (ba[1] != bb[1]);
}

PamFrame map_bits_to_pam(std::span<const std::uint8_t> bits) {
  if (bits.size() % 2 != 0)
    throw std::invalid_argument("map_bits_to_pam: bit count must be even");
  PamFrame frame;
  frame.levels.resize(bits.size() / 2);
  for (std::size_t i = 0; i < frame.levels.size(); ++i)
    frame.levels[i] = gray_level_from_bits(bits[2 * i], bits[2 * i + 1]);
  return frame;
}

std::vector<std::complex<double>> cd_frequency_response(const LinkConfig& config,
                                                        std::size_t n_fft) {
  if (n_fft < 2 || !dsp::is_pow2(n_fft))
    throw std::invalid_argument("cd_frequency_response: n_fft must be a power of two >= 2");
  const double fs = config.baud_rate * config.oversampling;
  const double coeff = 0.5 * config.beta2() * config.fiber_length;
  std::vector<std::complex<double>> h(n_fft);
  for (std::size_t m = 0; m < n_fft; ++m) {
    const double w = 2.0 * std::numbers::pi * dsp::bin_frequency(m, n_fft, fs);
    h[m] = std::polar(1.0, coeff * w * w);
  }
  return h;
}

LinkCalibration link_calibration(const LinkConfig& config) {
  static std::mutex mutex;
  static std::map<CalKey, LinkCalibration> cache;

  const CalKey key{config.oversampling, std::bit_cast<std::uint64_t>(config.rolloff),
                   std::bit_cast<std::uint64_t>(config.bias)};
  {
    std::scoped_lock lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  // Noiseless back-to-back run over a fixed pseudo-random frame; the level
  // means define the affine map onto [0, kNominalYMax].
  RngStream rng = RngStream::derive(kCalibrationSeed, Stream::kCalibration);
  PamFrame frame;
  frame.levels.resize(4096);
  for (auto& l : frame.levels) l = static_cast<std::uint8_t>(rng.uniform_below(4));
  const auto raw = run_chain(frame, config, rng, /*fiber_length=*/0.0, /*noise_sigma=*/0.0);

  std::array<double, 4> mean{};
  std::array<std::size_t, 4> count{};
  for (std::size_t i = 0; i < frame.size(); ++i) {
    mean[frame.levels[i]] += raw[i];
    ++count[frame.levels[i]];
  }
  for (int l = 0; l < 4; ++l) mean[l] /= static_cast<double>(count[l]);

  LinkCalibration cal;
  cal.offset = mean[0];
  cal.scale = kNominalYMax / (mean[3] - mean[0]);

  std::scoped_lock lock(mutex);
  cache.emplace(key, cal);
  return cal;
}

ReceiveRecord simulate_link(const PamFrame& frame, const LinkConfig& config,
                            RngStream& rng) {
  config.validate();
  if (frame.empty()) throw std::invalid_argument("simulate_link: empty frame");

  const LinkCalibration cal = link_calibration(config);
  // Injected noise is scaled so that the configured power is measured in the
  // normalized output units; the matched filter has unit noise gain.
  const double sigma_inj = std::sqrt(config.noise_power()) / cal.scale;

  const auto raw = run_chain(frame, config, rng, config.fiber_length, sigma_inj);

  ReceiveRecord record;
  record.samples.resize(frame.size());
  record.labels = frame.levels;
  double y_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < frame.size(); ++i) {
    record.samples[i] = (raw[i] - cal.offset) * cal.scale;
    y_max = std::max(y_max, record.samples[i]);
  }
  record.y_max_observed = y_max;
  return record;
}

TapMatrix sliding_taps(const ReceiveRecord& record, int n_tap) {
  if (n_tap < 1 || n_tap % 2 == 0)
    throw std::invalid_argument("sliding_taps: n_tap must be odd and positive");
  const auto n = record.samples.size();
  if (static_cast<std::size_t>(n_tap) > n)
    throw std::invalid_argument("sliding_taps: n_tap exceeds record length");
  if (record.labels.size() != n)
    throw std::invalid_argument("sliding_taps: samples/labels length mismatch");

  TapMatrix m;
  m.n_tap = n_tap;
  m.labels = record.labels;
  m.taps.resize(n * static_cast<std::size_t>(n_tap));
  const int half = n_tap / 2;
  for (std::size_t i = 0; i < n; ++i) {
    double* row = m.taps.data() + i * static_cast<std::size_t>(n_tap);
    for (int t = -half; t <= half; ++t) {
      const auto j = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) + t, 0,
                                                static_cast<std::ptrdiff_t>(n) - 1);
      row[t + half] = record.samples[static_cast<std::size_t>(j)];
    }
  }
  return m;
}

Slicer Slicer::calibrate(const ReceiveRecord& record) {
  std::array<double, 4> mean{};
  std::array<std::size_t, 4> count{};
  for (std::size_t i = 0; i < record.samples.size(); ++i) {
    mean[record.labels[i]] += record.samples[i];
    ++count[record.labels[i]];
  }
  for (int l = 0; l < 4; ++l) {
    if (count[l] == 0)
      throw std::invalid_argument("Slicer::calibrate: level missing from record");
    mean[l] /= static_cast<double>(count[l]);
  }
  Slicer s;
  for (int l = 0; l < 3; ++l) s.thresholds[l] = 0.5 * (mean[l] + mean[l + 1]);
  return s;
}

}  // namespace spiketrace
