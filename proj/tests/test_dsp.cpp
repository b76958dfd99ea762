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

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "doctest.h"
#include "spiketrace/dsp.hpp"
#include "spiketrace/rng.hpp"

using namespace spiketrace;
using dsp::cplx;

TEST_SUITE_BEGIN("dsp");

TEST_CASE("pow2 helpers") {
  CHECK(dsp::is_pow2(1));
  CHECK(dsp::is_pow2(4096));
  CHECK_FALSE(dsp::is_pow2(0));
  CHECK_FALSE(dsp::is_pow2(12));
  CHECK(dsp::next_pow2(1) == 1);
  CHECK(dsp::next_pow2(1025) == 2048);
}

TEST_CASE("fft of an impulse is flat") {
  dsp::Fft fft(64);
  std::vector<cplx> a(64, cplx{0, 0});
  a[0] = cplx{1, 0};
  fft.forward(a);
  for (const auto& v : a) CHECK(std::abs(v - cplx{1, 0}) < 1e-12);
}

TEST_CASE("fft roundtrip and parseval") {
  RngStream rng(123);
  const std::size_t n = 1024;
  dsp::Fft fft(n);
  std::vector<cplx> a(n), orig(n);
  double time_energy = 0;
  for (auto& v : a) v = cplx{rng.gaussian(), rng.gaussian()};
  orig = a;
  for (const auto& v : a) time_energy += std::norm(v);

  fft.forward(a);
  double freq_energy = 0;
  for (const auto& v : a) freq_energy += std::norm(v);
  CHECK(freq_energy / static_cast<double>(n) == doctest::Approx(time_energy).epsilon(1e-12));

  fft.inverse(a);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - orig[i]) < 1e-10);
}

TEST_CASE("fft places a complex tone in its bin") {
  const std::size_t n = 256;
  dsp::Fft fft(n);
  std::vector<cplx> a(n);
  const int bin = 7;
  for (std::size_t t = 0; t < n; ++t)
    a[t] = std::polar(1.0, 2.0 * std::numbers::pi * bin * static_cast<double>(t) / n);
  fft.forward(a);
  for (std::size_t m = 0; m < n; ++m) {
    if (m == bin)
      CHECK(std::abs(a[m] - cplx{static_cast<double>(n), 0}) < 1e-9);
    else
      CHECK(std::abs(a[m]) < 1e-9);
  }
}

TEST_CASE("fft rejects non power of two") {
  CHECK_THROWS_AS(dsp::Fft(12), std::invalid_argument);
}

TEST_CASE("bin frequency wraps to the negative half") {
  CHECK(dsp::bin_frequency(0, 8, 8.0) == 0.0);
  CHECK(dsp::bin_frequency(1, 8, 8.0) == 1.0);
  CHECK(dsp::bin_frequency(4, 8, 8.0) == 4.0);
  CHECK(dsp::bin_frequency(5, 8, 8.0) == -3.0);
  CHECK(dsp::bin_frequency(7, 8, 8.0) == -1.0);
}

TEST_CASE("rrc pair is Nyquist and has unit noise gain") {
  for (double rolloff : {0.0, 0.2, 0.5, 1.0}) {
    CAPTURE(rolloff);
    const std::size_t n = 4096;
    const int s = 4;
    const auto h = dsp::rrc_frequency_response(n, s, rolloff);

    // Matched filter white-noise power gain (1/n) sum H^2 == 1.
    double gain = 0;
    for (double v : h) gain += v * v;
    CHECK(gain / static_cast<double>(n) == doctest::Approx(1.0).epsilon(1e-12));

    // Aliasing sum of the squared pair equals S on every bin: the cascade is
    // exactly Nyquist on the cyclic grid.
    const std::size_t stride = n / static_cast<std::size_t>(s);
    for (std::size_t m = 0; m < stride; ++m) {
      double alias_sum = 0;
      for (int k = 0; k < s; ++k) {
        const std::size_t idx = m + static_cast<std::size_t>(k) * stride;
        alias_sum += h[idx] * h[idx];
      }
      CHECK(alias_sum == doctest::Approx(static_cast<double>(s)).epsilon(1e-9));
    }
  }
}

TEST_CASE("rrc argument validation") {
  CHECK_THROWS_AS(dsp::rrc_frequency_response(1000, 4, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(dsp::rrc_frequency_response(1024, 1, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(dsp::rrc_frequency_response(1024, 4, 1.5), std::invalid_argument);
}

TEST_SUITE_END();
