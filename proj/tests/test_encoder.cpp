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

#include "doctest.h"
#include "spiketrace/encoder.hpp"
#include "spiketrace/rng.hpp"

using namespace spiketrace;

namespace {

// alpha=20, chi={0.25, 0.5, 0.75}, K = t_max = 4: the three-channel
// staircase used as the reference characteristic throughout.
EncodingParams demo_params() {
  EncodingParams p;
  p.channels = 3;
  p.k_steps = 4;
  p.t_max = 4.0;
  p.alpha = {20.0, 20.0, 20.0};
  p.chi = {0.25, 0.5, 0.75};
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("encoder");

TEST_CASE("continuous fire time") {
  const EncodingParams p = demo_params();
  CHECK(fire_time_continuous(0.25, 0, p) == 0.0);
  CHECK(fire_time_continuous(0.5, 0, p) == 4.0);   // saturated at t_max
  CHECK(fire_time_continuous(0.3, 0, p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(fire_time_continuous(0.3, 3, p), std::out_of_range);
  CHECK_THROWS_AS(fire_time_continuous(0.3, -1, p), std::out_of_range);
}

TEST_CASE("discrete fire time") {
  const EncodingParams p = demo_params();
  CHECK(fire_time_discrete(0.3, 0, p) == 1);
  CHECK(fire_time_discrete(0.25, 0, p) == 0);
  // |x - chi| >= K/alpha = 0.2 saturates: no spike within the window.
  CHECK(fire_time_discrete(0.45, 0, p) == 4);
  CHECK(fire_time_discrete(0.05, 0, p) == 4);
  CHECK(fire_time_discrete(0.9, 0, p) == 4);
  CHECK_THROWS_AS(fire_time_discrete(0.3, 5, p), std::out_of_range);
}

TEST_CASE("encode_window single tap matches the reference staircase") {
  const EncodingParams p = demo_params();
  const double taps[] = {0.3};
  const SpikeRaster r = encode_window(taps, p);
  CHECK(r.k_steps == 4);
  CHECK(r.n_columns == 3);
  CHECK(r.total_spikes() == 1);
  CHECK(r.bit(1, 0));  // channel 1 fires at step 1; the others saturate
  CHECK_FALSE(r.bit(0, 0));
  for (int k = 0; k < 4; ++k) {
    CHECK_FALSE(r.bit(k, 1));
    CHECK_FALSE(r.bit(k, 2));
  }
}

TEST_CASE("taps at the reference fire immediately") {
  EncodingParams p;
  p.channels = 1;
  p.k_steps = 5;
  p.t_max = 5.0;
  p.alpha = {3.0};
  p.chi = {1.5};
  const double taps[] = {1.5, 1.5, 1.5, 1.5};
  const SpikeRaster r = encode_window(taps, p);
  CHECK(r.total_spikes() == 4);
  for (int col = 0; col < 4; ++col) CHECK(r.fire_row[static_cast<std::size_t>(col)] == 0);
}

TEST_CASE("raster columns hold at most one spike") {
  const EncodingParams p = EncodingParams::init(5, 6, 7.0);
  RngStream rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> taps(7);
    for (auto& t : taps) t = rng.uniform(-1.0, 9.0);
    const SpikeRaster r = encode_window(taps, p);
    CHECK(r.total_spikes() <= 7 * 5);
    for (int col = 0; col < r.n_columns; ++col) {
      int set = 0;
      for (int k = 0; k < r.k_steps; ++k) set += r.bit(k, col);
      CHECK(set <= 1);
    }
  }
}

TEST_CASE("initialization formulas") {
  SUBCASE("J=10 K=10 y_max=7") {
    const EncodingParams p = EncodingParams::init(10, 10, 7.0);
    for (int j = 0; j < 10; ++j)
      CHECK(p.chi[static_cast<std::size_t>(j)] ==
            doctest::Approx((j + 1) * 0.7).epsilon(1e-12));
    for (double a : p.alpha) CHECK(a == doctest::Approx(70.0 / 6.0).epsilon(1e-12));
    CHECK(p.t_max == 10.0);
  }
  SUBCASE("J=1 K=6 y_max=6") {
    const EncodingParams p = EncodingParams::init(1, 6, 6.0);
    CHECK(p.chi[0] == 6.0);
    CHECK(p.alpha[0] == 6.0);
  }
  SUBCASE("J=4 K=4 y_max=7") {
    const EncodingParams p = EncodingParams::init(4, 4, 7.0);
    CHECK(p.chi[0] == doctest::Approx(1.75));
    CHECK(p.chi[1] == doctest::Approx(3.5));
    CHECK(p.chi[2] == doctest::Approx(5.25));
    CHECK(p.chi[3] == doctest::Approx(7.0));
  }
  SUBCASE("invalid arguments") {
    CHECK_THROWS_AS(EncodingParams::init(0, 4, 7.0), std::invalid_argument);
    CHECK_THROWS_AS(EncodingParams::init(4, 0, 7.0), std::invalid_argument);
    CHECK_THROWS_AS(EncodingParams::init(4, 4, 0.0), std::invalid_argument);
  }
}

TEST_CASE("quantization cells of width 1/alpha") {
  // With alpha 20 and chi on the 0.05 grid, outputs are constant on the open
  // interiors of the width-0.05 cells: inputs inside a cell are
  // indistinguishable after encoding. Cell edges belong to whichever side the
  // branch direction dictates, so they are excluded.
  const EncodingParams p = demo_params();
  for (int cell = 0; cell < 20; ++cell) {
    int ref[3];
    for (int c = 0; c < 3; ++c)
      ref[c] = fire_time_discrete((50 * cell + 1) * 0.001, c, p);
    for (int i = 2; i < 50; ++i) {
      const double x = (50 * cell + i) * 0.001;
      for (int c = 0; c < 3; ++c) CHECK(fire_time_discrete(x, c, p) == ref[c]);
    }
  }
}

TEST_CASE("fire times are reflection symmetric about chi") {
  RngStream rng(11);
  const EncodingParams p = EncodingParams::init(4, 8, 7.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double x = rng.uniform(-2.0, 9.0);
    for (int c = 0; c < 4; ++c) {
      const double mirrored = 2.0 * p.chi[static_cast<std::size_t>(c)] - x;
      CHECK(fire_time_continuous(x, c, p) ==
            doctest::Approx(fire_time_continuous(mirrored, c, p)).epsilon(1e-9));
    }
  }
}

TEST_CASE("fire time is non-decreasing in the distance from chi") {
  const EncodingParams p = EncodingParams::init(3, 6, 7.0);
  for (int c = 0; c < 3; ++c) {
    double prev = -1.0;
    for (int i = 0; i <= 400; ++i) {
      const double t = fire_time_continuous(p.chi[static_cast<std::size_t>(c)] + i * 0.01, c, p);
      CHECK(t >= prev);
      prev = t;
    }
  }
}

TEST_CASE("theta packing applies the slope projection") {
  const EncodingParams p = EncodingParams::init(3, 4, 7.0);
  auto theta = theta_from_params(p);
  REQUIRE(theta.size() == 6);
  theta[1] = -theta[1];  // a perturbation may flip a slope negative
  const EncodingParams q = params_from_theta(theta, 3, 4);
  CHECK(q.alpha[1] == doctest::Approx(p.alpha[1]));
  CHECK(q.chi == p.chi);
  q.validate();

  CHECK_THROWS_AS(params_from_theta(std::vector<double>(5), 3, 4), std::invalid_argument);
}

TEST_CASE("window length validation") {
  const EncodingParams p = demo_params();
  CHECK_THROWS_AS(encode_window(std::span<const double>{}, p), std::invalid_argument);
}

TEST_SUITE_END();
