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

#include <benchmark/benchmark.h>

#include "spiketrace/encoder.hpp"
#include "spiketrace/link.hpp"
#include "spiketrace/snn.hpp"

using namespace spiketrace;

namespace {

struct Setup {
  EncodingParams enc;
  SnnParams params;
  NeuronConfig ncfg;
  TapMatrix taps;

  Setup(int j, int k) {
    enc = EncodingParams::init(j, k, 7.0);
    RngStream rng(7);
    params = init_weights(SnnDims{.n_in = 7 * j, .n_hidden = 40, .n_out = 4}, rng);
    LinkConfig link;
    PamFrame frame;
    frame.levels.resize(2048);
    for (auto& l : frame.levels) l = static_cast<std::uint8_t>(rng.uniform_below(4));
    RngStream link_rng(8);
    taps = sliding_taps(simulate_link(frame, link, link_rng), 7);
  }
};

}  // namespace

static void BM_EncodeWindow(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  SpikeRaster raster;
  std::size_t i = 0;
  for (auto _ : state) {
    encode_window(std::span(s.taps.row(i % s.taps.count()), 7), s.enc, raster);
    benchmark::DoNotOptimize(raster.fire_row.data());
    ++i;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EncodeWindow)->Args({10, 10})->Args({10, 60});

static void BM_Forward(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  SpikeRaster raster;
  ForwardTrace trace;
  std::size_t i = 0;
  for (auto _ : state) {
    encode_window(std::span(s.taps.row(i % s.taps.count()), 7), s.enc, raster);
    forward(raster, s.params, s.ncfg, trace);
    benchmark::DoNotOptimize(trace.scores.data());
    ++i;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Forward)->Args({4, 4})->Args({10, 10})->Args({10, 60});

static void BM_ForwardBackward(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  SpikeRaster raster;
  ForwardTrace trace;
  Gradients grads(s.params.dims);
  std::vector<double> grad_scores(4);
  std::size_t i = 0;
  for (auto _ : state) {
    const std::size_t row = i % s.taps.count();
    encode_window(std::span(s.taps.row(row), 7), s.enc, raster);
    forward(raster, s.params, s.ncfg, trace);
    ce_loss_grad(trace.scores, s.taps.labels[row], grad_scores);
    backward(trace, grad_scores, s.params, s.ncfg, grads);
    benchmark::DoNotOptimize(grads.gw_in_t.data());
    ++i;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ForwardBackward)->Args({4, 4})->Args({10, 10})->Args({10, 60});
