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

#include "spiketrace/dsp.hpp"
#include "spiketrace/link.hpp"

using namespace spiketrace;

static void BM_Fft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  dsp::Fft fft(n);
  RngStream rng(1);
  std::vector<dsp::cplx> buf(n);
  for (auto& v : buf) v = dsp::cplx{rng.gaussian(), rng.gaussian()};
  for (auto _ : state) {
    fft.forward(buf.data());
    benchmark::DoNotOptimize(buf.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_Fft)->RangeMultiplier(4)->Range(4096, 65536);

static void BM_SimulateLink(benchmark::State& state) {
  const auto n_syms = static_cast<std::size_t>(state.range(0));
  LinkConfig cfg;
  RngStream frame_rng(2);
  PamFrame frame;
  frame.levels.resize(n_syms);
  for (auto& l : frame.levels) l = static_cast<std::uint8_t>(frame_rng.uniform_below(4));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    RngStream rng(seed++);
    auto rec = simulate_link(frame, cfg, rng);
    benchmark::DoNotOptimize(rec.samples.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n_syms));
}
BENCHMARK(BM_SimulateLink)->Arg(1024)->Arg(7936)->Arg(10000);

static void BM_SlidingTaps(benchmark::State& state) {
  LinkConfig cfg;
  RngStream rng(3);
  PamFrame frame;
  frame.levels.resize(10000);
  for (auto& l : frame.levels) l = static_cast<std::uint8_t>(rng.uniform_below(4));
  const ReceiveRecord rec = simulate_link(frame, cfg, rng);
  for (auto _ : state) {
    auto taps = sliding_taps(rec, 7);
    benchmark::DoNotOptimize(taps.taps.data());
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_SlidingTaps);
