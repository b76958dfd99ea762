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

#include "spiketrace/policy.hpp"

using namespace spiketrace;

static void BM_PolicyIteration(benchmark::State& state) {
  PolicyConfig cfg;
  cfg.dim = static_cast<int>(state.range(0));
  RngStream rng(11);
  std::vector<double> theta(static_cast<std::size_t>(cfg.dim), 0.3);
  std::vector<double> losses(static_cast<std::size_t>(cfg.perturbations));
  PolicyState st = PolicyState::init(theta);
  for (auto _ : state) {
    const auto pert = sample_perturbations(st.theta, cfg, rng);
    for (std::size_t b = 0; b < pert.size(); ++b) {
      double d2 = 0;
      for (double v : pert[b]) d2 += v * v;
      losses[b] = d2 + 0.1;
    }
    st = stabilized_update(st, pert, losses, 1.0, cfg);
    benchmark::DoNotOptimize(st.theta.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PolicyIteration)->Arg(8)->Arg(20)->Arg(40);
