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
#include <random>

namespace spiketrace {

// Purpose tags for deriving independent substreams from one master seed.
// Every stochastic stage of a run hashes (master, tag, indices...) so that
// results are reproducible and independent of worker count.
enum class Stream : std::uint64_t {
  kWeights = 1,
  kEpochData = 2,
  kPolicy = 3,
  kEval = 4,
  kSweep = 5,
  kCalibration = 6,
  kBench = 7,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seeded wrapper around mt19937_64 with helpers for the draws used here.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Hash-derives an independent stream from (master, tag, indices...).
  template <typename... Parts>
  static RngStream derive(std::uint64_t master, Stream tag, Parts... parts) {
    std::uint64_t s = master;
    (void)splitmix64(s);
    s ^= static_cast<std::uint64_t>(tag);
    std::uint64_t mixed = splitmix64(s);
    ((s ^= static_cast<std::uint64_t>(parts), mixed = splitmix64(s)), ...);
    return RngStream(mixed);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian() { return normal_(engine_); }

  // Uniform integer in [0, n).
  std::uint32_t uniform_below(std::uint32_t n) {
    std::uniform_int_distribution<std::uint32_t> dist(0, n - 1);
    return dist(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace spiketrace
