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
#include <stdexcept>
#include <string>

#include "spiketrace/link.hpp"
#include "spiketrace/policy.hpp"
#include "spiketrace/snn.hpp"

namespace spiketrace {

inline constexpr int kSchemaVersion = 1;

struct EncoderConfig {
  int j = 10;          // spike channels per tap
  int k = 10;          // discrete time steps
  double y_max = 7.0;  // expected receive-sample range used at init
};

struct SnnConfig {
  NeuronConfig neuron;
  int n_hidden = 40;
};

struct TrainConfig {
  long batch_size = 100000;
  int epochs_total = 40000;
  int epochs_joint = 10000;  // epochs with interleaved encoder updates
  double lr = 1e-3;
  int n_tap = 7;
  long eval_samples = 10000000;
  int threads = 1;
};

// Fully resolved experiment description; this is what a run directory
// snapshots and what checkpoints embed.
struct ExperimentConfig {
  LinkConfig link;
  EncoderConfig encoder;
  SnnConfig snn;
  TrainConfig train;
  PolicyConfig policy{.dim = 20};
  std::uint64_t seed = 1;

  SnnDims dims() const {
    return SnnDims{.n_in = train.n_tap * encoder.j, .n_hidden = snn.n_hidden, .n_out = 4};
  }
  // Cross-field invariants (n_in = 7*J, policy dim = 2*J, section ranges).
  void validate() const;
  // Re-derives fields that depend on other sections (policy.dim).
  void finalize();
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Strict loader: unknown keys, wrong types, and invariant violations are all
// reported together in the exception message.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);
void save_experiment_config(const ExperimentConfig& cfg, const std::string& path);

// Named schedules: "paper" is the full-scale setup, "desk" a scaled-down run
// (batch 10000, 2000 epochs, 500 joint, 1e6 eval samples).
void apply_profile(ExperimentConfig& cfg, const std::string& name);

}  // namespace spiketrace
