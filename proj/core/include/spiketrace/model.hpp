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

#include <string>

#include "spiketrace/config.hpp"
#include "spiketrace/encoder.hpp"
#include "spiketrace/snn.hpp"

namespace spiketrace {

// A trained equalizer/demapper: resolved config, encoder parameters, and the
// two weight matrices. Serialized as JSON with weights flattened row-major in
// the logical (out x in) orientation.
struct Checkpoint {
  ExperimentConfig config;
  EncodingParams encoder;
  SnnParams snn;

  void validate() const;  // dims vs config cross-checks
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& json_text);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace spiketrace
