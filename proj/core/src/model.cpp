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

#include "spiketrace/model.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "spiketrace/metrics.hpp"

namespace spiketrace {
namespace {

using json = nlohmann::ordered_json;

std::vector<double> transpose_out(const std::vector<double>& w, int rows, int cols) {
  // storage (cols x rows) -> logical row-major (rows x cols)
  std::vector<double> out(w.size());
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out[static_cast<std::size_t>(r) * cols + c] =
          w[static_cast<std::size_t>(c) * rows + r];
  return out;
}

std::vector<double> transpose_in(const std::vector<double>& w, int rows, int cols) {
  // logical row-major (rows x cols) -> storage (cols x rows)
  std::vector<double> out(w.size());
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out[static_cast<std::size_t>(c) * rows + r] =
          w[static_cast<std::size_t>(r) * cols + c];
  return out;
}

}  // namespace

void Checkpoint::validate() const {
  config.validate();
  encoder.validate();
  const SnnDims dims = config.dims();
  if (encoder.channels != config.encoder.j || encoder.k_steps != config.encoder.k)
    throw ConfigError("checkpoint: encoder (J, K) does not match config");
  if (!(snn.dims == dims))
    throw ConfigError("checkpoint: weight dimensions do not match config");
  if (snn.w_in_t.size() != static_cast<std::size_t>(dims.n_in) * dims.n_hidden ||
      snn.w_out_t.size() != static_cast<std::size_t>(dims.n_hidden) * dims.n_out)
    throw ConfigError("checkpoint: weight buffer sizes do not match dims");
}

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  const SnnDims dims = ckpt.snn.dims;
  json root;
  root["schema_version"] = kSchemaVersion;
  root["seed"] = ckpt.config.seed;
  root["config"] = json::parse(experiment_config_to_json(ckpt.config));
  root["dims"] = {{"n_in", dims.n_in},
                  {"n_hidden", dims.n_hidden},
                  {"n_out", dims.n_out},
                  {"n_tap", ckpt.config.train.n_tap}};
  root["encoder"] = {{"alpha", ckpt.encoder.alpha},
                     {"chi", ckpt.encoder.chi},
                     {"j", ckpt.encoder.channels},
                     {"k", ckpt.encoder.k_steps},
                     {"t_max", ckpt.encoder.t_max}};
  root["w_in"] = transpose_out(ckpt.snn.w_in_t, dims.n_hidden, dims.n_in);
  root["w_out"] = transpose_out(ckpt.snn.w_out_t, dims.n_out, dims.n_hidden);
  return root.dump(2) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("checkpoint: JSON parse error: ") + e.what());
  }
  for (const char* key : {"config", "dims", "encoder", "w_in", "w_out"})
    if (!root.contains(key))
      throw ConfigError(std::string("checkpoint: missing key '") + key + "'");

  Checkpoint ckpt;
  ckpt.config = parse_experiment_config(root.at("config").dump());

  const json& enc = root.at("encoder");
  ckpt.encoder.alpha = enc.at("alpha").get<std::vector<double>>();
  ckpt.encoder.chi = enc.at("chi").get<std::vector<double>>();
  ckpt.encoder.channels = enc.at("j").get<int>();
  ckpt.encoder.k_steps = enc.at("k").get<int>();
  ckpt.encoder.t_max = enc.at("t_max").get<double>();

  const SnnDims dims = ckpt.config.dims();
  ckpt.snn.dims = dims;
  const auto w_in = root.at("w_in").get<std::vector<double>>();
  const auto w_out = root.at("w_out").get<std::vector<double>>();
  if (w_in.size() != static_cast<std::size_t>(dims.n_in) * dims.n_hidden ||
      w_out.size() != static_cast<std::size_t>(dims.n_hidden) * dims.n_out)
    throw ConfigError("checkpoint: weight array lengths do not match dims");
  ckpt.snn.w_in_t = transpose_in(w_in, dims.n_hidden, dims.n_in);
  ckpt.snn.w_out_t = transpose_in(w_out, dims.n_out, dims.n_hidden);
  ckpt.snn.revision = 1;

  ckpt.validate();
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("checkpoint: cannot write " + path);
  out << checkpoint_to_json(ckpt);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("checkpoint: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

std::string metrics_to_json(const MetricsReport& report) {
  json root;
  root["schema_version"] = kSchemaVersion;
  root["ber"] = report.ber;
  root["ser"] = report.ser;
  root["ber_wilson_lo"] = report.wilson_lo;
  root["ber_wilson_hi"] = report.wilson_hi;
  root["z_avg"] = report.z_avg;
  root["z_avg_input"] = report.z_avg_input;
  root["z_avg_hidden"] = report.z_avg_hidden;
  root["mac_count"] = report.mac_count;
  root["param_count"] = report.param_count;
  root["n_eval"] = report.n_eval;
  root["noise_power_db"] = report.noise_power_db;
  return root.dump(2) + "\n";
}

void save_metrics(const MetricsReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("metrics: cannot write " + path);
  out << metrics_to_json(report);
}

}  // namespace spiketrace
