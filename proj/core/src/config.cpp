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

#include "spiketrace/config.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace spiketrace {
namespace {

using json = nlohmann::ordered_json;

// Collects every schema problem before failing so a bad config is fixable in
// one pass.
class SchemaReader {
 public:
  explicit SchemaReader(const json& root) : root_(root) {}

  const json* section(const std::string& name, std::vector<std::string> keys) {
    known_.push_back(name);
    if (!root_.contains(name)) return nullptr;
    const json& s = root_.at(name);
    if (!s.is_object()) {
      error(name + ": expected an object");
      return nullptr;
    }
    for (const auto& [key, value] : s.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end())
        error(name + "." + key + ": unknown key");
    }
    return &s;
  }

  void scalar(const std::string& name) { known_.push_back(name); }

  template <typename T>
  void number(const json* s, const std::string& section, const std::string& key, T& out) {
    if (!s || !s->contains(key)) return;
    const json& v = s->at(key);
    if (!v.is_number()) {
      error(section + "." + key + ": expected a number");
      return;
    }
    out = v.get<T>();
  }

  void boolean(const json* s, const std::string& section, const std::string& key, bool& out) {
    if (!s || !s->contains(key)) return;
    const json& v = s->at(key);
    if (!v.is_boolean()) {
      error(section + "." + key + ": expected a boolean");
      return;
    }
    out = v.get<bool>();
  }

  void top_level_scan() {
    for (const auto& [key, value] : root_.items()) {
      if (std::find(known_.begin(), known_.end(), key) == known_.end())
        error(key + ": unknown key");
    }
  }

  void error(const std::string& msg) { errors_.push_back(msg); }
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  const json& root_;
  std::vector<std::string> known_;
  std::vector<std::string> errors_;
};

ExperimentConfig read_config(const json& root, std::vector<std::string>& errors) {
  ExperimentConfig cfg;
  SchemaReader r(root);

  r.scalar("schema_version");
  if (root.contains("schema_version")) {
    if (!root.at("schema_version").is_number_integer() ||
        root.at("schema_version").get<int>() != kSchemaVersion)
      r.error("schema_version: expected " + std::to_string(kSchemaVersion));
  }
  r.scalar("seed");
  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned() && !root.at("seed").is_number_integer())
      r.error("seed: expected an integer");
    else
      cfg.seed = root.at("seed").get<std::uint64_t>();
  }

  const json* link = r.section("link", {"baud_rate", "wavelength", "dispersion_ps_nm_km",
                                        "fiber_length", "oversampling", "rolloff",
                                        "noise_power_db", "bias"});
  r.number(link, "link", "baud_rate", cfg.link.baud_rate);
  r.number(link, "link", "wavelength", cfg.link.wavelength);
  r.number(link, "link", "dispersion_ps_nm_km", cfg.link.dispersion_ps_nm_km);
  r.number(link, "link", "fiber_length", cfg.link.fiber_length);
  r.number(link, "link", "oversampling", cfg.link.oversampling);
  r.number(link, "link", "rolloff", cfg.link.rolloff);
  r.number(link, "link", "noise_power_db", cfg.link.noise_power_db);
  r.number(link, "link", "bias", cfg.link.bias);

  const json* enc = r.section("encoder", {"j", "k", "y_max"});
  r.number(enc, "encoder", "j", cfg.encoder.j);
  r.number(enc, "encoder", "k", cfg.encoder.k);
  r.number(enc, "encoder", "y_max", cfg.encoder.y_max);

  const json* snn = r.section("snn", {"n_hidden", "tau_m_ms", "tau_s_ms", "v_th", "dt_ms",
                                      "surrogate_steepness", "plain_euler"});
  r.number(snn, "snn", "n_hidden", cfg.snn.n_hidden);
  r.number(snn, "snn", "tau_m_ms", cfg.snn.neuron.tau_m_ms);
  r.number(snn, "snn", "tau_s_ms", cfg.snn.neuron.tau_s_ms);
  r.number(snn, "snn", "v_th", cfg.snn.neuron.v_th);
  r.number(snn, "snn", "dt_ms", cfg.snn.neuron.dt_ms);
  r.number(snn, "snn", "surrogate_steepness", cfg.snn.neuron.surrogate_steepness);
  r.boolean(snn, "snn", "plain_euler", cfg.snn.neuron.plain_euler);

  const json* train = r.section("train", {"batch_size", "epochs_total", "epochs_joint",
                                          "lr", "n_tap", "eval_samples", "threads"});
  r.number(train, "train", "batch_size", cfg.train.batch_size);
  r.number(train, "train", "epochs_total", cfg.train.epochs_total);
  r.number(train, "train", "epochs_joint", cfg.train.epochs_joint);
  r.number(train, "train", "lr", cfg.train.lr);
  r.number(train, "train", "n_tap", cfg.train.n_tap);
  r.number(train, "train", "eval_samples", cfg.train.eval_samples);
  r.number(train, "train", "threads", cfg.train.threads);

  const json* policy = r.section("policy", {"perturbations", "sigma_pi2", "epsilon",
                                            "star_from_perturbations"});
  r.number(policy, "policy", "perturbations", cfg.policy.perturbations);
  r.number(policy, "policy", "sigma_pi2", cfg.policy.sigma_pi2);
  r.number(policy, "policy", "epsilon", cfg.policy.epsilon);
  r.boolean(policy, "policy", "star_from_perturbations", cfg.policy.star_from_perturbations);

  r.top_level_scan();
  errors = r.errors();
  return cfg;
}

}  // namespace

void ExperimentConfig::finalize() { policy.dim = 2 * encoder.j; }

void ExperimentConfig::validate() const {
  link.validate();
  if (encoder.j < 1) throw ConfigError("encoder.j must be >= 1");
  if (encoder.k < 1) throw ConfigError("encoder.k must be >= 1");
  if (encoder.y_max <= 0.0) throw ConfigError("encoder.y_max must be > 0");
  if (snn.n_hidden < 1) throw ConfigError("snn.n_hidden must be >= 1");
  snn.neuron.validate();
  if (train.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (train.epochs_total < 0) throw ConfigError("train.epochs_total must be >= 0");
  if (train.epochs_joint < 0 || train.epochs_joint > train.epochs_total)
    throw ConfigError("train.epochs_joint must lie in [0, epochs_total]");
  if (train.lr <= 0.0) throw ConfigError("train.lr must be > 0");
  if (train.n_tap != 7)
    throw ConfigError("train.n_tap must be 7 (the equalizer geometry is fixed)");
  if (train.eval_samples < 1) throw ConfigError("train.eval_samples must be >= 1");
  if (train.threads < 1) throw ConfigError("train.threads must be >= 1");
  if (policy.dim != 2 * encoder.j)
    throw ConfigError("policy.dim must equal 2*encoder.j");
  policy.validate();
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");

  std::vector<std::string> errors;
  ExperimentConfig cfg = read_config(root, errors);
  if (!errors.empty()) {
    std::string msg = "config: schema errors:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  cfg.finalize();
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json root;
  root["schema_version"] = kSchemaVersion;
  root["seed"] = cfg.seed;
  root["link"] = {{"baud_rate", cfg.link.baud_rate},
                  {"wavelength", cfg.link.wavelength},
                  {"dispersion_ps_nm_km", cfg.link.dispersion_ps_nm_km},
                  {"fiber_length", cfg.link.fiber_length},
                  {"oversampling", cfg.link.oversampling},
                  {"rolloff", cfg.link.rolloff},
                  {"noise_power_db", cfg.link.noise_power_db},
                  {"bias", cfg.link.bias}};
  root["encoder"] = {{"j", cfg.encoder.j}, {"k", cfg.encoder.k}, {"y_max", cfg.encoder.y_max}};
  root["snn"] = {{"n_hidden", cfg.snn.n_hidden},
                 {"tau_m_ms", cfg.snn.neuron.tau_m_ms},
                 {"tau_s_ms", cfg.snn.neuron.tau_s_ms},
                 {"v_th", cfg.snn.neuron.v_th},
                 {"dt_ms", cfg.snn.neuron.dt_ms},
                 {"surrogate_steepness", cfg.snn.neuron.surrogate_steepness},
                 {"plain_euler", cfg.snn.neuron.plain_euler}};
  root["train"] = {{"batch_size", cfg.train.batch_size},
                   {"epochs_total", cfg.train.epochs_total},
                   {"epochs_joint", cfg.train.epochs_joint},
                   {"lr", cfg.train.lr},
                   {"n_tap", cfg.train.n_tap},
                   {"eval_samples", cfg.train.eval_samples},
                   {"threads", cfg.train.threads}};
  root["policy"] = {{"perturbations", cfg.policy.perturbations},
                    {"sigma_pi2", cfg.policy.sigma_pi2},
                    {"epsilon", cfg.policy.epsilon},
                    {"star_from_perturbations", cfg.policy.star_from_perturbations}};
  return root.dump(2) + "\n";
}

void save_experiment_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("config: cannot write " + path);
  out << experiment_config_to_json(cfg);
}

void apply_profile(ExperimentConfig& cfg, const std::string& name) {
  if (name == "paper") {
    cfg.train.batch_size = 100000;
    cfg.train.epochs_total = 40000;
    cfg.train.epochs_joint = 10000;
    cfg.train.eval_samples = 10000000;
  } else if (name == "desk") {
    cfg.train.batch_size = 10000;
    cfg.train.epochs_total = 2000;
    cfg.train.epochs_joint = 500;
    cfg.train.eval_samples = 1000000;
  } else {
    throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
  }
}

}  // namespace spiketrace
