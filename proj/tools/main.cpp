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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spiketrace/csv.hpp"
#include "spiketrace/metrics.hpp"
#include "spiketrace/model.hpp"
#include "spiketrace/pipeline.hpp"

namespace fs = std::filesystem;
using namespace spiketrace;

namespace {

std::string utc_stamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  if (out.empty()) throw CLI::ValidationError("expected a comma-separated list");
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

// "-15..-22" or a single value.
std::pair<double, double> parse_range(const std::string& s) {
  const auto pos = s.find("..");
  if (pos == std::string::npos) {
    const double v = std::stod(s);
    return {v, v};
  }
  return {std::stod(s.substr(0, pos)), std::stod(s.substr(pos + 2))};
}

fs::path make_run_dir(const std::string& out_override, std::uint64_t seed) {
  fs::path dir = out_override.empty()
                     ? fs::path("runs") / (utc_stamp() + "-seed" + std::to_string(seed))
                     : fs::path(out_override);
  fs::create_directories(dir);
  return dir;
}

void write_loss_csv(const RunRecord& rec, int epochs_joint, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  CsvWriter csv(out);
  csv.field("epoch").field("ce").field("loss_star");
  csv.end_row();
  for (std::size_t e = 0; e < rec.ce_curve.size(); ++e) {
    csv.field(static_cast<long long>(e + 1)).field(rec.ce_curve[e]);
    if (e < rec.loss_star_curve.size() && static_cast<int>(e) < epochs_joint)
      csv.field(rec.loss_star_curve[e]);
    else
      csv.field("");
    csv.end_row();
  }
}

void write_pg_trace_csv(const RunRecord& rec, const fs::path& path) {
  if (rec.pg_trace.empty()) return;
  std::ofstream out(path, std::ios::binary);
  CsvWriter csv(out);
  csv.field("iteration").field("loss_theta").field("loss_star").field("theta");
  csv.end_row();
  for (const auto& row : rec.pg_trace) {
    csv.field(static_cast<long long>(row[0]));
    for (std::size_t i = 1; i < row.size(); ++i) csv.field(row[i]);
    csv.end_row();
  }
}

void write_run_json(const RunRecord& rec, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << "{\n  \"wall_seconds\": " << rec.wall_seconds
      << ",\n  \"epochs_run\": " << rec.ce_curve.size()
      << ",\n  \"aborted\": " << (rec.aborted ? "true" : "false")
      << ",\n  \"aborted_epoch\": " << rec.aborted_epoch << "\n}\n";
}

void print_summary(const MetricsReport& m) {
  std::printf("BER=%.6g [%.3g, %.3g]  Z_avg=%.2f (input %.2f + hidden %.2f)  #MAC=%lld\n",
              m.ber, m.wilson_lo, m.wilson_hi, m.z_avg, m.z_avg_input, m.z_avg_hidden,
              m.mac_count);
}

struct ConfigCli {
  std::string out_dir;

  // Option callbacks run in registration order, so the config file and the
  // profile are applied before any field override.
  void attach(CLI::App* cmd, ExperimentConfig& cfg, bool with_encoder_grid = true) {
    cmd->add_option_function<std::string>(
        "--config", [&cfg](const std::string& path) { cfg = load_experiment_config(path); },
        "experiment config JSON");
    cmd->add_option_function<std::string>(
           "--profile", [&cfg](const std::string& name) { apply_profile(cfg, name); },
           "apply a named schedule: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--out", out_dir, "output directory (default runs/<stamp>-seed<seed>)");
    cmd->add_option_function<std::uint64_t>(
           "--seed", [&cfg](std::uint64_t v) { cfg.seed = v; }, "master seed")
        ->envname("SPIKETRACE_SEED");
    cmd->add_option_function<int>(
        "--threads", [&cfg](int v) { cfg.train.threads = v; }, "worker threads");

    cmd->add_option_function<double>(
        "--baud-rate", [&cfg](double v) { cfg.link.baud_rate = v; }, "symbols/s");
    cmd->add_option_function<double>(
        "--wavelength", [&cfg](double v) { cfg.link.wavelength = v; }, "meters");
    cmd->add_option_function<double>(
        "--dispersion-ps-nm-km", [&cfg](double v) { cfg.link.dispersion_ps_nm_km = v; },
        "dispersion coefficient D");
    cmd->add_option_function<double>(
        "--fiber-length", [&cfg](double v) { cfg.link.fiber_length = v; }, "meters");
    cmd->add_option_function<int>(
        "--oversampling", [&cfg](int v) { cfg.link.oversampling = v; }, "samples/symbol");
    cmd->add_option_function<double>(
        "--rolloff", [&cfg](double v) { cfg.link.rolloff = v; }, "RRC rolloff");
    cmd->add_option_function<double>(
        "--noise-power-db", [&cfg](double v) { cfg.link.noise_power_db = v; },
        "noise power (dB)");
    cmd->add_option_function<double>(
        "--bias", [&cfg](double v) { cfg.link.bias = v; }, "modulation bias");

    if (with_encoder_grid) {
      cmd->add_option_function<int>(
          "--j", [&cfg](int v) { cfg.encoder.j = v; }, "encoder channels per tap");
      cmd->add_option_function<int>(
          "--k", [&cfg](int v) { cfg.encoder.k = v; }, "encoder time steps");
    }
    cmd->add_option_function<double>(
        "--y-max", [&cfg](double v) { cfg.encoder.y_max = v; }, "encoder input range");
    cmd->add_option_function<int>(
        "--n-hidden", [&cfg](int v) { cfg.snn.n_hidden = v; }, "hidden LIF neurons");

    cmd->add_option_function<long>(
        "--batch-size", [&cfg](long v) { cfg.train.batch_size = v; }, "symbols per epoch");
    cmd->add_option_function<int>(
        "--epochs-total", [&cfg](int v) { cfg.train.epochs_total = v; }, "training epochs");
    cmd->add_option_function<int>(
        "--epochs-joint", [&cfg](int v) { cfg.train.epochs_joint = v; },
        "epochs with encoder updates");
    cmd->add_option_function<double>(
        "--lr", [&cfg](double v) { cfg.train.lr = v; }, "Adam learning rate");
    cmd->add_option_function<double>(
        "--eval-samples", [&cfg](double v) { cfg.train.eval_samples = std::llround(v); },
        "symbols for the final evaluation");

    cmd->add_option_function<int>(
        "--b", [&cfg](int v) { cfg.policy.perturbations = v; }, "policy perturbations");
    cmd->add_option_function<double>(
        "--sigma-pi2", [&cfg](double v) { cfg.policy.sigma_pi2 = v; }, "policy variance");
    cmd->add_option_function<double>(
        "--epsilon", [&cfg](double v) { cfg.policy.epsilon = v; }, "policy learning rate");
  }

};

int cmd_train(ExperimentConfig cfg, const ConfigCli& cli, bool quiet) {
  cfg.finalize();
  cfg.validate();
  const fs::path dir = make_run_dir(cli.out_dir, cfg.seed);
  save_experiment_config(cfg, (dir / "config.json").string());

  int last_logged = 0;
  const auto progress = [&](int epoch, double ce, double loss_star) {
    if (quiet) return;
    if (epoch - last_logged >= 100 || epoch == 1) {
      last_logged = epoch;
      std::fprintf(stderr, "epoch %6d  ce %.5f  encoder loss* %.5f\n", epoch, ce, loss_star);
    }
  };
  const RunRecord rec = train(cfg, progress);

  write_loss_csv(rec, cfg.train.epochs_joint, dir / "loss.csv");
  write_pg_trace_csv(rec, dir / "pg_trace.csv");
  write_run_json(rec, dir / "run.json");
  save_checkpoint(make_checkpoint(cfg, rec), (dir / "model.json").string());
  if (rec.aborted) {
    std::fprintf(stderr,
                 "training aborted at epoch %d (non-finite loss); last finite state "
                 "saved to %s\n",
                 rec.aborted_epoch, (dir / "model.json").c_str());
    return 1;
  }
  save_metrics(rec.metrics, (dir / "metrics.json").string());
  std::printf("run dir: %s\n", dir.c_str());
  print_summary(rec.metrics);
  return 0;
}

int cmd_sweep(ExperimentConfig tmpl, const ConfigCli& cli, const std::string& j_spec,
              const std::string& k_spec) {
  tmpl.finalize();
  const auto j_list = parse_int_list(j_spec);
  const auto k_list = parse_int_list(k_spec);
  const fs::path dir = make_run_dir(cli.out_dir, tmpl.seed);
  save_experiment_config(tmpl, (dir / "config.json").string());

  const auto cells = sweep(j_list, k_list, tmpl);

  std::ofstream out(dir / "sweep.csv", std::ios::binary);
  CsvWriter csv(out);
  csv.field("j").field("k").field("ok").field("ber").field("ber_wilson_lo")
      .field("ber_wilson_hi").field("ser").field("z_avg").field("z_avg_input")
      .field("z_avg_hidden").field("mac_count").field("param_count").field("error");
  csv.end_row();
  for (const auto& cell : cells) {
    csv.field(cell.j).field(cell.k).field(cell.ok ? "1" : "0");
    if (cell.ok && cell.record) {
      const MetricsReport& m = cell.record->metrics;
      csv.field(m.ber).field(m.wilson_lo).field(m.wilson_hi).field(m.ser)
          .field(m.z_avg).field(m.z_avg_input).field(m.z_avg_hidden)
          .field(m.mac_count).field(m.param_count).field("");
      const fs::path cell_dir = dir / ("j" + std::to_string(cell.j) + "k" + std::to_string(cell.k));
      fs::create_directories(cell_dir);
      ExperimentConfig cell_cfg = tmpl;
      cell_cfg.encoder.j = cell.j;
      cell_cfg.encoder.k = cell.k;
      cell_cfg.finalize();
      cell_cfg.seed = cell.record->seed;
      save_checkpoint(Checkpoint{cell_cfg, cell.record->encoder, cell.record->snn},
                      (cell_dir / "model.json").string());
      save_metrics(m, (cell_dir / "metrics.json").string());
      std::printf("J=%-2d K=%-2d  ", cell.j, cell.k);
      print_summary(m);
    } else {
      for (int i = 0; i < 9; ++i) csv.field("");
      csv.field(cell.error);
      std::printf("J=%-2d K=%-2d  FAILED: %s\n", cell.j, cell.k, cell.error.c_str());
    }
    csv.end_row();
  }
  std::printf("sweep dir: %s\n", dir.c_str());
  return 0;
}

int cmd_eval(const std::string& ckpt_path, double noise_db, double samples,
             const std::string& out_path, std::uint64_t seed, int threads) {
  if (!fs::exists(ckpt_path))
    throw ConfigError("eval: checkpoint not found: " + ckpt_path);
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const MetricsReport m =
      estimate_ber(ckpt, std::llround(samples), noise_db, seed, threads);
  if (!out_path.empty()) save_metrics(m, out_path);
  print_summary(m);
  return 0;
}

int cmd_curve(const std::string& ckpt_path, const std::string& range_spec, double step,
              double samples, const std::string& out_path, std::uint64_t seed,
              int threads) {
  if (!fs::exists(ckpt_path))
    throw ConfigError("curve: checkpoint not found: " + ckpt_path);
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const auto [a, b] = parse_range(range_spec);
  const double lo = std::min(a, b), hi = std::max(a, b);

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    os = &file;
  }
  CsvWriter csv(*os);
  csv.field("noise_db").field("ber").field("wilson_lo").field("wilson_hi");
  csv.end_row();
  int i = 0;
  for (double db = hi; db >= lo - 1e-9; db -= step, ++i) {
    const MetricsReport m = estimate_ber(ckpt, std::llround(samples), db,
                                         seed + static_cast<std::uint64_t>(i), threads);
    csv.field(db).field(m.ber).field(m.wilson_lo).field(m.wilson_hi);
    csv.end_row();
    std::fprintf(stderr, "noise %+.1f dB: BER %.6g\n", db, m.ber);
  }
  return 0;
}

int cmd_encode_demo(int j, int k, const std::string& alpha_spec,
                    const std::string& chi_spec, double y_max, double x_min, double x_max,
                    double x_step, const std::string& out_path) {
  EncodingParams params = EncodingParams::init(j, k, y_max);
  if (!alpha_spec.empty()) {
    auto alpha = parse_double_list(alpha_spec);
    if (alpha.size() == 1) alpha.assign(static_cast<std::size_t>(j), alpha[0]);
    params.alpha = alpha;
  }
  if (!chi_spec.empty()) params.chi = parse_double_list(chi_spec);
  params.validate();

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    os = &file;
  }
  CsvWriter csv(*os);
  csv.field("x");
  for (int c = 1; c <= j; ++c) csv.field("k_" + std::to_string(c));
  csv.end_row();
  const auto steps = static_cast<long>(std::llround((x_max - x_min) / x_step));
  for (long i = 0; i <= steps; ++i) {
    const double x = x_min + static_cast<double>(i) * x_step;
    csv.field(x);
    for (int c = 0; c < j; ++c) csv.field(fire_time_discrete(x, c, params));
    csv.end_row();
  }
  return 0;
}

int cmd_pg_bench(const std::string& target, int dim, int iterations, std::uint64_t seed,
                 const std::string& out_path) {
  PolicyConfig cfg;
  cfg.dim = dim;
  RngStream rng = RngStream::derive(seed, Stream::kBench);
  std::vector<double> c(static_cast<std::size_t>(dim)), theta0(static_cast<std::size_t>(dim));
  for (auto& x : c) x = rng.uniform(-1.0, 1.0);
  double nrm = 0.0;
  std::vector<double> dir(static_cast<std::size_t>(dim));
  for (auto& x : dir) x = rng.gaussian();
  for (double x : dir) nrm += x * x;
  nrm = std::sqrt(nrm);
  for (int i = 0; i < dim; ++i) theta0[static_cast<std::size_t>(i)] =
      c[static_cast<std::size_t>(i)] + dir[static_cast<std::size_t>(i)] / nrm;

  LossEvaluator eval;
  if (target == "quadratic") {
    eval = [c](std::span<const double> th) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < th.size(); ++i) d2 += (th[i] - c[i]) * (th[i] - c[i]);
      return d2 + 0.1;
    };
  } else if (target == "staircase") {
    eval = [c](std::span<const double> th) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < th.size(); ++i) d2 += (th[i] - c[i]) * (th[i] - c[i]);
      return std::floor(4.0 * std::sqrt(d2));
    };
  } else {
    throw ConfigError("pg-bench: unknown target '" + target + "'");
  }

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    os = &file;
  }
  CsvWriter csv(*os);
  csv.field("iteration").field("loss_theta").field("loss_star").field("theta");
  csv.end_row();
  const auto observer = [&](const PolicyState& s) {
    csv.field(s.iteration).field(s.history.back().second).field(s.loss_star);
    for (double t : s.theta) csv.field(t);
    csv.end_row();
  };
  const PolicyState final_state = optimize(eval, cfg, iterations, rng, theta0, observer);
  std::fprintf(stderr, "final loss_star=%.6g\n", final_state.loss_star);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spiketrace: spike-encoding optimization lab for an SNN equalizer "
               "over a simulated IM/DD link"};
  app.require_subcommand(1);

  ExperimentConfig train_cfg, sweep_cfg;
  ConfigCli train_cli, sweep_cli;
  bool quiet = false;

  CLI::App* train_cmd = app.add_subcommand("train", "train the equalizer");
  train_cli.attach(train_cmd, train_cfg);
  train_cmd->add_flag("--quiet", quiet, "suppress progress output");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "independent runs over a (J, K) grid");
  std::string j_spec = "4,6,8,10", k_spec = "4,6,8,10";
  sweep_cli.attach(sweep_cmd, sweep_cfg, /*with_encoder_grid=*/false);
  sweep_cmd->add_option("--j", j_spec, "comma-separated J values");
  sweep_cmd->add_option("--k", k_spec, "comma-separated K values");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Monte-Carlo BER of a checkpoint");
  std::string eval_ckpt, eval_out;
  double eval_noise = -20.0, eval_samples = 1e7;
  std::uint64_t eval_seed = 1;
  int eval_threads = 1;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "model.json path")->required();
  eval_cmd->add_option("--noise", eval_noise, "noise power in dB");
  eval_cmd->add_option("--samples", eval_samples, "number of symbols (e.g. 1e7)");
  eval_cmd->add_option("--out", eval_out, "metrics JSON output path");
  eval_cmd->add_option("--seed", eval_seed, "evaluation seed")->envname("SPIKETRACE_SEED");
  eval_cmd->add_option("--threads", eval_threads, "worker threads");

  CLI::App* curve_cmd = app.add_subcommand("curve", "BER vs noise power sweep");
  std::string curve_ckpt, curve_range = "-15..-22", curve_out;
  double curve_step = 1.0, curve_samples = 1e6;
  std::uint64_t curve_seed = 1;
  int curve_threads = 1;
  curve_cmd->add_option("--checkpoint", curve_ckpt, "model.json path")->required();
  curve_cmd->add_option("--noise", curve_range, "noise range, e.g. -15..-22");
  curve_cmd->add_option("--step", curve_step, "dB step");
  curve_cmd->add_option("--samples", curve_samples, "symbols per point");
  curve_cmd->add_option("--out", curve_out, "CSV output path (default stdout)");
  curve_cmd->add_option("--seed", curve_seed, "evaluation seed")->envname("SPIKETRACE_SEED");
  curve_cmd->add_option("--threads", curve_threads, "worker threads");

  CLI::App* demo_cmd = app.add_subcommand("encode-demo",
                                          "print the discrete encoding characteristic");
  int demo_j = 3, demo_k = 4;
  std::string demo_alpha, demo_chi, demo_out;
  double demo_ymax = 7.0, demo_xmin = 0.0, demo_xmax = 1.0, demo_xstep = 0.001;
  demo_cmd->add_option("--j", demo_j, "channels");
  demo_cmd->add_option("--k", demo_k, "time steps");
  demo_cmd->add_option("--alpha", demo_alpha, "slope(s), single value or per channel");
  demo_cmd->add_option("--chi", demo_chi, "references, comma separated");
  demo_cmd->add_option("--y-max", demo_ymax, "range used for default parameters");
  demo_cmd->add_option("--x-min", demo_xmin, "grid start");
  demo_cmd->add_option("--x-max", demo_xmax, "grid end");
  demo_cmd->add_option("--x-step", demo_xstep, "grid step");
  demo_cmd->add_option("--out", demo_out, "CSV output path (default stdout)");

  CLI::App* bench_cmd = app.add_subcommand("pg-bench",
                                           "policy-gradient optimizer on a test objective");
  std::string bench_target = "quadratic", bench_out;
  int bench_dim = 20, bench_iters = 200;
  std::uint64_t bench_seed = 1;
  bench_cmd->add_option("--target", bench_target, "quadratic or staircase");
  bench_cmd->add_option("--dim", bench_dim, "parameter dimension");
  bench_cmd->add_option("--iterations", bench_iters, "iterations");
  bench_cmd->add_option("--seed", bench_seed, "seed")->envname("SPIKETRACE_SEED");
  bench_cmd->add_option("--out", bench_out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
    if (train_cmd->parsed()) return cmd_train(train_cfg, train_cli, quiet);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_cfg, sweep_cli, j_spec, k_spec);
    if (eval_cmd->parsed())
      return cmd_eval(eval_ckpt, eval_noise, eval_samples, eval_out, eval_seed, eval_threads);
    if (curve_cmd->parsed())
      return cmd_curve(curve_ckpt, curve_range, curve_step, curve_samples, curve_out,
                       curve_seed, curve_threads);
    if (demo_cmd->parsed())
      return cmd_encode_demo(demo_j, demo_k, demo_alpha, demo_chi, demo_ymax, demo_xmin,
                             demo_xmax, demo_xstep, demo_out);
    if (bench_cmd->parsed())
      return cmd_pg_bench(bench_target, bench_dim, bench_iters, bench_seed, bench_out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
