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

#include "spiketrace/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "spiketrace/parallel.hpp"

namespace spiketrace {
namespace {

constexpr std::size_t kBatchChunk = 256;  // fixed so reductions are order-stable

// Per-chunk gradient buffers; reduced in chunk order so the result is
// identical for any worker count.
struct BatchWorkspace {
  std::vector<Gradients> chunk_grads;
  std::vector<double> chunk_ce;

  void prepare(std::size_t n_chunks, SnnDims dims, bool want_grads) {
    chunk_ce.assign(n_chunks, 0.0);
    if (!want_grads) return;
    while (chunk_grads.size() < n_chunks) chunk_grads.emplace_back(dims);
    for (std::size_t c = 0; c < n_chunks; ++c) {
      if (!(chunk_grads[c].dims == dims)) chunk_grads[c] = Gradients(dims);
      chunk_grads[c].clear();
    }
  }
};

double batch_pass_ws(const TapMatrix& taps, const EncodingParams& enc,
                     const SnnParams& snn, const NeuronConfig& ncfg, int threads,
                     Gradients* grads, BatchWorkspace& ws) {
  const std::size_t n = taps.count();
  if (n == 0) throw std::invalid_argument("batch_pass: empty batch");
  const std::size_t n_chunks = (n + kBatchChunk - 1) / kBatchChunk;
  ws.prepare(n_chunks, snn.dims, grads != nullptr);

  parallel_chunks(n, kBatchChunk, threads,
                  [&](std::size_t c, std::size_t begin, std::size_t end) {
                    thread_local SpikeRaster raster;
                    thread_local ForwardTrace trace;
                    thread_local std::vector<double> grad_scores;
                    grad_scores.resize(static_cast<std::size_t>(snn.dims.n_out));
                    double ce_sum = 0.0;
                    for (std::size_t i = begin; i < end; ++i) {
                      encode_window(
                          std::span<const double>(taps.row(i),
                                                  static_cast<std::size_t>(taps.n_tap)),
                          enc, raster);
                      forward(raster, snn, ncfg, trace);
                      ce_sum += ce_loss_grad(trace.scores, taps.labels[i], grad_scores);
                      if (grads) backward(trace, grad_scores, snn, ncfg, ws.chunk_grads[c]);
                    }
                    ws.chunk_ce[c] = ce_sum;
                  });

  double total_ce = 0.0;
  for (std::size_t c = 0; c < n_chunks; ++c) total_ce += ws.chunk_ce[c];
  if (grads) {
    grads->clear();
    for (std::size_t c = 0; c < n_chunks; ++c) grads->add(ws.chunk_grads[c]);
    grads->scale(1.0 / static_cast<double>(n));
  }
  return total_ce / static_cast<double>(n);
}

TapMatrix draw_batch(const ExperimentConfig& cfg, int epoch) {
  RngStream rng = RngStream::derive(cfg.seed, Stream::kEpochData,
                                    static_cast<std::uint64_t>(epoch));
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(2 * cfg.train.batch_size));
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform_below(2));
  const PamFrame frame = map_bits_to_pam(bits);
  const ReceiveRecord record = simulate_link(frame, cfg.link, rng);
  return sliding_taps(record, cfg.train.n_tap);
}

}  // namespace

double batch_pass(const TapMatrix& taps, const EncodingParams& enc,
                  const SnnParams& snn, const NeuronConfig& ncfg, int threads,
                  Gradients* grads) {
  BatchWorkspace ws;
  return batch_pass_ws(taps, enc, snn, ncfg, threads, grads, ws);
}

RunRecord train(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  const SnnDims dims = cfg.dims();
  RngStream weight_rng = RngStream::derive(cfg.seed, Stream::kWeights);
  SnnParams snn = init_weights(dims, weight_rng);
  AdamState adam(dims);
  Gradients grads(dims);
  BatchWorkspace ws;

  const EncodingParams enc0 =
      EncodingParams::init(cfg.encoder.j, cfg.encoder.k, cfg.encoder.y_max);
  PolicyState pstate = PolicyState::init(theta_from_params(enc0));
  PolicyConfig pcfg = cfg.policy;
  pcfg.dim = 2 * cfg.encoder.j;

  RunRecord rec;
  rec.seed = cfg.seed;
  rec.ce_curve.reserve(static_cast<std::size_t>(cfg.train.epochs_total));

  SnnParams last_finite_snn = snn;
  std::vector<double> last_finite_theta = pstate.theta;
  std::vector<double> pg_losses(static_cast<std::size_t>(pcfg.perturbations));

  for (int epoch = 1; epoch <= cfg.train.epochs_total; ++epoch) {
    const bool joint = epoch <= cfg.train.epochs_joint;
    const TapMatrix taps = draw_batch(cfg, epoch);
    const std::vector<double>& active_theta = joint ? pstate.theta : pstate.theta_star;
    const EncodingParams enc =
        params_from_theta(active_theta, cfg.encoder.j, cfg.encoder.k);

    // Non-finite dynamics (exploded weights, non-finite losses) abort the run
    // and keep the last finite state for the checkpoint.
    try {
      const double mean_ce =
          batch_pass_ws(taps, enc, snn, cfg.snn.neuron, cfg.train.threads, &grads, ws);
      if (!std::isfinite(mean_ce)) throw std::domain_error("non-finite batch loss");
      optimizer_step(snn, grads, adam, cfg.train.lr);

      if (joint) {
        auto evaluator = [&](std::span<const double> theta) {
          const EncodingParams cand =
              params_from_theta(theta, cfg.encoder.j, cfg.encoder.k);
          const double l = batch_pass_ws(taps, cand, snn, cfg.snn.neuron,
                                         cfg.train.threads, nullptr, ws);
          if (!std::isfinite(l)) throw std::domain_error("non-finite encoder loss");
          return l;
        };
        RngStream pg_rng = RngStream::derive(cfg.seed, Stream::kPolicy,
                                             static_cast<std::uint64_t>(epoch));
        const double loss_theta = evaluator(pstate.theta);
        const auto perturbed = sample_perturbations(pstate.theta, pcfg, pg_rng);
        for (std::size_t b = 0; b < perturbed.size(); ++b)
          pg_losses[b] = evaluator(perturbed[b]);
        pstate = stabilized_update(pstate, perturbed, pg_losses, loss_theta, pcfg);
        rec.loss_star_curve.push_back(pstate.loss_star);
        std::vector<double> row;
        row.reserve(3 + pstate.theta.size());
        row.push_back(static_cast<double>(pstate.iteration));
        row.push_back(loss_theta);
        row.push_back(pstate.loss_star);
        row.insert(row.end(), pstate.theta.begin(), pstate.theta.end());
        rec.pg_trace.push_back(std::move(row));
      }

      rec.ce_curve.push_back(mean_ce);
      if (progress) progress(epoch, mean_ce, pstate.loss_star);
    } catch (const std::domain_error&) {
      snn = last_finite_snn;
      pstate.theta = last_finite_theta;
      rec.aborted = true;
      rec.aborted_epoch = epoch;
      break;
    }
    last_finite_snn = snn;
    last_finite_theta = pstate.theta;
  }

  // Deployed encoder: best-so-far theta once any PG update ran, otherwise the
  // initialization.
  const std::vector<double>& final_theta =
      std::isfinite(pstate.loss_star) ? pstate.theta_star : pstate.theta;
  rec.encoder = params_from_theta(final_theta, cfg.encoder.j, cfg.encoder.k);
  rec.snn = snn;

  if (!rec.aborted) {
    const Checkpoint ckpt{cfg, rec.encoder, rec.snn};
    rec.metrics = estimate_ber(ckpt, cfg.train.eval_samples, cfg.link.noise_power_db,
                               cfg.seed, cfg.train.threads);
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rec;
}

Checkpoint make_checkpoint(const ExperimentConfig& cfg, const RunRecord& record) {
  return Checkpoint{cfg, record.encoder, record.snn};
}

std::vector<SweepCell> sweep(const std::vector<int>& j_list, const std::vector<int>& k_list,
                             const ExperimentConfig& tmpl, const ProgressFn& progress) {
  if (j_list.empty() || k_list.empty())
    throw std::invalid_argument("sweep: J and K lists must be non-empty");
  std::vector<SweepCell> cells;
  cells.reserve(j_list.size() * k_list.size());
  for (int j : j_list) {
    for (int k : k_list) {
      SweepCell cell;
      cell.j = j;
      cell.k = k;
      ExperimentConfig cfg = tmpl;
      cfg.encoder.j = j;
      cfg.encoder.k = k;
      cfg.finalize();
      cfg.seed = RngStream::derive(tmpl.seed, Stream::kSweep, static_cast<std::uint64_t>(j),
                                   static_cast<std::uint64_t>(k))
                     .next_u64();
      try {
        cell.record = train(cfg, progress);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace spiketrace
