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

#include "spiketrace/snn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spiketrace {
namespace {

inline double surrogate_derivative(double v_pre, double v_th, double gamma) {
  const double d = gamma * std::abs(v_pre - v_th) + 1.0;
  return 1.0 / (d * d);
}

// Continuous threshold relaxation used in SpikeMode::kSmooth. Its exact
// derivative is (gamma/2) times the surrogate above, so the smooth mode
// exercises the identical backward plumbing with a finite-difference-exact
// derivative.
inline double smooth_spike(double v_pre, double v_th, double gamma) {
  const double u = v_pre - v_th;
  return 0.5 * (1.0 + gamma * u / (1.0 + gamma * std::abs(u)));
}

inline double spike_derivative(double v_pre, const NeuronConfig& cfg) {
  const double g = surrogate_derivative(v_pre, cfg.v_th, cfg.surrogate_steepness);
  return cfg.spike_mode == SpikeMode::kSmooth ? 0.5 * cfg.surrogate_steepness * g : g;
}

}  // namespace

double NeuronConfig::beta_m() const {
  return plain_euler ? 1.0 - dt_ms / tau_m_ms : std::exp(-dt_ms / tau_m_ms);
}

double NeuronConfig::beta_s() const {
  return plain_euler ? 1.0 - dt_ms / tau_s_ms : std::exp(-dt_ms / tau_s_ms);
}

void NeuronConfig::validate() const {
  if (dt_ms <= 0.0) throw std::invalid_argument("snn.dt_ms must be > 0");
  if (tau_m_ms <= dt_ms || tau_s_ms <= dt_ms)
    throw std::invalid_argument("snn: time constants must exceed dt");
  if (v_th <= 0.0) throw std::invalid_argument("snn.v_th must be > 0");
  if (surrogate_steepness <= 0.0)
    throw std::invalid_argument("snn.surrogate_steepness must be > 0");
  const double bm = beta_m(), bs = beta_s();
  if (!(bm > 0.0 && bm < 1.0 && bs > 0.0 && bs < 1.0))
    throw std::invalid_argument("snn: decay factors must lie in (0, 1)");
}

SnnParams init_weights(SnnDims dims, RngStream& rng) {
  if (dims.n_in < 1 || dims.n_hidden < 1 || dims.n_out < 1)
    throw std::invalid_argument("init_weights: dimensions must be positive");
  SnnParams p;
  p.dims = dims;
  p.w_in_t.resize(static_cast<std::size_t>(dims.n_in) * dims.n_hidden);
  p.w_out_t.resize(static_cast<std::size_t>(dims.n_hidden) * dims.n_out);
  const double bound_in = 1.0 / std::sqrt(static_cast<double>(dims.n_in));
  const double bound_out = 1.0 / std::sqrt(static_cast<double>(dims.n_hidden));
  for (auto& w : p.w_in_t) w = rng.uniform(-bound_in, bound_in);
  for (auto& w : p.w_out_t) w = rng.uniform(-bound_out, bound_out);
  p.revision = 1;
  return p;
}

void forward(const SpikeRaster& raster, const SnnParams& params,
             const NeuronConfig& cfg, ForwardTrace& trace) {
  const SnnDims dims = params.dims;
  if (raster.n_columns != dims.n_in)
    throw std::invalid_argument("forward: raster columns do not match n_in");
  const int k_steps = raster.k_steps;
  const int nh = dims.n_hidden;
  const int no = dims.n_out;

  trace.dims = dims;
  trace.k_steps = k_steps;
  trace.params_revision = params.revision;
  trace.syn_current.resize(static_cast<std::size_t>(k_steps) * nh);
  trace.v_pre.resize(static_cast<std::size_t>(k_steps) * nh);
  trace.spikes.resize(static_cast<std::size_t>(k_steps) * nh);
  trace.v_out.resize(static_cast<std::size_t>(k_steps) * no);
  trace.scores.assign(static_cast<std::size_t>(no), 0.0);
  trace.argmax_step.assign(static_cast<std::size_t>(no), 0);
  trace.hidden_spike_count = 0;
  trace.input_fire_row = raster.fire_row;
  trace.input_row_offsets = raster.row_offsets;
  trace.input_cols_by_row = raster.cols_by_row;

  thread_local std::vector<double> v_hid, i_out, v_out_state;
  v_hid.assign(static_cast<std::size_t>(nh), 0.0);
  i_out.assign(static_cast<std::size_t>(no), 0.0);
  v_out_state.assign(static_cast<std::size_t>(no), 0.0);

  const double bm = cfg.beta_m();
  const double bs = cfg.beta_s();
  const bool smooth = cfg.spike_mode == SpikeMode::kSmooth;

  const double* prev_i = nullptr;
  for (int k = 0; k < k_steps; ++k) {
    double* i_h = trace.syn_current.data() + static_cast<std::size_t>(k) * nh;
    double* vp = trace.v_pre.data() + static_cast<std::size_t>(k) * nh;
    double* z = trace.spikes.data() + static_cast<std::size_t>(k) * nh;
    double* vo = trace.v_out.data() + static_cast<std::size_t>(k) * no;

    if (prev_i) {
      for (int h = 0; h < nh; ++h) i_h[h] = bs * prev_i[h];
    } else {
      std::fill(i_h, i_h + nh, 0.0);
    }
    for (std::uint16_t col : raster.columns_at(k)) {
      const double* w = params.w_in_t.data() + static_cast<std::size_t>(col) * nh;
      for (int h = 0; h < nh; ++h) i_h[h] += w[h];
    }

    for (int o = 0; o < no; ++o) i_out[o] *= bs;
    for (int h = 0; h < nh; ++h) {
      const double v = bm * v_hid[h] + i_h[h];
      vp[h] = v;
      double zh;
      if (smooth) {
        zh = smooth_spike(v, cfg.v_th, cfg.surrogate_steepness);
      } else {
        zh = (v >= cfg.v_th) ? 1.0 : 0.0;
      }
      z[h] = zh;
      v_hid[h] = v - cfg.v_th * zh;
      if (zh != 0.0) {
        if (!smooth) ++trace.hidden_spike_count;
        const double* w = params.w_out_t.data() + static_cast<std::size_t>(h) * no;
        for (int o = 0; o < no; ++o) i_out[o] += zh * w[o];
      }
    }

    for (int o = 0; o < no; ++o) {
      v_out_state[o] = bm * v_out_state[o] + i_out[o];
      vo[o] = v_out_state[o];
      if (k == 0 || v_out_state[o] > trace.scores[static_cast<std::size_t>(o)]) {
        trace.scores[static_cast<std::size_t>(o)] = v_out_state[o];
        trace.argmax_step[static_cast<std::size_t>(o)] = k;
      }
    }
    prev_i = i_h;
  }

  for (double s : trace.scores)
    if (!std::isfinite(s)) throw std::domain_error("forward: non-finite scores");
}

CeLoss ce_loss(std::span<const double> scores, int label) {
  CeLoss out;
  out.grad_scores.resize(scores.size());
  out.loss = ce_loss_grad(scores, label, out.grad_scores);
  return out;
}

double ce_loss_grad(std::span<const double> scores, int label,
                    std::span<double> grad_out) {
  if (label < 0 || static_cast<std::size_t>(label) >= scores.size())
    throw std::invalid_argument("ce_loss: label out of range");
  if (grad_out.size() != scores.size())
    throw std::invalid_argument("ce_loss: grad buffer size mismatch");
  const double max_s = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    grad_out[c] = std::exp(scores[c] - max_s);
    sum += grad_out[c];
  }
  for (std::size_t c = 0; c < scores.size(); ++c) grad_out[c] /= sum;
  const double loss = std::log(sum) + max_s - scores[static_cast<std::size_t>(label)];
  grad_out[static_cast<std::size_t>(label)] -= 1.0;
  return loss;
}

Gradients::Gradients(SnnDims d) : dims(d) {
  gw_in_t.assign(static_cast<std::size_t>(d.n_in) * d.n_hidden, 0.0);
  gw_out_t.assign(static_cast<std::size_t>(d.n_hidden) * d.n_out, 0.0);
}

void Gradients::clear() {
  std::fill(gw_in_t.begin(), gw_in_t.end(), 0.0);
  std::fill(gw_out_t.begin(), gw_out_t.end(), 0.0);
}

void Gradients::scale(double c) {
  for (auto& g : gw_in_t) g *= c;
  for (auto& g : gw_out_t) g *= c;
}

void Gradients::add(const Gradients& other) {
  if (!(other.dims == dims)) throw std::invalid_argument("Gradients::add: shape mismatch");
  for (std::size_t i = 0; i < gw_in_t.size(); ++i) gw_in_t[i] += other.gw_in_t[i];
  for (std::size_t i = 0; i < gw_out_t.size(); ++i) gw_out_t[i] += other.gw_out_t[i];
}

void backward(const ForwardTrace& trace, std::span<const double> grad_scores,
              const SnnParams& params, const NeuronConfig& cfg, Gradients& grads) {
  const SnnDims dims = params.dims;
  if (!(trace.dims == dims) || !(grads.dims == dims))
    throw std::invalid_argument("backward: dimension mismatch");
  if (trace.params_revision != params.revision)
    throw std::logic_error("backward: stale trace (params changed since forward)");
  if (grad_scores.size() != static_cast<std::size_t>(dims.n_out))
    throw std::invalid_argument("backward: grad_scores size mismatch");

  const int k_steps = trace.k_steps;
  const int nh = dims.n_hidden;
  const int no = dims.n_out;
  const double bm = cfg.beta_m();
  const double bs = cfg.beta_s();

  thread_local std::vector<double> a_vo, a_io, a_vh, a_ih, a_vpre;
  a_vo.assign(static_cast<std::size_t>(no), 0.0);
  a_io.assign(static_cast<std::size_t>(no), 0.0);
  a_vh.assign(static_cast<std::size_t>(nh), 0.0);
  a_ih.assign(static_cast<std::size_t>(nh), 0.0);
  a_vpre.assign(static_cast<std::size_t>(nh), 0.0);

  for (int k = k_steps - 1; k >= 0; --k) {
    const double* vp = trace.v_pre.data() + static_cast<std::size_t>(k) * nh;
    const double* z = trace.spikes.data() + static_cast<std::size_t>(k) * nh;

    for (int o = 0; o < no; ++o) {
      a_vo[o] *= bm;
      if (trace.argmax_step[static_cast<std::size_t>(o)] == k)
        a_vo[o] += grad_scores[static_cast<std::size_t>(o)];
      a_io[o] = bs * a_io[o] + a_vo[o];
    }

    for (int h = 0; h < nh; ++h) {
      const double zh = z[h];
      double a_z = -cfg.v_th * a_vh[h];
      if (zh != 0.0) {
        const double* w = params.w_out_t.data() + static_cast<std::size_t>(h) * no;
        double* gw = grads.gw_out_t.data() + static_cast<std::size_t>(h) * no;
        double dot = 0.0;
        for (int o = 0; o < no; ++o) {
          gw[o] += zh * a_io[o];
          dot += w[o] * a_io[o];
        }
        a_z += dot;
      } else {
        const double* w = params.w_out_t.data() + static_cast<std::size_t>(h) * no;
        for (int o = 0; o < no; ++o) a_z += w[o] * a_io[o];
      }
      a_vpre[h] = a_vh[h] + a_z * spike_derivative(vp[h], cfg);
      a_ih[h] = bs * a_ih[h] + a_vpre[h];
      a_vh[h] = bm * a_vpre[h];
    }

    const auto begin = trace.input_row_offsets[static_cast<std::size_t>(k)];
    const auto end = trace.input_row_offsets[static_cast<std::size_t>(k) + 1];
    for (auto idx = begin; idx < end; ++idx) {
      const std::uint16_t col = trace.input_cols_by_row[static_cast<std::size_t>(idx)];
      double* gw = grads.gw_in_t.data() + static_cast<std::size_t>(col) * nh;
      for (int h = 0; h < nh; ++h) gw[h] += a_ih[h];
    }
  }
}

AdamState::AdamState(SnnDims dims) {
  m_in.assign(static_cast<std::size_t>(dims.n_in) * dims.n_hidden, 0.0);
  v_in.assign(m_in.size(), 0.0);
  m_out.assign(static_cast<std::size_t>(dims.n_hidden) * dims.n_out, 0.0);
  v_out.assign(m_out.size(), 0.0);
}

void optimizer_step(SnnParams& params, const Gradients& grads, AdamState& state,
                    double lr) {
  if (!(grads.dims == params.dims))
    throw std::invalid_argument("optimizer_step: shape mismatch");
  for (double g : grads.gw_in_t)
    if (!std::isfinite(g)) throw std::domain_error("optimizer_step: non-finite gradient");
  for (double g : grads.gw_out_t)
    if (!std::isfinite(g)) throw std::domain_error("optimizer_step: non-finite gradient");

  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  auto update = [&](std::vector<double>& w, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  };
  update(params.w_in_t, grads.gw_in_t, state.m_in, state.v_in);
  update(params.w_out_t, grads.gw_out_t, state.m_out, state.v_out);
  ++params.revision;
}

}  // namespace spiketrace
