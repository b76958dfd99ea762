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

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "spiketrace/snn.hpp"

using namespace spiketrace;

namespace {

SpikeRaster make_raster(int k_steps, int n_cols,
                        const std::vector<std::pair<int, int>>& spikes /* (row, col) */) {
  SpikeRaster r;
  r.k_steps = k_steps;
  r.n_columns = n_cols;
  r.fire_row.assign(static_cast<std::size_t>(n_cols), static_cast<std::uint16_t>(k_steps));
  for (auto [row, col] : spikes) r.fire_row[static_cast<std::size_t>(col)] =
      static_cast<std::uint16_t>(row);
  r.row_offsets.assign(static_cast<std::size_t>(k_steps) + 1, 0);
  for (auto [row, col] : spikes) ++r.row_offsets[static_cast<std::size_t>(row) + 1];
  for (int i = 0; i < k_steps; ++i)
    r.row_offsets[static_cast<std::size_t>(i) + 1] += r.row_offsets[static_cast<std::size_t>(i)];
  r.cols_by_row.resize(spikes.size());
  std::vector<int> cursor(r.row_offsets.begin(), r.row_offsets.end() - 1);
  for (auto [row, col] : spikes)
    r.cols_by_row[static_cast<std::size_t>(cursor[static_cast<std::size_t>(row)]++)] =
        static_cast<std::uint16_t>(col);
  return r;
}

SnnParams zero_params(SnnDims dims) {
  SnnParams p;
  p.dims = dims;
  p.w_in_t.assign(static_cast<std::size_t>(dims.n_in) * dims.n_hidden, 0.0);
  p.w_out_t.assign(static_cast<std::size_t>(dims.n_hidden) * dims.n_out, 0.0);
  p.revision = 1;
  return p;
}

double total_loss(const SpikeRaster& raster, const SnnParams& p, const NeuronConfig& cfg,
                  int label) {
  ForwardTrace t;
  forward(raster, p, cfg, t);
  return ce_loss(t.scores, label).loss;
}

}  // namespace

TEST_SUITE_BEGIN("snn");

TEST_CASE("neuron config decay factors") {
  NeuronConfig cfg;
  CHECK(cfg.beta_m() == doctest::Approx(std::exp(-0.5 / 6.0)).epsilon(1e-15));
  CHECK(cfg.beta_s() == doctest::Approx(std::exp(-0.5 / 6.0)).epsilon(1e-15));
  cfg.plain_euler = true;
  CHECK(cfg.beta_m() == doctest::Approx(1.0 - 0.5 / 6.0).epsilon(1e-15));
  cfg.validate();

  NeuronConfig bad;
  bad.dt_ms = 7.0;  // exceeds the time constants
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("an all-silent raster leaves the network at rest") {
  const SnnDims dims{.n_in = 6, .n_hidden = 5, .n_out = 4};
  RngStream rng(1);
  const SnnParams p = init_weights(dims, rng);
  const SpikeRaster r = make_raster(8, 6, {});
  ForwardTrace t;
  forward(r, p, NeuronConfig{}, t);
  for (double s : t.scores) CHECK(s == 0.0);
  CHECK(t.hidden_spike_count == 0);
  for (double v : t.v_pre) CHECK(v == 0.0);
}

TEST_CASE("one input spike injects exactly the corresponding weight column") {
  const SnnDims dims{.n_in = 3, .n_hidden = 4, .n_out = 4};
  SnnParams p = zero_params(dims);
  for (int h = 0; h < 4; ++h) p.w_in(h, 1) = 0.1 * (h + 1);
  const SpikeRaster r = make_raster(4, 3, {{2, 1}});
  ForwardTrace t;
  forward(r, p, NeuronConfig{}, t);
  for (int h = 0; h < 4; ++h) {
    CHECK(t.syn_current[2 * 4 + h] == doctest::Approx(0.1 * (h + 1)).epsilon(1e-15));
    CHECK(t.syn_current[1 * 4 + h] == 0.0);
  }
}

TEST_CASE("subthreshold membrane follows the closed-form double exponential") {
  // Single input, single hidden neuron, w = 0.05, spike at k = 0. With
  // beta_s = beta_m = b the recurrences give i(k) = w b^k and
  // v(k) = w (k+1) b^k, which stays well below threshold for K = 4.
  const SnnDims dims{.n_in = 1, .n_hidden = 1, .n_out = 4};
  SnnParams p = zero_params(dims);
  const double w = 0.05;
  p.w_in(0, 0) = w;
  const NeuronConfig cfg;
  const double b = cfg.beta_m();
  const SpikeRaster r = make_raster(4, 1, {{0, 0}});
  ForwardTrace t;
  forward(r, p, cfg, t);
  CHECK(t.hidden_spike_count == 0);
  for (int k = 0; k < 4; ++k) {
    const double expect_i = w * std::pow(b, k);
    const double expect_v = w * (k + 1) * std::pow(b, k);
    CHECK(t.syn_current[static_cast<std::size_t>(k)] ==
          doctest::Approx(expect_i).epsilon(1e-12));
    CHECK(t.v_pre[static_cast<std::size_t>(k)] ==
          doctest::Approx(expect_v).epsilon(1e-12));
  }
}

TEST_CASE("cross entropy") {
  SUBCASE("uniform scores give ln 4") {
    const std::vector<double> scores(4, 0.7);
    const CeLoss l = ce_loss(scores, 2);
    CHECK(l.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }
  SUBCASE("saturated correct class gives ~zero loss") {
    const std::vector<double> scores = {10.0, -10.0, -10.0, -10.0};
    CHECK(ce_loss(scores, 0).loss < 1e-8);
  }
  SUBCASE("gradient sums to zero") {
    const std::vector<double> scores = {0.3, -1.2, 2.0, 0.1};
    const CeLoss l = ce_loss(scores, 1);
    double sum = 0;
    for (double g : l.grad_scores) sum += g;
    CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("label range") {
    const std::vector<double> scores(4, 0.0);
    CHECK_THROWS_AS(ce_loss(scores, 4), std::invalid_argument);
    CHECK_THROWS_AS(ce_loss(scores, -1), std::invalid_argument);
  }
}

TEST_CASE("zero readout gradient produces zero weight gradients") {
  const SnnDims dims{.n_in = 4, .n_hidden = 3, .n_out = 4};
  RngStream rng(5);
  const SnnParams p = init_weights(dims, rng);
  const SpikeRaster r = make_raster(5, 4, {{0, 0}, {2, 3}, {4, 1}});
  ForwardTrace t;
  forward(r, p, NeuronConfig{}, t);
  Gradients g(dims);
  const std::vector<double> zero(4, 0.0);
  backward(t, zero, p, NeuronConfig{}, g);
  for (double v : g.gw_in_t) CHECK(v == 0.0);
  for (double v : g.gw_out_t) CHECK(v == 0.0);
}

TEST_CASE("smooth-relaxation gradients match central finite differences") {
  // The hard-threshold network is flat wherever no spike flips, so the
  // surrogate path cannot be checked against finite differences directly.
  // The smooth spike mode runs the identical BPTT plumbing with the exact
  // derivative of the relaxed threshold; weights are scaled so no hidden
  // neuron reaches v_th.
  NeuronConfig cfg;
  cfg.spike_mode = SpikeMode::kSmooth;
  cfg.surrogate_steepness = 4.0;

  int trials_done = 0;
  std::uint64_t seed = 100;
  while (trials_done < 20) {
    RngStream rng(seed++);
    const SnnDims dims{.n_in = 1 + static_cast<int>(rng.uniform_below(4)),
                       .n_hidden = 1 + static_cast<int>(rng.uniform_below(3)),
                       .n_out = 4};
    const int k_steps = 2 + static_cast<int>(rng.uniform_below(5));
    SnnParams p = init_weights(dims, rng);

    std::vector<std::pair<int, int>> spikes;
    for (int col = 0; col < dims.n_in; ++col)
      spikes.emplace_back(static_cast<int>(rng.uniform_below(static_cast<std::uint32_t>(k_steps))), col);
    const SpikeRaster raster = make_raster(k_steps, dims.n_in, spikes);

    // Scale to a subthreshold operating point.
    ForwardTrace probe;
    forward(raster, p, cfg, probe);
    double vmax = 0;
    for (double v : probe.v_pre) vmax = std::max(vmax, std::abs(v));
    if (vmax > 0) {
      const double scale = 0.6 * cfg.v_th / vmax;
      for (auto& w : p.w_in_t) w *= scale;
      ++p.revision;
    }
    const int label = static_cast<int>(rng.uniform_below(4));

    ForwardTrace t;
    forward(raster, p, cfg, t);
    for (double v : t.v_pre) REQUIRE(v < cfg.v_th);

    // Skip operating points where the max-over-time readout is nearly tied;
    // the max of two crossing curves is not differentiable at the tie.
    bool near_tie = false;
    for (int o = 0; o < dims.n_out; ++o) {
      for (int k = 0; k < k_steps; ++k) {
        const double v = t.v_out[static_cast<std::size_t>(k) * dims.n_out + o];
        if (k != t.argmax_step[static_cast<std::size_t>(o)] &&
            std::abs(v - t.scores[static_cast<std::size_t>(o)]) < 1e-4)
          near_tie = true;
      }
    }
    if (near_tie) continue;

    const CeLoss l = ce_loss(t.scores, label);
    Gradients g(dims);
    backward(t, l.grad_scores, p, cfg, g);

    const double h = 1e-5;
    double err2 = 0, norm2 = 0;
    auto check_block = [&](std::vector<double>& w, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double keep = w[i];
        w[i] = keep + h;
        ++p.revision;
        const double up = total_loss(raster, p, cfg, label);
        w[i] = keep - h;
        ++p.revision;
        const double down = total_loss(raster, p, cfg, label);
        w[i] = keep;
        ++p.revision;
        const double fd = (up - down) / (2.0 * h);
        err2 += (fd - analytic[i]) * (fd - analytic[i]);
        norm2 += analytic[i] * analytic[i];
      }
    };
    check_block(p.w_in_t, g.gw_in_t);
    check_block(p.w_out_t, g.gw_out_t);
    REQUIRE(norm2 > 0);
    CHECK(std::sqrt(err2 / norm2) < 1e-5);
    ++trials_done;
  }
}

TEST_CASE("hard threshold below v_th is exactly flat") {
  RngStream rng(42);
  const SnnDims dims{.n_in = 3, .n_hidden = 2, .n_out = 4};
  SnnParams p = init_weights(dims, rng);
  for (auto& w : p.w_in_t) w *= 0.2;  // far below threshold
  const SpikeRaster raster = make_raster(4, 3, {{0, 0}, {1, 1}, {2, 2}});
  const NeuronConfig cfg;

  ForwardTrace t;
  forward(raster, p, cfg, t);
  CHECK(t.hidden_spike_count == 0);
  for (double s : t.scores) CHECK(s == 0.0);

  // No spikes means the readout weights receive no gradient, and a small
  // weight change cannot alter the (empty) spike pattern: finite differences
  // of the true loss are exactly zero.
  const CeLoss l = ce_loss(t.scores, 1);
  Gradients g(dims);
  backward(t, l.grad_scores, p, cfg, g);
  for (double v : g.gw_out_t) CHECK(v == 0.0);

  const double base = total_loss(raster, p, cfg, 1);
  for (std::size_t i = 0; i < p.w_in_t.size(); ++i) {
    const double keep = p.w_in_t[i];
    p.w_in_t[i] = keep + 1e-5;
    ++p.revision;
    CHECK(total_loss(raster, p, cfg, 1) == base);
    p.w_in_t[i] = keep;
    ++p.revision;
  }
}

TEST_CASE("surrogate factors stay in (0, 1] when spikes are present") {
  RngStream rng(8);
  const SnnDims dims{.n_in = 8, .n_hidden = 6, .n_out = 4};
  SnnParams p = init_weights(dims, rng);
  for (auto& w : p.w_in_t) w *= 12.0;
  std::vector<std::pair<int, int>> spikes;
  for (int col = 0; col < 8; ++col) spikes.emplace_back(col % 4, col);
  const SpikeRaster raster = make_raster(6, 8, spikes);
  const NeuronConfig cfg;

  ForwardTrace t;
  forward(raster, p, cfg, t);
  REQUIRE(t.hidden_spike_count > 0);
  for (double v : t.v_pre) {
    const double d = cfg.surrogate_steepness * std::abs(v - cfg.v_th) + 1.0;
    const double factor = 1.0 / (d * d);
    CHECK(factor > 0.0);
    CHECK(factor <= 1.0);
  }

  const CeLoss l = ce_loss(t.scores, 0);
  Gradients g(dims);
  backward(t, l.grad_scores, p, cfg, g);
  for (double v : g.gw_in_t) CHECK(std::isfinite(v));
  for (double v : g.gw_out_t) CHECK(std::isfinite(v));
}

TEST_CASE("Adam") {
  const SnnDims dims{.n_in = 2, .n_hidden = 2, .n_out = 2};

  SUBCASE("zero gradient leaves parameters unchanged") {
    RngStream rng(3);
    SnnParams p = init_weights(dims, rng);
    const SnnParams before = p;
    AdamState st(dims);
    Gradients g(dims);
    optimizer_step(p, g, st, 1e-3);
    CHECK(p.w_in_t == before.w_in_t);
    CHECK(p.w_out_t == before.w_out_t);
    CHECK(p.revision == before.revision + 1);
  }

  SUBCASE("constant gradient steps approach the learning rate") {
    SnnParams p = zero_params(dims);
    AdamState st(dims);
    Gradients g(dims);
    for (auto& v : g.gw_in_t) v = 0.37;
    const double lr = 1e-3;
    double prev = p.w_in_t[0];
    for (int t = 0; t < 200; ++t) {
      optimizer_step(p, g, st, lr);
      if (t > 50) CHECK(std::abs(prev - p.w_in_t[0]) == doctest::Approx(lr).epsilon(0.01));
      prev = p.w_in_t[0];
    }
  }

  SUBCASE("quadratic bowl converges below 1e-6 within 10k steps") {
    // 0.5 * ||W||^2 with a geometrically decaying learning rate; constant-lr
    // Adam limit-cycles at the step scale instead of settling.
    RngStream rng(7);
    SnnParams p = init_weights(dims, rng);
    AdamState st(dims);
    Gradients g(dims);
    double lr = 0.03;
    int first_below = -1;
    for (int t = 1; t <= 10000; ++t) {
      g.gw_in_t = p.w_in_t;
      g.gw_out_t = p.w_out_t;
      optimizer_step(p, g, st, lr);
      lr *= 0.999;
      double worst = 0;
      for (double w : p.w_in_t) worst = std::max(worst, std::abs(w));
      for (double w : p.w_out_t) worst = std::max(worst, std::abs(w));
      if (worst < 1e-6 && first_below < 0) first_below = t;
    }
    CHECK(first_below > 0);
    double final_worst = 0;
    for (double w : p.w_in_t) final_worst = std::max(final_worst, std::abs(w));
    CHECK(final_worst < 1e-6);
  }

  SUBCASE("non-finite gradients refuse the step") {
    RngStream rng(3);
    SnnParams p = init_weights(dims, rng);
    const SnnParams before = p;
    AdamState st(dims);
    Gradients g(dims);
    g.gw_in_t[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(optimizer_step(p, g, st, 1e-3), std::domain_error);
    CHECK(p.w_in_t == before.w_in_t);
    CHECK(st.step == 0);
  }
}

TEST_CASE("weight initialization") {
  SUBCASE("deterministic per seed") {
    const SnnDims dims{.n_in = 70, .n_hidden = 40, .n_out = 4};
    RngStream a(123), b(123);
    const SnnParams pa = init_weights(dims, a);
    const SnnParams pb = init_weights(dims, b);
    CHECK(pa.w_in_t == pb.w_in_t);
    CHECK(pa.w_out_t == pb.w_out_t);
  }
  SUBCASE("bound is 1/sqrt(fan_in)") {
    const SnnDims dims{.n_in = 100, .n_hidden = 50, .n_out = 4};
    RngStream rng(9);
    const SnnParams p = init_weights(dims, rng);
    for (double w : p.w_in_t) {
      CHECK(w >= -0.1);
      CHECK(w <= 0.1);
    }
  }
  SUBCASE("empirical variance matches the uniform law within 10%") {
    const SnnDims dims{.n_in = 100, .n_hidden = 1000, .n_out = 4};
    RngStream rng(10);
    const SnnParams p = init_weights(dims, rng);  // 1e5 draws in w_in
    double mean = 0, mean_sq = 0;
    for (double w : p.w_in_t) {
      mean += w;
      mean_sq += w * w;
    }
    const double n = static_cast<double>(p.w_in_t.size());
    const double var = mean_sq / n - (mean / n) * (mean / n);
    CHECK(var == doctest::Approx(0.04 / 12.0).epsilon(0.10));
  }
}

TEST_CASE("subthreshold dynamics are linear in the input weights") {
  RngStream rng(21);
  const SnnDims dims{.n_in = 5, .n_hidden = 4, .n_out = 4};
  SnnParams p = init_weights(dims, rng);
  for (auto& w : p.w_in_t) w *= 0.1;
  const SpikeRaster raster = make_raster(6, 5, {{0, 0}, {1, 2}, {3, 4}});
  const NeuronConfig cfg;

  ForwardTrace t1;
  forward(raster, p, cfg, t1);
  REQUIRE(t1.hidden_spike_count == 0);

  SnnParams p2 = p;
  for (auto& w : p2.w_in_t) w *= 3.0;
  ForwardTrace t2;
  forward(raster, p2, cfg, t2);
  REQUIRE(t2.hidden_spike_count == 0);

  for (std::size_t i = 0; i < t1.v_pre.size(); ++i)
    CHECK(t2.v_pre[i] == doctest::Approx(3.0 * t1.v_pre[i]).epsilon(1e-12));
}

TEST_CASE("forward and backward are bitwise reproducible") {
  RngStream rng(33);
  const SnnDims dims{.n_in = 10, .n_hidden = 8, .n_out = 4};
  SnnParams p = init_weights(dims, rng);
  for (auto& w : p.w_in_t) w *= 10.0;
  std::vector<std::pair<int, int>> spikes;
  for (int col = 0; col < 10; ++col) spikes.emplace_back(col % 5, col);
  const SpikeRaster raster = make_raster(5, 10, spikes);

  ForwardTrace ta, tb;
  forward(raster, p, NeuronConfig{}, ta);
  forward(raster, p, NeuronConfig{}, tb);
  CHECK(ta.scores == tb.scores);
  CHECK(ta.v_pre == tb.v_pre);

  const CeLoss l = ce_loss(ta.scores, 2);
  Gradients ga(dims), gb(dims);
  backward(ta, l.grad_scores, p, NeuronConfig{}, ga);
  backward(tb, l.grad_scores, p, NeuronConfig{}, gb);
  CHECK(ga.gw_in_t == gb.gw_in_t);
  CHECK(ga.gw_out_t == gb.gw_out_t);
}

TEST_CASE("raising the threshold never adds spikes") {
  RngStream rng(55);
  const SnnDims dims{.n_in = 12, .n_hidden = 10, .n_out = 4};
  SnnParams p = init_weights(dims, rng);
  for (auto& w : p.w_in_t) w *= 8.0;
  std::vector<std::pair<int, int>> spikes;
  for (int col = 0; col < 12; ++col) spikes.emplace_back(col % 6, col);
  const SpikeRaster raster = make_raster(6, 12, spikes);

  int prev = std::numeric_limits<int>::max();
  for (double v_th : {0.5, 0.75, 1.0, 1.5, 2.0, 4.0}) {
    NeuronConfig cfg;
    cfg.v_th = v_th;
    ForwardTrace t;
    forward(raster, p, cfg, t);
    CHECK(t.hidden_spike_count <= prev);
    CHECK(t.hidden_spike_count <= dims.n_hidden * raster.k_steps);
    prev = t.hidden_spike_count;
  }
}

TEST_CASE("a stale trace is rejected by backward") {
  RngStream rng(66);
  const SnnDims dims{.n_in = 4, .n_hidden = 3, .n_out = 4};
  SnnParams p = init_weights(dims, rng);
  const SpikeRaster raster = make_raster(4, 4, {{0, 0}, {1, 1}});
  ForwardTrace t;
  forward(raster, p, NeuronConfig{}, t);

  AdamState st(dims);
  Gradients g(dims);
  g.gw_in_t[0] = 0.5;
  optimizer_step(p, g, st, 1e-3);  // bumps the revision

  const std::vector<double> grad_scores(4, 0.25);
  Gradients g2(dims);
  CHECK_THROWS_AS(backward(t, grad_scores, p, NeuronConfig{}, g2), std::logic_error);
}

TEST_CASE("shape mismatches are rejected") {
  RngStream rng(67);
  const SnnDims dims{.n_in = 4, .n_hidden = 3, .n_out = 4};
  const SnnParams p = init_weights(dims, rng);
  const SpikeRaster wrong = make_raster(4, 5, {});
  ForwardTrace t;
  CHECK_THROWS_AS(forward(wrong, p, NeuronConfig{}, t), std::invalid_argument);
}

TEST_SUITE_END();
