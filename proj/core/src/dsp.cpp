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

#include "spiketrace/dsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spiketrace::dsp {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Fft::Fft(std::size_t n) : n_(n) {
  if (!is_pow2(n)) throw std::invalid_argument("Fft: size must be a power of two");
  bit_reverse_.resize(n);
  std::uint32_t log2n = 0;
  while ((std::size_t{1} << log2n) < n) ++log2n;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t r = 0;
    for (std::uint32_t b = 0; b < log2n; ++b)
      if (i & (std::size_t{1} << b)) r |= 1u << (log2n - 1 - b);
    bit_reverse_[i] = r;
  }
  twiddles_.resize(n / 2);
  const double step = -2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < n / 2; ++k)
    twiddles_[k] = std::polar(1.0, step * static_cast<double>(k));
}

void Fft::transform(cplx* a, bool inverse) const {
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j = bit_reverse_[i];
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n_ / len;
    for (std::size_t base = 0; base < n_; base += len) {
      for (std::size_t k = 0; k < half; ++k) {
        cplx w = twiddles_[k * step];
        if (inverse) w = std::conj(w);
        const cplx u = a[base + k];
        const cplx t = a[base + k + half] * w;
        a[base + k] = u + t;
        a[base + k + half] = u - t;
      }
    }
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) a[i] *= inv_n;
  }
}

void Fft::forward(std::vector<cplx>& data) const {
  if (data.size() != n_) throw std::invalid_argument("Fft: length mismatch");
  transform(data.data(), false);
}

void Fft::inverse(std::vector<cplx>& data) const {
  if (data.size() != n_) throw std::invalid_argument("Fft: length mismatch");
  transform(data.data(), true);
}

double bin_frequency(std::size_t m, std::size_t n, double fs) {
  const auto half = n / 2;
  const double k = (m <= half) ? static_cast<double>(m)
                               : static_cast<double>(m) - static_cast<double>(n);
  return k * fs / static_cast<double>(n);
}

std::vector<double> rrc_frequency_response(std::size_t n, int oversampling,
                                           double rolloff) {
  if (!is_pow2(n)) throw std::invalid_argument("rrc: n must be a power of two");
  if (oversampling < 2) throw std::invalid_argument("rrc: oversampling must be >= 2");
  if (rolloff < 0.0 || rolloff > 1.0)
    throw std::invalid_argument("rrc: rolloff must be in [0, 1]");

  const double s = static_cast<double>(oversampling);
  const double f_sym = 1.0 / s;  // symbol rate in cycles/sample
  std::vector<double> h(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double f = std::abs(bin_frequency(m, n, 1.0));
    double rc;
    if (rolloff == 0.0) {
      // Brickwall limit; the half-gain edge keeps the Nyquist aliasing sum
      // exact when the grid lands on the band edge.
      if (f < 0.5 * f_sym) rc = 1.0;
      else if (f == 0.5 * f_sym) rc = 0.5;
      else rc = 0.0;
    } else {
      const double lo = 0.5 * f_sym * (1.0 - rolloff);
      const double hi = 0.5 * f_sym * (1.0 + rolloff);
      if (f <= lo) {
        rc = 1.0;
      } else if (f >= hi) {
        rc = 0.0;
      } else {
        const double u = std::numbers::pi * s / rolloff * (f - lo);
        rc = 0.5 * (1.0 + std::cos(u));
      }
    }
    h[m] = std::sqrt(s * rc);
  }
  return h;
}

void apply_response(std::vector<cplx>& x, const std::vector<double>& h) {
  if (x.size() != h.size()) throw std::invalid_argument("apply_response: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= h[i];
}

void apply_response(std::vector<cplx>& x, const std::vector<cplx>& h) {
  if (x.size() != h.size()) throw std::invalid_argument("apply_response: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= h[i];
}

}  // namespace spiketrace::dsp
