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

#include <complex>
#include <cstddef>
#include <vector>

namespace spiketrace::dsp {

using cplx = std::complex<double>;

constexpr bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n);

// Iterative radix-2 FFT with precomputed twiddles and bit-reversal table.
// Sizes are restricted to powers of two; inverse() includes the 1/n scale.
class Fft {
 public:
  explicit Fft(std::size_t n);

  void forward(cplx* data) const { transform(data, false); }
  void inverse(cplx* data) const { transform(data, true); }

  void forward(std::vector<cplx>& data) const;
  void inverse(std::vector<cplx>& data) const;

  std::size_t size() const { return n_; }

 private:
  void transform(cplx* data, bool inverse) const;

  std::size_t n_;
  std::vector<std::uint32_t> bit_reverse_;
  std::vector<cplx> twiddles_;  // exp(-2*pi*i*k/n), k < n/2
};

// Frequency of DFT bin m for an n-point transform at sample rate fs,
// using the usual wrap to (-fs/2, fs/2].
double bin_frequency(std::size_t m, std::size_t n, double fs);

// Zero-phase root-raised-cosine response sampled on the n-point DFT grid for
// `oversampling` samples per symbol. Normalized so that the shaping/matched
// pair is exactly Nyquist with unit symbol gain: H = sqrt(S * RC), which also
// gives the matched filter a white-noise power gain of exactly one.
std::vector<double> rrc_frequency_response(std::size_t n, int oversampling,
                                           double rolloff);

void apply_response(std::vector<cplx>& x, const std::vector<double>& h);
void apply_response(std::vector<cplx>& x, const std::vector<cplx>& h);

}  // namespace spiketrace::dsp
