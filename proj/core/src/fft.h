// Copyright 2026 The kljnsim Authors
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

#ifndef KLJN_SRC_FFT_H_
#define KLJN_SRC_FFT_H_

#include <complex>
#include <span>

namespace kljn::internal {

// Real-input DFT of length in.size(); writes in.size() / 2 + 1 bins.
//   X[k] = sum_t x[t] exp(-2 pi i k t / n)
void ForwardRealDft(std::span<const double> in,
                    std::span<std::complex<double>> out);

// Inverse of ForwardRealDft without the 1/n factor:
//   x[t] = X[0] + 2 Re sum_{0<k<n/2} X[k] exp(2 pi i k t / n) (+ Nyquist)
// `spectrum` must hold out.size() / 2 + 1 bins and is not modified.
void InverseRealDft(std::span<const std::complex<double>> spectrum,
                    std::span<double> out);

}  // namespace kljn::internal

#endif  // KLJN_SRC_FFT_H_
