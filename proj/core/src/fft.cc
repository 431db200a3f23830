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

#include "fft.h"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace kljn::internal {
namespace {

struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// FFTW planning is not thread-safe; execution through the new-array API is.
// Plans are built once per length and kept for the process lifetime.
std::mutex& PlanMutex() {
  static std::mutex mu;
  return mu;
}

const Plans& PlansFor(int n) {
  static std::map<int, Plans>* cache = new std::map<int, Plans>();
  std::lock_guard<std::mutex> lock(PlanMutex());
  auto it = cache->find(n);
  if (it != cache->end()) return it->second;
  double* real = fftw_alloc_real(n);
  fftw_complex* cplx = fftw_alloc_complex(n / 2 + 1);
  // FFTW_UNALIGNED keeps the codelet choice independent of buffer addresses,
  // which keeps results bit-identical across threads and runs.
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  Plans plans;
  plans.forward = fftw_plan_dft_r2c_1d(n, real, cplx, flags);
  plans.inverse = fftw_plan_dft_c2r_1d(n, cplx, real, flags);
  fftw_free(real);
  fftw_free(cplx);
  return cache->emplace(n, plans).first->second;
}

}  // namespace

void ForwardRealDft(std::span<const double> in,
                    std::span<std::complex<double>> out) {
  const int n = static_cast<int>(in.size());
  const Plans& plans = PlansFor(n);
  thread_local std::vector<double> scratch;
  scratch.assign(in.begin(), in.end());
  fftw_execute_dft_r2c(plans.forward, scratch.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void InverseRealDft(std::span<const std::complex<double>> spectrum,
                    std::span<double> out) {
  const int n = static_cast<int>(out.size());
  const Plans& plans = PlansFor(n);
  // c2r overwrites its input.
  thread_local std::vector<std::complex<double>> scratch;
  scratch.assign(spectrum.begin(), spectrum.end());
  fftw_execute_dft_c2r(plans.inverse,
                       reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
}

}  // namespace kljn::internal
