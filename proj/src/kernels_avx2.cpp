// Copyright 2026 The toric-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <immintrin.h>

#include "toric/kernels.hpp"

namespace toric::simd::avx2 {

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t blocked = n - n % 4;
  for (std::size_t k = 0; k < blocked; k += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k));
    acc = _mm256_add_pd(acc, prod);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t k = blocked; k < n; ++k) total += x[k] * y[k];
  return total;
}

void hadamard(const double* x, const double* y, double* out, std::size_t n) {
  const std::size_t blocked = n - n % 4;
  for (std::size_t k = 0; k < blocked; k += 4) {
    _mm256_storeu_pd(out + k, _mm256_mul_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
  }
  for (std::size_t k = blocked; k < n; ++k) out[k] = x[k] * y[k];
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const std::size_t blocked = n - n % 4;
  for (std::size_t k = 0; k < blocked; k += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + k));
    _mm256_storeu_pd(y + k, _mm256_add_pd(_mm256_loadu_pd(y + k), prod));
  }
  for (std::size_t k = blocked; k < n; ++k) y[k] += a * x[k];
}

}  // namespace toric::simd::avx2
