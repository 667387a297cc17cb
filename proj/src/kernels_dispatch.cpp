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

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <vector>

#include "toric/kernels.hpp"

namespace toric::simd {

#if !defined(TORIC_HAVE_AVX2)
namespace avx2 {
// Not compiled in; the dispatcher never selects these.
double dot(const double* x, const double* y, std::size_t n) { return scalar::dot(x, y, n); }
void hadamard(const double* x, const double* y, double* out, std::size_t n) {
  scalar::hadamard(x, y, out, n);
}
void axpy(double a, const double* x, double* y, std::size_t n) { scalar::axpy(a, x, y, n); }
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() {
#if defined(TORIC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("TORIC_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
    return Isa::scalar;
  }
  return detected_isa();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
  static const Isa best = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
  return best;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
  active().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  return active_isa() == Isa::avx2 ? avx2::dot(x.data(), y.data(), x.size())
                                   : scalar::dot(x.data(), y.data(), x.size());
}

double weighted_dot(std::span<const double> x, std::span<const double> y,
                    std::span<const double> w) {
  assert(x.size() == y.size() && x.size() == w.size());
  thread_local std::vector<double> scratch;
  scratch.resize(x.size());
  hadamard(x, w, scratch);
  return dot(scratch, y);
}

void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  assert(x.size() == y.size() && x.size() == out.size());
  if (active_isa() == Isa::avx2) {
    avx2::hadamard(x.data(), y.data(), out.data(), x.size());
  } else {
    scalar::hadamard(x.data(), y.data(), out.data(), x.size());
  }
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  if (active_isa() == Isa::avx2) {
    avx2::axpy(a, x.data(), y.data(), x.size());
  } else {
    scalar::axpy(a, x.data(), y.data(), x.size());
  }
}

}  // namespace toric::simd
