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

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel reductions used by quadrature and Galerkin assembly.
//
// Every reduction accumulates into four interleaved lanes (element k goes to
// lane k % 4 for the largest multiple of four), folds the lanes as
// (l0 + l1) + (l2 + l3) and then adds the tail sequentially. The scalar
// reference and the vector variants follow this order exactly, so they are
// bitwise interchangeable and results never depend on which one the runtime
// dispatcher picked.
namespace toric::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Best variant supported by this CPU (and compiled in).
Isa detected_isa();

/// Variant currently used by the dispatching entry points below.
Isa active_isa();

/// Override the dispatcher, e.g. to pin the scalar reference in tests.
/// Requests for an unsupported variant fall back to scalar.
void set_active_isa(Isa isa);

/// sum_k x[k] * y[k]
double dot(std::span<const double> x, std::span<const double> y);

/// sum_k (x[k] * w[k]) * y[k]
double weighted_dot(std::span<const double> x, std::span<const double> y,
                    std::span<const double> w);

/// out[k] = x[k] * y[k]
void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out);

/// y[k] += a * x[k]
void axpy(double a, std::span<const double> x, std::span<double> y);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void hadamard(const double* x, const double* y, double* out, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void hadamard(const double* x, const double* y, double* out, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
}  // namespace avx2

}  // namespace toric::simd
