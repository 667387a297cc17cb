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

#include <vector>

#include "toric/polytope.hpp"

namespace fixtures {

inline toric::Polytope make(std::vector<toric::Facet> f, const char* name) {
  return toric::validate_delzant(std::move(f), name).value();
}

inline toric::Polytope unit_square() { return make({{{1, 0}, 0}, {{0, 1}, 0}, {{-1, 0}, 1}, {{0, -1}, 1}}, "square"); }

inline toric::Polytope centered_square() {
  return make({{{1, 0}, 1}, {{0, 1}, 1}, {{-1, 0}, 1}, {{0, -1}, 1}}, "centered-square");
}

inline toric::Polytope unit_simplex() { return make({{{1, 0}, 0}, {{0, 1}, 0}, {{-1, -1}, 1}}, "simplex"); }

inline toric::Polytope cp2() { return make({{{1, 0}, 1}, {{0, 1}, 1}, {{-1, -1}, 1}}, "cp2"); }

// One-point blowup; facet 3 (normal (1,1)) is the exceptional divisor.
inline toric::Polytope trapezoid() {
  return make({{{1, 0}, 1}, {{0, 1}, 1}, {{-1, -1}, 1}, {{1, 1}, 1}}, "blowup-cp2");
}

inline toric::Polytope hexagon() {
  return make({{{-1, 0}, 1}, {{0, -1}, 1}, {{1, 0}, 1}, {{0, 1}, 1}, {{-1, -1}, 1}, {{1, 1}, 1}}, "hexagon");
}

}  // namespace fixtures
