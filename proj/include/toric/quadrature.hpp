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
#include <vector>

#include "toric/polytope.hpp"

namespace toric {

/// Nodes and weights on [0, 1].
struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
};

/// n-point Gauss-Legendre rule mapped to [0, 1]; exact for degree 2n - 1.
Rule1D gauss_legendre(int n);

/// Composite Gauss rule on [0, 1] with breakpoints 1 - 2^-k, k = 0..level,
/// i.e. geometrically refined toward x = 1.
Rule1D graded_rule(int level, int n);

/// Interior and boundary rule for a polygon. Interior weights are Lebesgue;
/// boundary weights are already in the sigma-measure (|dx| / |n_a|).
struct Quadrature {
  struct Boundary {
    std::vector<double> x, y, w;
  };

  std::vector<double> x, y, w;
  std::vector<Boundary> boundary;  // indexed like the polytope's facets
  int level = 0;
  int order = 0;

  std::size_t size() const { return w.size(); }

  template <class F>
  double integrate(F&& f) const {
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f(x[i], y[i]);
    return s;
  }

  template <class F>
  double integrate_boundary(F&& f) const {
    double s = 0;
    for (const auto& b : boundary) {
      for (std::size_t i = 0; i < b.w.size(); ++i) s += b.w[i] * f(b.x[i], b.y[i]);
    }
    return s;
  }
};

/// Composite Gauss rule on [0, 1] refined geometrically toward both ends.
Rule1D graded_rule_symmetric(int depth, int n);

struct QuadratureOptions {
  int level = 5;
  int order = 17;
  /// Also grade the tangential direction toward the polygon vertices, strip
  /// by strip. Only needed for integrands singular on the boundary (l log l);
  /// costs roughly (level + 1)x more nodes.
  bool corner_grading = false;
  /// Cap on the tangential grading depth when corner_grading is set.
  int corner_depth = 1 << 20;
};

/// Fan-triangulated tensor Gauss rule, graded geometrically toward the facets
/// with depth `level`. With `order` points per direction it integrates
/// polynomials of degree 2 * order - 2 exactly.
Quadrature build_quadrature(const Polytope& p, const QuadratureOptions& options);
Quadrature build_quadrature(const Polytope& p, int level = 5, int order = 17);

}  // namespace toric
