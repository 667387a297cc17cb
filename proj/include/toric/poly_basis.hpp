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

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "toric/polytope.hpp"
#include "toric/quadrature.hpp"

namespace toric {

/// Partial derivatives up to order 4 are addressed by a flat index:
/// order 0: (0,0); order 1: (1,0),(0,1); order 2: (2,0),(1,1),(0,2); ...
inline constexpr int kMaxDerivOrder = 4;
inline constexpr int deriv_count(int order) { return (order + 1) * (order + 2) / 2; }
inline constexpr int deriv_index(int ax, int ay) { return deriv_count(ax + ay - 1) + ay; }

/// Measure weight w(x) = exp(<b, x> + shift), or w = 1.
struct Weight {
  bool exponential = false;
  Vec2 b;
  double shift = 0.0;

  static Weight uniform() { return {}; }
  static Weight exp_linear(Vec2 b, double shift = 0.0) { return {true, b, shift}; }
  double operator()(Vec2 x) const { return exponential ? std::exp(dot(b, x) + shift) : 1.0; }
  bool operator==(const Weight&) const = default;
};

/// Per-node derivative tables of a set of functions: table(d) is a
/// nodes x functions matrix holding derivative d (see deriv_index).
struct NodeTable {
  int max_order = 0;
  std::vector<Eigen::MatrixXd> d;

  const Eigen::MatrixXd& operator()(int k) const { return d[static_cast<std::size_t>(k)]; }
  Eigen::Index nodes() const { return d.empty() ? 0 : d[0].rows(); }
};

/// Polynomials of total degree <= N, orthonormal for
/// <f, g> = (1/V_w) int_P f g w dmu. Equivalent to Gram-Schmidt of the
/// monomials x1^a x2^b in graded-lexicographic order (1, x1, x2, x1^2, x1 x2,
/// x2^2, ...); each element is built as a coordinate times an earlier element
/// and reorthogonalized, which keeps the construction stable at high degree.
/// The first three elements are the orthonormal affine functions.
class PolyBasis {
 public:
  static PolyBasis build(const Polytope& p, const Quadrature& q, int degree, Weight weight = Weight::uniform());

  int degree() const { return degree_; }
  std::size_t size() const { return parent_.size(); }
  const Weight& weight() const { return weight_; }
  /// Weighted volume V_w of the construction polytope.
  double weighted_volume() const { return volume_; }
  /// Exponents (a, b) of the monomial that seeds element i.
  std::array<int, 2> seed(std::size_t i) const { return seed_[i]; }

  /// Derivatives up to max_order of the first `count` elements at x:
  /// out[i * deriv_count(max_order) + k].
  void evaluate(Vec2 x, int max_order, std::span<double> out, std::size_t count) const;
  void evaluate(Vec2 x, int max_order, std::span<double> out) const { evaluate(x, max_order, out, size()); }
  double value(std::size_t i, Vec2 x) const;

  NodeTable tabulate(std::span<const double> xs, std::span<const double> ys, int max_order) const;
  NodeTable tabulate(const Quadrature& q, int max_order) const { return tabulate(q.x, q.y, max_order); }

  /// Affine coefficients (c, g1, g2) with element i = c + g1 x1 + g2 x2, for i < 3.
  std::array<double, 3> affine_coefficients(std::size_t i) const;

  bool operator==(const PolyBasis&) const = default;

 private:
  int degree_ = 0;
  Weight weight_;
  double volume_ = 0.0;
  Vec2 center_;
  double scale_ = 1.0;
  std::vector<std::array<int, 2>> seed_;
  std::vector<std::size_t> parent_;  // element i = (y_dir * parent - sum_j h_ij p_j) / norm_i
  std::vector<int> dir_;
  Eigen::MatrixXd h_;  // strictly lower part used
  std::vector<double> norm_;

  template <class Cols>
  void recurrence(Cols& cols, std::size_t count, int max_order) const;
};

}  // namespace toric
