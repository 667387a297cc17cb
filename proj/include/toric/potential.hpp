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
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "toric/poly_basis.hpp"
#include "toric/polytope.hpp"
#include "toric/quadrature.hpp"

namespace toric {

using Mat2 = Eigen::Matrix2d;
using Vec2d = Eigen::Vector2d;

/// Thrown when the Hessian of a potential stops being positive definite
/// (smallest eigenvalue below 1e-10 times the largest).
class ConeExit : public std::runtime_error {
 public:
  ConeExit(const std::string& what, Vec2 where) : std::runtime_error(what), where_(where) {}
  Vec2 where() const { return where_; }

 private:
  Vec2 where_;
};

/// Thrown when a point is not strictly inside the polygon.
class OutsidePolytope : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Value and derivatives of a potential at a point. dH[k] = d_k Hess,
/// ddH[k][l] = d_k d_l Hess. Entries beyond the requested order are zero.
struct Jet {
  int order = 0;
  double value = 0.0;
  Vec2d grad = Vec2d::Zero();
  Mat2 H = Mat2::Zero();
  std::array<Mat2, 2> dH{Mat2::Zero(), Mat2::Zero()};
  std::array<std::array<Mat2, 2>, 2> ddH{{{Mat2::Zero(), Mat2::Zero()}, {Mat2::Zero(), Mat2::Zero()}}};

  Jet& operator+=(const Jet& o);
};

/// Exact derivatives of u_can = 1/2 sum_a l_a log l_a up to `order` (0..4).
Jet eval_canonical(const Polytope& p, Vec2 x, int order);

/// Jet of sum_i c_i p_i from a derivative block laid out as PolyBasis::evaluate
/// writes it for the same order (deriv_count(order) entries per function).
Jet polynomial_jet(std::span<const double> derivs, std::span<const double> coeffs, int order);

/// Jet from the derivative values of one function, indexed by deriv_index.
Jet jet_from_derivatives(std::span<const double> d, int order);

/// Inverse Hessian U and its first two derivatives.
struct InverseJet {
  Mat2 U;
  std::array<Mat2, 2> dU;
  std::array<std::array<Mat2, 2>, 2> ddU;
};

/// Through dU = -U (dH) U and its derivative; requires jet.order >= 4.
InverseJet invert(const Jet& jet);

/// Same quantities for u = [u_can of p] + (polynomial part with jet `poly`),
/// organized so that nothing cancels near the facets: U n_a is formed from
/// the adjugate without the 1/l_a term of facet a, and every sandwich U M U
/// with M built from facet a uses U n_a directly. The naive inverse loses
/// about log10(1/l^2) digits in the second derivatives near the boundary.
/// Also returns H. order 2 fills only U (and H).
InverseJet invert_structured(const Polytope* p, Vec2 x, const Jet& poly, int order, Mat2* H = nullptr);

/// Throws ConeExit unless H is positive definite within the cone tolerance.
void check_cone(const Mat2& H, Vec2 where);
bool in_cone(const Mat2& H);

/// u = [u_can] + sum_i c_i p_i on polygon P, with p_i from a polynomial basis
/// (which may have been built on a different polygon of the same class path).
class SymplecticPotential {
 public:
  SymplecticPotential(Polytope p, std::shared_ptr<const PolyBasis> basis, Eigen::VectorXd coeffs,
                      bool canonical = true);
  /// u_can alone.
  explicit SymplecticPotential(Polytope p);

  const Polytope& polytope() const { return polytope_; }
  const std::shared_ptr<const PolyBasis>& basis() const { return basis_; }
  const Eigen::VectorXd& coefficients() const { return coeffs_; }
  bool canonical() const { return canonical_; }
  /// True when the affine coefficients vanish (within 1e-12).
  bool h_orthogonal() const;

  SymplecticPotential with_coefficients(Eigen::VectorXd coeffs) const;

  Jet jet(Vec2 x, int order) const;

 private:
  Polytope polytope_;
  std::shared_ptr<const PolyBasis> basis_;
  Eigen::VectorXd coeffs_;
  bool canonical_ = true;
};

/// Scalar curvature s = -d_i d_j U^{ij}.
double scalar_curvature(const SymplecticPotential& u, Vec2 x);

/// D s(u)[psi] = d_i d_j (U Hess(psi) U)^{ij}, psi given in u's basis.
double linearized_scalar(const SymplecticPotential& u, const Eigen::VectorXd& psi, Vec2 x);

/// d_i (U^{ij} d_j f), f given in u's basis.
double laplacian(const SymplecticPotential& u, const Eigen::VectorXd& f, Vec2 x);
/// Same for an affine f with gradient g (the constant is irrelevant).
double laplacian_affine(const SymplecticPotential& u, Vec2 g, Vec2 x);

/// Metric data at the quadrature nodes. Entries are stored per node.
struct MetricFields {
  std::vector<Mat2> H;
  std::vector<Mat2> U;
  std::vector<Vec2d> divU;  // sum_i d_i U^{ij}; filled when with_curvature
  std::vector<double> s;    // filled when with_curvature
};

/// Evaluates the metric at every node. `table` holds the basis of u at the
/// same nodes (order >= 2, or >= 4 for curvature); pass nullptr for u_can.
/// Throws ConeExit at the first node outside the Kaehler cone.
MetricFields metric_fields(const SymplecticPotential& u, const Quadrature& q, const NodeTable* table,
                           bool with_curvature);

enum class OperatorKind { linearized_scalar, laplacian, weighted_drift };

/// Galerkin matrix <p_i, Op p_j> in (1/V_w) int f g w dmu over q, where w is
/// the basis weight. Boundary terms vanish because U annihilates the facet
/// normals, so:
///   linearized_scalar: (1/V_w) int w (U Hp_j U) : Hp_i
///   laplacian:        -(1/V_w) int w grad p_i . U grad p_j
///   weighted_drift:    (1/V_w) int w (p_i p_j - 1/2 grad p_i . U grad p_j)
/// weighted_drift is A = 1/2 (Delta + b U grad) + 1 for the exponential weight
/// e^{<b,x>}, which is self-adjoint for that weight.
Eigen::MatrixXd assemble(const MetricFields& m, const Quadrature& q, const PolyBasis& basis,
                         const NodeTable& table, OperatorKind kind);
Eigen::MatrixXd assemble(const SymplecticPotential& u, const PolyBasis& basis, const Quadrature& q,
                         OperatorKind kind);

/// out(i, j) = sum_k a(k, i) w[k] b(k, j), parallel over i.
Eigen::MatrixXd weighted_cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::span<const double> w);

}  // namespace toric
