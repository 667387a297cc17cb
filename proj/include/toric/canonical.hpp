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

#include <array>
#include <functional>
#include <optional>

#include "toric/poly_basis.hpp"
#include "toric/polytope.hpp"
#include "toric/potential.hpp"
#include "toric/quadrature.hpp"

namespace toric {

/// f(x) = c + <g, x>
struct Affine {
  double c = 0.0;
  Vec2 g;

  double operator()(Vec2 x) const { return c + dot(g, x); }
  Affine operator+(const Affine& o) const { return {c + o.c, g + o.g}; }
  Affine operator*(double s) const { return {s * c, s * g}; }
};

/// The orthonormal affine functions theta_0 = 1, theta_1, theta_2 for
/// <f, g> = (1/V_w) int_P f g w dmu, from Gram-Schmidt of (1, x1, x2).
struct PotentialBasis {
  Polytope polytope;
  Weight weight;
  double volume = 0.0;        // V_w
  std::array<Affine, 3> theta;
  Eigen::Matrix3d gram;       // normalized Gram matrix of (1, x1, x2)

  bool operator==(const PotentialBasis& o) const {
    return weight == o.weight && volume == o.volume && gram == o.gram && theta[0].c == o.theta[0].c &&
           theta[1].c == o.theta[1].c && theta[1].g == o.theta[1].g && theta[2].c == o.theta[2].c &&
           theta[2].g == o.theta[2].g;
  }
};

PotentialBasis orthonormal_affine_basis(const Polytope& p, const Quadrature& q, Weight weight = Weight::uniform());

/// <theta_i, f> for i = 0, 1, 2.
std::array<double, 3> inner_products(const PotentialBasis& b, const Quadrature& q,
                                     const std::function<double(Vec2)>& f);

enum class Projection { full, killing, complement };

/// full: sum_{i=0..2} <theta_i, f> theta_i; killing: i = 1, 2 only;
/// complement: f - full.
std::function<double(Vec2)> project(const PotentialBasis& b, const Quadrature& q, std::function<double(Vec2)> f,
                                    Projection mode);
/// Affine part for the full or killing projection.
Affine project_affine(const PotentialBasis& b, const std::array<double, 3>& coeffs, Projection mode);

struct FutakiReport {
  double interior = 0.0;
  double boundary = 0.0;
  double s_bar = 0.0;  // from the potential, (int s dmu) / V_P
  double discrepancy = 0.0;
};

/// int_P (s(u) - s_bar(u)) f dmu, s evaluated at the nodes of q.
double futaki_interior(const SymplecticPotential& u, const Quadrature& q, const Affine& f, double* s_bar = nullptr);

/// kappa * (oint f dsigma - sigma(dP)/V_P int_P f dmu); needs the calibrated
/// kappa (throws std::invalid_argument when absent).
double futaki_boundary(const Polytope& p, const Affine& f, std::optional<double> kappa);

/// Magnitude of the terms that cancel in the Futaki invariant,
/// kappa oint |f| dsigma + s_bar_b int |f| dmu; the denominator for relative
/// comparisons when the invariant itself vanishes.
double futaki_scale(const Polytope& p, const Quadrature& q, const Affine& f, double kappa);

/// kappa * sigma(dP) / V_P.
double s_bar_boundary(const Polytope& p, double kappa);

FutakiReport futaki_report(const SymplecticPotential& u, const Quadrature& q, const Affine& f, double kappa);

/// int_simplex s(u_can) dmu / sigma(d simplex) at the given resolution.
double calibrate_kappa(int level = 8, int order = 21);

/// Exact integrals of 1, x1, x2 over P and over dP (sigma measure).
struct Moments {
  double area = 0.0;
  Vec2 first;          // int_P x dmu
  double sigma = 0.0;  // sigma(dP)
  Vec2 boundary_first; // oint x dsigma
};
Moments moments(const Polytope& p);

/// The field b with int_P x e^{<b,x>} dmu = 0 on an anticanonical polygon
/// (every offset equal to 1, so the origin is the anticanonical center).
struct SolitonField {
  Vec2 b;
  double theta_constant = 0.0;  // theta_b = <b, x> + const has zero e^{theta_b}-mean
  double residual = 0.0;        // |int_P x e^{<b,x>} dmu|
  double hessian_min_eig = 0.0; // of the convex objective at b
  int iterations = 0;
  bool converged = false;

  double theta(Vec2 x) const { return dot(b, x) + theta_constant; }
  Weight weight() const { return Weight::exp_linear(b, theta_constant); }
};

/// Newton on b -> int_P e^{<b,x>} dmu. Throws std::invalid_argument when the
/// polygon is not in anticanonical normalization; returns the last iterate
/// with converged = false when Newton stalls.
SolitonField tian_zhu_field(const Polytope& p, const Quadrature& q, double tol = 1e-10, int max_iter = 50);

/// A field for a given b (no solve): fills theta_constant and the residual.
SolitonField soliton_field_for(const Polytope& p, const Quadrature& q, Vec2 b);

/// int_P <grad f, x> e^{theta_b} dmu: f paired through its linear part in the
/// anticanonical gauge, where holomorphy potentials carry no free constant.
/// Vanishes for every f exactly at the Tian-Zhu field.
double modified_futaki(const Polytope& p, const Quadrature& q, const SolitonField& field, const Affine& f);

}  // namespace toric
