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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "toric/canonical.hpp"
#include "toric/poly_basis.hpp"
#include "toric/polytope.hpp"
#include "toric/potential.hpp"
#include "toric/quadrature.hpp"

namespace toric {

struct SolverOptions {
  int degree = 12;  // basis degree N
  QuadratureOptions quadrature;
  double tol = 1e-10;       // sup-norm of the V-normalized Galerkin residual
  double step_tol = 1e-12;  // sup-norm of the accepted Newton update
  int max_iter = 50;
  int max_halvings = 30;
};

/// Fixed data of a projected continuation: the base polygon and the
/// holomorphy basis Theta of the base. Each P_t gets its own Galerkin basis;
/// a degree-N basis orthonormalized on P_0 loses digits when evaluated on a
/// visibly larger P_t.
class ProjectedProblem {
 public:
  ProjectedProblem(ClassDeformation deformation, SolverOptions options = {});

  const ClassDeformation& deformation() const { return deformation_; }
  const Polytope& base() const { return deformation_.base(); }
  const SolverOptions& options() const { return options_; }
  const PotentialBasis& theta() const { return theta_; }

  /// Galerkin basis orthonormal on `pt`.
  std::shared_ptr<const PolyBasis> basis_for(const Polytope& pt) const;

 private:
  ClassDeformation deformation_;
  SolverOptions options_;
  PotentialBasis theta_;
};

struct ProjectedSolveState {
  double t = 0.0;
  Polytope polytope;
  std::shared_ptr<const PolyBasis> basis;  // orthonormal on polytope
  Eigen::VectorXd phi;           // basis coefficients; the three affine ones stay zero
  std::array<double, 3> xi{};    // (c0, c1, c2) on the base Theta
  double residual = 0.0;         // sup |R_i| / V
  double step = 0.0;             // last accepted update
  int iterations = 0;
  bool converged = false;
  std::string warm_start = "cold";
  std::string failure;           // empty when converged
  Vec2 failure_point;            // cone exit location, if any

  double killing_norm() const { return std::hypot(xi[1], xi[2]); }
};

/// Damped Newton on (phi, Xi) for s(u_can(P_t) + phi) = <Xi, Theta>, tested
/// against the full basis. Never throws on non-convergence or cone exit; those
/// come back in `failure`. Throws CombinatoricsError if P_t is not of the base
/// type.
ProjectedSolveState solve_projected(const ProjectedProblem& problem, double t,
                                    const ProjectedSolveState* init = nullptr);

SymplecticPotential potential_of(const ProjectedSolveState& state);

/// Coefficients of sum_i c_i from_i in the basis `to`, by projection in the
/// inner product of `to` on the nodes of `q` (exact up to rounding when both
/// span the same degree).
Eigen::VectorXd transfer(const PolyBasis& from, const Eigen::VectorXd& c, const PolyBasis& to, const Quadrature& q);

/// theta_t = sum_{k>=1} c_k theta_k, recentred to zero Lebesgue mean on P_t.
Affine theta_field(const ProjectedProblem& problem, const ProjectedSolveState& state);

/// Mean-centred Gram matrix of theta_1, theta_2 over P_t.
Eigen::Matrix2d centered_gram(const ProjectedProblem& problem, const Polytope& pt);

struct PhiValue {
  double integral = 0.0;   // int theta_t (s - c0) dmu with s at the quadrature nodes
  double quadratic = 0.0;  // c^T M(t) c
  double weak = 0.0;       // 2 oint theta_t dsigma, the integral after integrating by parts
  double c0_centered = 0.0;  // P_t-mean of <Xi, Theta>; equals s_bar(P_t)
  Eigen::Matrix2d gram = Eigen::Matrix2d::Zero();  // M(t)
  double sup_theta = 0.0;    // max over nodes of |theta_t|
  double sup_killing = 0.0;     // max over nodes of |sum_{k>=1} c_k theta_k| = |<Xi,Theta> - c0|
  double sup_s_minus_c0 = 0.0;  // max over nodes of |s - c0_centered|; includes Galerkin truncation
};

PhiValue phi_value(const ProjectedProblem& problem, const ProjectedSolveState& state);

bool detect_csc(const ProjectedSolveState& state, double tol = 1e-8);

struct PhiSample {
  ProjectedSolveState state;
  PhiValue phi;
};

struct PhiScan {
  std::vector<PhiSample> samples;  // converged samples only, increasing t
  std::vector<std::string> warnings;
  int fit_degree = 0;
  /// a_0..a_d of Phi(t) ~ sum a_j t^j, from least-squares fits of c_1(t),
  /// c_2(t) and M(t) multiplied out (Phi = c^T M c). Far less sensitive to
  /// rounding than fitting Phi itself, whose low coefficients sit at 1e-9.
  std::vector<double> fit;
  double fit_residual = 0.0;  // max |Phi - c^T M c| over the samples, with the fitted c and M
  std::vector<double> fit_direct;  // plain least squares on the Phi samples
  double fit_direct_residual = 0.0;
  std::array<double, 2> window{1e-2, 1e-1};
  int slope_points = 0;
  double slope = 0.0;  // log Phi vs log t over the window
  double slope_stderr = 0.0;
  std::array<double, 2> slope_ci{0.0, 0.0};

  std::vector<double> t() const;
};

struct ScanOptions {
  int fit_degree = 8;
  std::array<double, 2> window{1e-2, 1e-1};
  double phi_floor = 1e-20;  // samples at or below this are zero for the slope fit
};

/// Warm-started sequential solves along an increasing t grid.
PhiScan scan(const ProjectedProblem& problem, std::span<const double> t_list, const ScanOptions& options = {});

/// Fits on externally supplied (t, Phi) data; used by scan() and for synthetic checks.
void fit_scan(PhiScan& scan, const ScanOptions& options);

struct ExpansionReport {
  bool grid_ok = false;
  std::string problem;
  double h = 0.0;
  double stencil_condition = 0.0;
  double phi0 = 0.0;
  double dphi0 = 0.0;
  double ddphi0 = 0.0;            // one-sided 4-point, Richardson-extrapolated when possible
  double ddphi0_predicted = 0.0;  // 2 V sum_{k>=1} c_k'(0)^2
  double truncation = 0.0;        // error estimate |D(h) - D(2h)| / 3, 0 if unavailable
  std::array<double, 3> xi_prime{};
  double xi_prime_killing = 0.0;
  bool phi0_ok = false;
  bool dphi0_ok = false;
  bool second_ok = false;
  bool ke_start = false;
  bool xi_prime_ok = true;  // only tested at a KE start
  bool order_ok = true;     // slope >= 4 - 0.3 at a KE start
  bool passed = false;
};

ExpansionReport expansion_identities(const PhiScan& scan, double volume, double tol = 1e-9);

struct AlmostCscBound {
  bool applicable = false;
  std::string problem;
  int m = 0;
  double exponent = 0.0;
  double constant = 0.0;
  double required = 0.0;  // (m + 1) / 2 - 0.3
  bool vacuous = false;   // all sup-norms below 1e-8
  bool passed = false;
  std::vector<double> sup_norms;
};

AlmostCscBound almost_csc_bound(const PhiScan& scan, int m, double coefficient_tol = 1e-9);

struct KernelReport {
  int dimension = 0;
  std::vector<double> singular_values;  // descending
  std::vector<double> angles;           // principal angles to the affine span, radians
  double complement_min_singular = 0.0;  // operator restricted to the affine complement
  double operator_norm = 0.0;
};

KernelReport verify_nondegeneracy(const SymplecticPotential& u, const PolyBasis& basis, const Quadrature& q,
                                  double rel_tol = 1e-8);

/// Principal angles (ascending) between the column spans of two coefficient
/// matrices, in the Euclidean (= L2 for an orthonormal basis) product.
std::vector<double> principal_angles(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace toric
