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
#include "toric/continuation.hpp"

namespace toric {

/// A class P with a fixed soliton field b. The weight e^{theta_b} is
/// recentred on P (zero weighted mean of theta_b).
struct SolitonProblem {
  Polytope polytope;
  SolitonField field;
  SolverOptions options;
};

/// Recentres b on p and packs the problem.
SolitonProblem make_soliton_problem(const Polytope& p, Vec2 b, SolverOptions options = {});

struct SolitonSolveState {
  Polytope polytope;
  SolitonField field;
  std::shared_ptr<const PolyBasis> basis;  // e^{theta_b}-orthonormal on polytope
  PotentialBasis theta;                    // weighted affine basis carrying mu
  Eigen::VectorXd phi;                     // affine coefficients stay zero
  std::array<double, 3> mu{};
  double s_bar = 0.0;
  double residual = 0.0;
  double step = 0.0;
  int iterations = 0;
  bool converged = false;
  double compatibility = 0.0;  // int (s - s_bar - Delta theta_b) dmu at the nodes
  std::string warm_start = "cold";
  std::string failure;

  double killing_norm() const { return std::hypot(mu[1], mu[2]); }
};

/// Damped Newton on (phi, mu) for s(u) - s_bar - Delta_u theta_b = <mu, Theta_w>,
/// tested against the weighted basis with weight e^{theta_b}. Like
/// solve_projected it reports failures in the state instead of throwing.
SolitonSolveState extremal_soliton_solve(const SolitonProblem& problem, const SolitonSolveState* init = nullptr);

SymplecticPotential potential_of(const SolitonSolveState& state);

struct KrsReport {
  bool anticanonical = false;
  double killing_norm = 0.0;
  bool killing_small = false;
  bool krs = false;  // both conditions
  std::string verdict;
  double futaki_norm = 0.0;  // boundary Futaki of the class on theta_1, theta_2
  bool futaki_vanishes = false;
  double theta_term_sup = 0.0;  // sup over nodes of |Delta_u theta_b|
  bool csc_when_futaki_vanishes = true;  // theta term is zero; only checked when futaki_vanishes
};

KrsReport krs_certify(const SolitonProblem& problem, const SolitonSolveState& state, double tol = 1e-6);

struct SpectrumReport {
  std::vector<double> eigenvalues;  // ascending modulus
  Eigen::MatrixXd eigenvectors;     // basis coefficients, columns match eigenvalues
  double symmetry_error = 0.0;      // max |A - A^T| / max |A| before symmetrizing
  double spectral_radius = 0.0;
  double kernel_tol = 0.0;
  int kernel_dimension = 0;
  std::vector<double> angles;  // kernel vs weighted-centred affine functions
  double gap = 0.0;            // |first non-kernel eigenvalue| / kernel_tol
};

/// Lowest `count` eigenpairs (by modulus) of psi -> Delta psi + psi + X(psi) in
/// the e^{theta_b} inner product. `basis` must carry the field's weight.
SpectrumReport weighted_spectrum(const SymplecticPotential& u, const SolitonField& field, const PolyBasis& basis,
                                 const Quadrature& q, int count, double kernel_rel_tol = 1e-6);

SpectrumReport weighted_spectrum(const SolitonSolveState& state, int count, double kernel_rel_tol = 1e-6);

struct ProbeReport {
  int unknowns = 0;
  int kernel_dimension = 0;  // includes the three affine directions of phi
  std::vector<double> singular_values;  // descending
  std::vector<double> angles;           // kernel vs affine phi directions
  double gap = 0.0;  // smallest singular value above the kernel threshold, over the largest
};

/// SVD of the Jacobian of (phi, mu) -> weak residual at a converged state, with
/// phi over the whole basis. Data only.
ProbeReport remark_probe(const SolitonProblem& problem, const SolitonSolveState& state, double rel_tol = 1e-8);

struct FieldSearch {
  SolitonSolveState state;  // fixed-field solve at the final b
  int iterations = 0;
  bool converged = false;
  std::string failure;
};

/// Newton over b for the field whose fixed-field solve on `p` has
/// mu_1 = mu_2 = 0. (mu_1, mu_2) depend on the class and b only, so this is a
/// two-dimensional root search with a finite-difference Jacobian.
FieldSearch adapt_field(const Polytope& p, Vec2 start, const SolverOptions& options = {},
                        const SolitonSolveState* init = nullptr, double tol = 1e-10, int max_iter = 20);

struct PathOptions {
  bool adapt_field = false;  // default keeps the base field along the path
};

struct SolitonPathEntry {
  double t = 0.0;
  SolitonSolveState state;  // converged == false with failure on error
};

/// Lowers the offset of `exceptional_facet` by t (class c1 - t[E]) and solves
/// along t_list with warm starts.
std::vector<SolitonPathEntry> soliton_path(const Polytope& base, std::size_t exceptional_facet,
                                           std::span<const double> t_list, const SolverOptions& options = {},
                                           const PathOptions& path = {});

}  // namespace toric
