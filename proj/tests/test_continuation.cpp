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

#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "toric/continuation.hpp"

using namespace toric;

namespace {

ClassDeformation product_direction() { return ClassDeformation::raw(fixtures::unit_square(), {0, 0, 1, 0}); }
ClassDeformation exceptional_direction() { return ClassDeformation::raw(fixtures::trapezoid(), {0, 0, 0, -1}); }

double rel(double a, double b, double floor = 1e-15) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}


}  // namespace

TEST_CASE("square at t = 0 is solved in one step") {
  const ProjectedProblem pr(product_direction());
  const ProjectedSolveState s = solve_projected(pr, 0.0);
  REQUIRE(s.converged);
  CHECK(s.iterations == 1);
  CHECK(s.phi.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s.xi[0] == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(s.killing_norm() < 1e-12);
  CHECK(detect_csc(s));
  const PhiValue v = phi_value(pr, s);
  CHECK(std::abs(v.integral) < 1e-12);
  CHECK(std::abs(v.quadratic) < 1e-20);
  const Affine th = theta_field(pr, s);
  CHECK(std::abs(th.c) + std::abs(th.g.x) + std::abs(th.g.y) < 1e-12);
}

TEST_CASE("product classes stay product metrics") {
  const ProjectedProblem pr(product_direction());
  const ProjectedSolveState prev = solve_projected(pr, 0.1);
  for (double t : {0.2, 0.4}) {
    const ProjectedSolveState s = solve_projected(pr, t, &prev);
    REQUIRE(s.converged);
    CHECK(s.killing_norm() < 1e-8);
    CHECK(detect_csc(s));
    CHECK(s.xi[0] == doctest::Approx(4.0 + 4.0 / (1.0 + t)).epsilon(1e-10));
    CHECK(phi_value(pr, s).quadratic < 1e-10);
    const SymplecticPotential u = potential_of(s);
    const Quadrature q = build_quadrature(s.polytope);
    double worst = 0;
    for (std::size_t k = 0; k < q.size(); k += 7) {
      const Vec2 x{q.x[k], q.y[k]};
      const Mat2 d = u.jet(x, 2).H - oracles::rectangle_hessian(0, 1 + t, 0, 1, x);
      worst = std::max(worst, d.cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("blowup of CP2 is extremal but not cscK") {
  const ProjectedProblem pr(exceptional_direction());
  const ProjectedSolveState s = solve_projected(pr, 0.0);
  REQUIRE(s.converged);
  CHECK(s.residual < 1e-10);
  CHECK(s.killing_norm() > 1e-3);
  CHECK_FALSE(detect_csc(s));
  CHECK(s.polytope.name() == fixtures::trapezoid().name());
  CHECK(rel(s.xi[0], s_bar_boundary(s.polytope, 2.0)) < 1e-6);
  CHECK(s.phi.head(3).cwiseAbs().maxCoeff() < 1e-12);

  const PhiValue v = phi_value(pr, s);
  CHECK(v.quadratic > 0);
  CHECK(rel(v.integral, v.quadratic) < 1e-9);
  // at t = 0 the Gram matrix is V times the identity
  const double V = s.polytope.area();
  CHECK(rel(v.quadratic, V * (s.xi[1] * s.xi[1] + s.xi[2] * s.xi[2])) < 1e-12);
  const Affine th = theta_field(pr, s);
  CHECK(rel(futaki_boundary(s.polytope, th, 2.0), v.quadratic) < 1e-6);
}

TEST_CASE("theta field and Phi on a deformed class") {
  const ProjectedProblem pr(exceptional_direction());
  const ProjectedSolveState s = solve_projected(pr, 0.3);
  REQUIRE(s.converged);
  const Affine th = theta_field(pr, s);
  const auto& base = pr.theta().theta;
  CHECK(th.g.x == doctest::Approx(s.xi[1] * base[1].g.x + s.xi[2] * base[2].g.x).epsilon(1e-15));
  CHECK(th.g.y == doctest::Approx(s.xi[1] * base[1].g.y + s.xi[2] * base[2].g.y).epsilon(1e-15));
  const Quadrature q = build_quadrature(s.polytope);
  CHECK(std::abs(q.integrate([&](double x, double y) { return th({x, y}); })) / s.polytope.area() < 1e-12);

  const PhiValue v = phi_value(pr, s);
  CHECK(rel(v.integral, v.quadratic) < 1e-9);
  CHECK(rel(v.weak, v.quadratic) < 1e-12);
  CHECK(rel(v.c0_centered, s_bar_boundary(s.polytope, 2.0)) < 1e-6);
  CHECK(v.quadratic > 0);
}

TEST_CASE("warm starts do not change the solution") {
  const ProjectedProblem pr(exceptional_direction());
  const ProjectedSolveState half = solve_projected(pr, 0.1);
  const ProjectedSolveState warm = solve_projected(pr, 0.2, &half);
  const ProjectedSolveState cold = solve_projected(pr, 0.2);
  REQUIRE(warm.converged);
  REQUIRE(cold.converged);
  CHECK(warm.warm_start != "cold");
  CHECK(warm.iterations <= cold.iterations);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(warm.xi[k] - cold.xi[k]) < 1e-8);
  CHECK((warm.phi - cold.phi).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("Phi does not depend on the basis degree") {
  SolverOptions lo, hi;
  lo.degree = 8;
  hi.degree = 10;
  const ProjectedProblem a(exceptional_direction(), lo), b(exceptional_direction(), hi);
  const double pa = phi_value(a, solve_projected(a, 0.2)).quadratic;
  const double pb = phi_value(b, solve_projected(b, 0.2)).quadratic;
  CHECK(rel(pa, pb) < 1e-6);
}

TEST_CASE("leaving the combinatorial type") {
  const ProjectedProblem pr(exceptional_direction());
  CHECK_THROWS_AS(solve_projected(pr, 2.5), CombinatoricsError);
  try {
    solve_projected(pr, 2.5);
  } catch (const CombinatoricsError& e) {
    CHECK(e.critical_t() == doctest::Approx(2.0));
  }
  const ProjectedSolveState s = solve_projected(pr, 0.0);
  ProjectedSolveState bad = s;
  bad.converged = false;
  CHECK_THROWS_AS(phi_value(pr, bad), std::invalid_argument);
}

TEST_CASE("square scans vanish identically") {
  const ProjectedProblem pr(product_direction());
  const std::vector<double> ts{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  const PhiScan s = scan(pr, ts, ScanOptions{4, {0.05, 0.3}, 1e-20});
  CHECK(s.samples.size() == ts.size());
  for (const auto& x : s.samples) CHECK(x.phi.quadratic < 1e-10);
  CHECK(s.slope_points == 0);
  const ExpansionReport e = expansion_identities(s, pr.base().area());
  CHECK(e.grid_ok);
  CHECK(e.passed);
  CHECK(std::abs(e.ddphi0) < 1e-9);
  const AlmostCscBound b = almost_csc_bound(s, 3);
  CHECK(b.applicable);
  CHECK(b.vacuous);
  CHECK(b.passed);
}

TEST_CASE("injected t^2 fails the expansion identity") {
  PhiScan s;
  for (int i = 0; i <= 6; ++i) {
    PhiSample x;
    x.state.t = 0.01 * i;
    x.state.converged = true;
    x.state.xi = {4, 0, 0};
    x.phi.quadratic = x.state.t * x.state.t;
    s.samples.push_back(x);
  }
  fit_scan(s, ScanOptions{3, {0.01, 0.06}, 1e-20});
  CHECK(s.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.fit_direct[2] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(s.fit[2]) < 1e-15);  // the multiplied-out fit only sees c and M
  const ExpansionReport e = expansion_identities(s, 1.0);
  CHECK(e.phi0_ok);
  CHECK(e.dphi0_ok);
  CHECK(e.ddphi0 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK_FALSE(e.second_ok);
  CHECK_FALSE(e.passed);
  CHECK_FALSE(almost_csc_bound(s, 3).applicable);

  PhiScan sparse;
  sparse.samples = {s.samples[0], s.samples[2]};
  CHECK_FALSE(expansion_identities(sparse, 1.0).grid_ok);
  const std::vector<double> decreasing{0.2, 0.1};
  CHECK_THROWS_AS(scan(ProjectedProblem(product_direction()), decreasing), std::invalid_argument);
}

TEST_CASE("hexagon Phi vanishes to fourth order") {
  // Xi(t) is fixed by the class alone, so a small basis is enough here
  SolverOptions opt;
  opt.degree = 6;
  opt.quadrature.level = 4;
  std::vector<std::string> warnings;
  const ClassDeformation c =
      ClassDeformation::reduced(fixtures::hexagon(), {0.3, -0.7, 0.2, 0.9, -0.4, 0.1}, true, &warnings);
  CHECK(warnings.size() == 3);
  const ProjectedProblem pr(c, opt);
  std::vector<double> ts;
  for (int i = 0; i <= 10; ++i) ts.push_back(0.01 * i);
  const PhiScan s = scan(pr, ts);
  REQUIRE(s.samples.size() == ts.size());
  CHECK(s.slope > 3.7);
  CHECK(s.slope < 4.3);
  const ExpansionReport e = expansion_identities(s, pr.base().area());
  CHECK(e.ke_start);
  CHECK(e.xi_prime_killing < 1e-6);
  CHECK(e.passed);
  for (int j = 1; j <= 3; ++j) CHECK(std::abs(s.fit[static_cast<std::size_t>(j)]) < 1e-9);
  const AlmostCscBound b = almost_csc_bound(s, 3);
  CHECK(b.applicable);
  CHECK(b.exponent > 1.7);
}

TEST_CASE("kernel of the linearized operator") {
  for (const Polytope& p : {fixtures::unit_square(), fixtures::hexagon()}) {
    const Quadrature q = build_quadrature(p);
    const PolyBasis b = PolyBasis::build(p, q, 8);
    const KernelReport k = verify_nondegeneracy(SymplecticPotential(p), b, q);
    CHECK(k.dimension == 3);
    REQUIRE(k.angles.size() == 3);
    for (double a : k.angles) CHECK(a < 1e-6);
    CHECK(k.complement_min_singular > 1.0);
    CHECK(std::is_sorted(k.singular_values.rbegin(), k.singular_values.rend()));
  }
  // on the square the smallest nonzero mode is (x1 - 1/2)^2 type with eigenvalue 32 / V
  const Polytope sq = fixtures::unit_square();
  const Quadrature q = build_quadrature(sq);
  const KernelReport k = verify_nondegeneracy(SymplecticPotential(sq), PolyBasis::build(sq, q, 6), q);
  CHECK(k.complement_min_singular == doctest::Approx(32.0).epsilon(1e-9));

  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 2);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 1);
  b(0, 0) = 1;
  b(2, 0) = 1;
  const auto ang = principal_angles(a, b);
  REQUIRE(ang.size() == 1);
  CHECK(ang[0] == doctest::Approx(M_PI / 4));
}
