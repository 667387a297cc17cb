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
#include "helpers.hpp"
#include "toric/potential.hpp"

using namespace toric;

namespace {

struct Setup {
  Polytope p;
  Quadrature q;
  std::shared_ptr<const PolyBasis> b;
};

Setup setup(const Polytope& p, int degree = 8, int level = 5) {
  Quadrature q = build_quadrature(p, level);
  auto b = std::make_shared<const PolyBasis>(PolyBasis::build(p, q, degree));
  return {p, std::move(q), std::move(b)};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("canonical potential closed forms") {
  const Polytope s = fixtures::unit_square();
  const Jet j = eval_canonical(s, {0.5, 0.5}, 4);
  CHECK(j.value == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  for (double x1 : {0.1, 0.37, 0.8}) {
    const Jet k = eval_canonical(s, {x1, 0.6}, 2);
    CHECK(k.H(0, 0) == doctest::Approx(1 / (2 * x1 * (1 - x1))).epsilon(1e-14));
    CHECK(std::abs(k.H(0, 1)) < 1e-15);
  }
  CHECK_THROWS_AS(eval_canonical(s, {0.0, 0.5}, 2), OutsidePolytope);
  CHECK_THROWS_AS(eval_canonical(s, {1.5, 0.5}, 0), OutsidePolytope);
}

TEST_CASE("canonical derivatives against finite differences") {
  const Polytope s = fixtures::unit_simplex();
  const Vec2 x{0.2, 0.3};
  const double h = 1e-5;
  const Jet j = eval_canonical(s, x, 4);
  auto jx = [&](double dx, double dy) { return eval_canonical(s, {x.x + dx, x.y + dy}, 4); };
  for (int k = 0; k < 2; ++k) {
    const double dx = k == 0 ? h : 0, dy = k == 1 ? h : 0;
    const Jet p = jx(dx, dy), m = jx(-dx, -dy);
    CHECK(rel((p.value - m.value) / (2 * h), j.grad(k)) < 1e-7);
    for (int a = 0; a < 2; ++a) {
      CHECK(rel((p.grad(a) - m.grad(a)) / (2 * h), j.H(k, a)) < 1e-7);
      for (int b = 0; b < 2; ++b) {
        CHECK(rel((p.H(a, b) - m.H(a, b)) / (2 * h), j.dH[k](a, b)) < 1e-7);
        for (int l = 0; l < 2; ++l) CHECK(rel((p.dH[l](a, b) - m.dH[l](a, b)) / (2 * h), j.ddH[k][l](a, b)) < 1e-7);
      }
    }
  }
}

TEST_CASE("scalar curvature of canonical potentials") {
  const Setup sq = setup(fixtures::unit_square(), 2, 4);
  const SymplecticPotential u(sq.p);
  const MetricFields f = metric_fields(u, sq.q, nullptr, true);
  for (double s : f.s) CHECK(std::abs(s - 8.0) < 1e-9);

  const Polytope simplex = fixtures::unit_simplex();
  const Quadrature qs = build_quadrature(simplex, 4);
  const MetricFields g = metric_fields(SymplecticPotential(simplex), qs, nullptr, true);
  const auto [lo, hi] = std::minmax_element(g.s.begin(), g.s.end());
  CHECK(*hi - *lo < 1e-8);
  CHECK(*lo == doctest::Approx(12.0).epsilon(1e-9));

  // U H = I
  for (std::size_t k = 0; k < g.U.size(); ++k) CHECK((g.U[k] * g.H[k] - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("affine corrections leave curvature unchanged") {
  const Setup t = setup(fixtures::trapezoid(), 6);
  Eigen::VectorXd c = helpers::random_correction(*t.b, t.p, t.q, 11);
  const SymplecticPotential u(t.p, t.b, c);
  c(0) += 0.7;
  c(1) -= 1.3;
  c(2) += 2.1;
  const SymplecticPotential v(t.p, t.b, c);
  for (Vec2 x : {Vec2{0.1, 0.2}, Vec2{-0.8, 1.5}, Vec2{1.5, -0.9}}) {
    CHECK(std::abs(scalar_curvature(u, x) - scalar_curvature(v, x)) < 1e-10 * std::abs(scalar_curvature(u, x)));
  }
  const Eigen::MatrixXd A = assemble(u, *t.b, t.q, OperatorKind::linearized_scalar);
  const Eigen::MatrixXd B = assemble(v, *t.b, t.q, OperatorKind::linearized_scalar);
  CHECK((A - B).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("linearization matches central differences") {
  int tested = 0;
  unsigned seed = 1;
  for (const Polytope& p : {fixtures::unit_simplex(), fixtures::trapezoid(), fixtures::hexagon()}) {
    const Setup st = setup(p, 8, 4);
    const Eigen::VectorXd c = helpers::random_correction(*st.b, p, st.q, seed++);
    const Eigen::VectorXd psi = helpers::random_correction(*st.b, p, st.q, seed++, 1.0);
    const SymplecticPotential u(p, st.b, c);
    const double eps = 1e-5;
    const SymplecticPotential up(p, st.b, c + eps * psi), um(p, st.b, c - eps * psi);
    for (std::size_t k = 0; k < st.q.size(); k += 397) {
      const Vec2 x{st.q.x[k], st.q.y[k]};
      const double fd = (scalar_curvature(up, x) - scalar_curvature(um, x)) / (2 * eps);
      const double an = linearized_scalar(u, psi, x);
      CHECK(rel(an, fd) < 1e-6);
      ++tested;
    }
  }
  CHECK(tested > 20);
}

TEST_CASE("linearization of x1^2 on the square") {
  const Setup sq = setup(fixtures::unit_square(), 4);
  const SymplecticPotential u(sq.p, sq.b, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sq.b->size())));
  const Eigen::VectorXd psi = helpers::project(*sq.b, sq.q, [](double x, double) { return x * x; });
  for (double x1 : {0.1, 0.4, 0.75}) {
    // 2 (U^2)'' with U = 2x(1 - x)
    const double exact = 8.0 * (2 - 12 * x1 + 12 * x1 * x1);
    CHECK(std::abs(linearized_scalar(u, psi, {x1, 0.3}) - exact) < 1e-8);
  }
  const Eigen::VectorXd aff = helpers::project(*sq.b, sq.q, [](double x, double y) { return 3 - x + 2 * y; });
  CHECK(std::abs(linearized_scalar(u, aff, {0.3, 0.6})) < 1e-11);
}

TEST_CASE("laplacian") {
  const Setup sq = setup(fixtures::unit_square(), 3);
  const SymplecticPotential u(sq.p, sq.b, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sq.b->size())));
  const Eigen::VectorXd one = helpers::project(*sq.b, sq.q, [](double, double) { return 1.0; });
  const Eigen::VectorXd x1 = helpers::project(*sq.b, sq.q, [](double x, double) { return x; });
  for (double a : {0.2, 0.5, 0.9}) {
    CHECK(std::abs(laplacian(u, one, {a, 0.4})) < 1e-13);
    CHECK(std::abs(laplacian(u, x1, {a, 0.4}) - (2 - 4 * a)) < 1e-12);
    CHECK(std::abs(laplacian_affine(u, {1, 0}, {a, 0.4}) - (2 - 4 * a)) < 1e-12);
  }

  // divergence by central differences of U grad f
  const Setup t = setup(fixtures::trapezoid(), 6);
  const Eigen::VectorXd c = helpers::random_correction(*t.b, t.p, t.q, 5);
  const Eigen::VectorXd f = helpers::random_correction(*t.b, t.p, t.q, 6, 1.0);
  const SymplecticPotential v(t.p, t.b, c);
  const SymplecticPotential fpot(t.p, t.b, f, false);
  auto flux = [&](Vec2 x) {
    const Jet j = v.jet(x, 2);
    const Jet g = fpot.jet(x, 1);
    return Vec2d(j.H.inverse() * g.grad);
  };
  const double h = 1e-5;
  for (Vec2 x : {Vec2{0.1, 0.2}, Vec2{-0.5, 1.1}, Vec2{1.2, -0.6}}) {
    const double fd = (flux({x.x + h, x.y})(0) - flux({x.x - h, x.y})(0)) / (2 * h) +
                      (flux({x.x, x.y + h})(1) - flux({x.x, x.y - h})(1)) / (2 * h);
    CHECK(std::abs(laplacian(v, f, x) - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("scaling law") {
  const Polytope p = fixtures::unit_square();
  const Polytope p2 = validate_delzant({{{1, 0}, 0}, {{0, 1}, 0}, {{-1, 0}, 2}, {{0, -1}, 2}}).value();
  for (Vec2 x : {Vec2{0.3, 0.6}, Vec2{0.1, 0.95}}) {
    const double s1 = scalar_curvature(SymplecticPotential(p), x);
    const double s2 = scalar_curvature(SymplecticPotential(p2), 2.0 * x);
    CHECK(std::abs(s2 - 0.5 * s1) < 1e-12);
  }
}

TEST_CASE("cone exit is reported") {
  const Setup sq = setup(fixtures::unit_square(), 2);
  const Eigen::VectorXd c = helpers::project(*sq.b, sq.q, [](double x, double) { return -10 * x * x; });
  const SymplecticPotential u(sq.p, sq.b, c);
  CHECK_THROWS_AS(scalar_curvature(u, {0.5, 0.5}), ConeExit);
}

TEST_CASE("assembled operators") {
  const Setup h = setup(fixtures::hexagon(), 8);
  const SymplecticPotential u0(h.p, h.b, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(h.b->size())));
  const Eigen::MatrixXd L = assemble(u0, *h.b, h.q, OperatorKind::linearized_scalar);
  CHECK((L - L.transpose()).cwiseAbs().maxCoeff() < 1e-8);
  const Eigen::MatrixXd D = assemble(u0, *h.b, h.q, OperatorKind::laplacian);
  CHECK(D.row(0).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(D.col(0).cwiseAbs().maxCoeff() < 1e-8);
  const Eigen::MatrixXd A = assemble(u0, *h.b, h.q, OperatorKind::weighted_drift);
  const auto n = static_cast<Eigen::Index>(h.b->size());
  CHECK((A - (0.5 * D + Eigen::MatrixXd::Identity(n, n))).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("weak forms agree with strong forms") {
  // <p_i, Op p_j> with Op applied pointwise; agreement certifies the dropped
  // boundary terms
  const Polytope p = fixtures::trapezoid();
  const Quadrature q = build_quadrature(p, 5);
  const Weight w = Weight::exp_linear({-0.3, -0.3});
  const auto b = std::make_shared<const PolyBasis>(PolyBasis::build(p, q, 5, w));
  const auto bu = std::make_shared<const PolyBasis>(PolyBasis::build(p, q, 5));
  const Eigen::VectorXd c = helpers::random_correction(*bu, p, q, 3, 0.01);
  const SymplecticPotential u(p, bu, c);
  const NodeTable tu = bu->tabulate(q, 4);
  const MetricFields mf = metric_fields(u, q, &tu, true);
  const NodeTable t = b->tabulate(q, 4);
  const Eigen::MatrixXd A = assemble(mf, q, *b, t, OperatorKind::weighted_drift);
  const Eigen::MatrixXd L = assemble(mf, q, *bu, tu, OperatorKind::linearized_scalar);
  CHECK((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-8);

  const std::size_t n = b->size();
  for (std::size_t i : {0u, 2u, 5u, 11u}) {
    for (std::size_t j : {1u, 4u, 9u, 20u}) {
      double strong = 0, vol = 0, lin = 0, vol0 = 0;
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      Eigen::VectorXd ej = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      ej(static_cast<Eigen::Index>(j)) = 1;
      for (std::size_t k = 0; k < q.size(); k += 1) {
        const Vec2 x{q.x[k], q.y[k]};
        const auto kk = static_cast<Eigen::Index>(k);
        const Vec2d grad(t(1)(kk, jj), t(2)(kk, jj));
        const Mat2& U = mf.U[k];
        const double lap = mf.divU[k].dot(grad) + U(0, 0) * t(3)(kk, jj) + 2 * U(0, 1) * t(4)(kk, jj) + U(1, 1) * t(5)(kk, jj);
        const double drift = Vec2d(w.b.x, w.b.y).dot(U * grad);
        const double ww = q.w[k] * w(x);
        strong += ww * t(0)(kk, ii) * (0.5 * lap + 0.5 * drift + t(0)(kk, jj));
        vol += ww;
        lin += q.w[k] * tu(0)(kk, ii) * linearized_scalar(u, ej, x);
        vol0 += q.w[k];
      }
      CHECK(std::abs(strong / vol - A(ii, jj)) < 1e-8);
      CHECK(std::abs(lin / vol0 - L(ii, jj)) < 1e-8 * std::max(1.0, std::abs(L(ii, jj))));
    }
  }
}
