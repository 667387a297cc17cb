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

#include "toric/canonical.hpp"

#include <cmath>
#include <stdexcept>

namespace toric {

PotentialBasis orthonormal_affine_basis(const Polytope& p, const Quadrature& q, Weight weight) {
  PotentialBasis b;
  b.polytope = p;
  b.weight = weight;
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  double vol = 0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double w = q.w[k] * weight({q.x[k], q.y[k]});
    const Eigen::Vector3d m(1.0, q.x[k], q.y[k]);
    G += w * m * m.transpose();
    vol += w;
  }
  b.volume = vol;
  b.gram = G / vol;
  Eigen::LLT<Eigen::Matrix3d> llt(b.gram);
  if (llt.info() != Eigen::Success) throw std::runtime_error("orthonormal_affine_basis: degenerate Gram matrix");
  // theta = L^{-1} (1, x1, x2): Gram-Schmidt in this order
  const Eigen::Matrix3d Linv = Eigen::Matrix3d(llt.matrixL()).inverse();
  for (int i = 0; i < 3; ++i) {
    b.theta[static_cast<std::size_t>(i)] = Affine{Linv(i, 0), {Linv(i, 1), Linv(i, 2)}};
  }
  return b;
}

std::array<double, 3> inner_products(const PotentialBasis& b, const Quadrature& q,
                                     const std::function<double(Vec2)>& f) {
  std::array<double, 3> c{0, 0, 0};
  double vol = 0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const Vec2 x{q.x[k], q.y[k]};
    const double w = q.w[k] * b.weight(x);
    const double fx = f(x);
    for (std::size_t i = 0; i < 3; ++i) c[i] += w * fx * b.theta[i](x);
    vol += w;
  }
  for (double& v : c) v /= vol;
  return c;
}

Affine project_affine(const PotentialBasis& b, const std::array<double, 3>& coeffs, Projection mode) {
  if (mode == Projection::complement) throw std::invalid_argument("project_affine: complement is not affine");
  Affine a;
  for (std::size_t i = mode == Projection::killing ? 1 : 0; i < 3; ++i) a = a + b.theta[i] * coeffs[i];
  return a;
}

std::function<double(Vec2)> project(const PotentialBasis& b, const Quadrature& q, std::function<double(Vec2)> f,
                                    Projection mode) {
  const auto c = inner_products(b, q, f);
  if (mode == Projection::complement) {
    const Affine full = project_affine(b, c, Projection::full);
    return [f = std::move(f), full](Vec2 x) { return f(x) - full(x); };
  }
  const Affine a = project_affine(b, c, mode);
  return [a](Vec2 x) { return a(x); };
}

Moments moments(const Polytope& p) {
  Moments m;
  const auto& v = p.vertices();
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = v[i];
    const Vec2 b = v[(i + 1) % n];
    const double c = cross(a, b);
    m.first = m.first + (c / 6.0) * (a + b);
  }
  m.area = p.area();
  for (std::size_t f = 0; f < p.facet_count(); ++f) {
    const auto [a, b] = p.edge(f);
    const double s = p.sigma_length(f);
    m.sigma += s;
    m.boundary_first = m.boundary_first + (0.5 * s) * (a + b);
  }
  return m;
}

double s_bar_boundary(const Polytope& p, double kappa) { return kappa * p.boundary_sigma() / p.area(); }

double futaki_boundary(const Polytope& p, const Affine& f, std::optional<double> kappa) {
  if (!kappa) throw std::invalid_argument("futaki_boundary: kappa is not calibrated");
  const Moments m = moments(p);
  const double boundary = f.c * m.sigma + dot(f.g, m.boundary_first);
  const double interior = f.c * m.area + dot(f.g, m.first);
  return *kappa * (boundary - m.sigma / m.area * interior);
}

double futaki_scale(const Polytope& p, const Quadrature& q, const Affine& f, double kappa) {
  const double bd = q.integrate_boundary([&](double x, double y) { return std::abs(f({x, y})); });
  const double in = q.integrate([&](double x, double y) { return std::abs(f({x, y})); });
  return kappa * bd + s_bar_boundary(p, kappa) * in;
}

double futaki_interior(const SymplecticPotential& u, const Quadrature& q, const Affine& f, double* s_bar) {
  std::unique_ptr<NodeTable> table;
  if (u.coefficients().size() > 0) table = std::make_unique<NodeTable>(u.basis()->tabulate(q, 4));
  const MetricFields mf = metric_fields(u, q, table.get(), true);
  double vol = 0, ints = 0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    vol += q.w[k];
    ints += q.w[k] * mf.s[k];
  }
  const double sb = ints / vol;
  if (s_bar) *s_bar = sb;
  double acc = 0;
  for (std::size_t k = 0; k < q.size(); ++k) acc += q.w[k] * (mf.s[k] - sb) * f({q.x[k], q.y[k]});
  return acc;
}

FutakiReport futaki_report(const SymplecticPotential& u, const Quadrature& q, const Affine& f, double kappa) {
  FutakiReport r;
  r.interior = futaki_interior(u, q, f, &r.s_bar);
  r.boundary = futaki_boundary(u.polytope(), f, kappa);
  r.discrepancy = std::abs(r.interior - r.boundary);
  return r;
}

double calibrate_kappa(int level, int order) {
  const Polytope simplex = validate_delzant({{{1, 0}, 0}, {{0, 1}, 0}, {{-1, -1}, 1}}, "simplex").value();
  const Quadrature q = build_quadrature(simplex, level, order);
  const MetricFields mf = metric_fields(SymplecticPotential(simplex), q, nullptr, true);
  double acc = 0;
  for (std::size_t k = 0; k < q.size(); ++k) acc += q.w[k] * mf.s[k];
  return acc / simplex.boundary_sigma();
}

namespace {

void require_anticanonical(const Polytope& p) {
  const double l0 = p.facets().front().offset;
  for (const Facet& f : p.facets()) {
    if (f.offset != l0 || !(l0 > 0)) {
      throw std::invalid_argument("soliton field: polygon '" + p.name() +
                                  "' is not in anticanonical normalization (all offsets equal)");
    }
  }
}

struct ExpMoments {
  double m0 = 0;
  Vec2d m1 = Vec2d::Zero();
  Mat2 m2 = Mat2::Zero();
};

ExpMoments exp_moments(const Quadrature& q, Vec2 b) {
  ExpMoments e;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const Vec2d x(q.x[k], q.y[k]);
    const double w = q.w[k] * std::exp(b.x * x(0) + b.y * x(1));
    e.m0 += w;
    e.m1 += w * x;
    e.m2 += w * x * x.transpose();
  }
  return e;
}

}  // namespace

SolitonField soliton_field_for(const Polytope& p, const Quadrature& q, Vec2 b) {
  (void)p;
  const ExpMoments e = exp_moments(q, b);
  SolitonField f;
  f.b = b;
  f.residual = e.m1.norm();
  // zero e^{theta}-mean: int (<b,x> + c) e^{<b,x>} = 0
  f.theta_constant = -(b.x * e.m1(0) + b.y * e.m1(1)) / e.m0;
  Eigen::SelfAdjointEigenSolver<Mat2> es(e.m2);
  f.hessian_min_eig = es.eigenvalues()(0);
  return f;
}

namespace {

// minimizes the convex m0(b) = int e^{<b,x>} over the nodes of q
Vec2d minimize_exp(const Quadrature& q, double tol, int max_iter, int* iterations, bool* converged) {
  Vec2d b = Vec2d::Zero();
  int it = 0;
  *converged = false;
  for (; it < max_iter; ++it) {
    const ExpMoments e = exp_moments(q, {b(0), b(1)});
    if (e.m1.norm() < tol) {
      *converged = true;
      break;
    }
    const Vec2d step = e.m2.ldlt().solve(-e.m1);
    // the objective is strictly convex; halve until it decreases
    double a = 1.0;
    for (int h = 0; h < 40; ++h, a *= 0.5) {
      const Vec2d trial = b + a * step;
      if (exp_moments(q, {trial(0), trial(1)}).m0 <= e.m0) break;
    }
    b += a * step;
  }
  *iterations = it;
  return b;
}

}  // namespace

SolitonField tian_zhu_field(const Polytope& p, const Quadrature& q, double tol, int max_iter) {
  require_anticanonical(p);
  if (!p.contains_interior({0, 0})) throw std::invalid_argument("tian_zhu_field: origin is not interior");
  int it = 0;
  bool converged = false;
  const Vec2d b = minimize_exp(q, tol, max_iter, &it, &converged);
  SolitonField f = soliton_field_for(p, q, {b(0), b(1)});
  f.iterations = it;
  f.converged = converged;
  return f;
}

double modified_futaki(const Polytope& p, const Quadrature& q, const SolitonField& field, const Affine& f) {
  require_anticanonical(p);
  double acc = 0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const Vec2 x{q.x[k], q.y[k]};
    acc += q.w[k] * std::exp(field.theta(x)) * dot(f.g, x);
  }
  return acc;
}

}  // namespace toric
