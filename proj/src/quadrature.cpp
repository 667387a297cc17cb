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

#include "toric/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace toric {

Rule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  // Golub-Welsch on the Jacobi matrix of the Legendre recurrence
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    r.x[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
    r.w[i] = v0 * v0;  // 2 * v0^2 on [-1, 1], halved by the map
  }
  // symmetrize to remove eigen-solver noise
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double xi = 0.5 * (r.x[i] + 1.0 - r.x[j]);
    const double wi = 0.5 * (r.w[i] + r.w[j]);
    r.x[i] = xi;
    r.x[j] = 1.0 - xi;
    r.w[i] = r.w[j] = wi;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.5;
  return r;
}

Rule1D graded_rule(int level, int n) {
  if (level < 0) throw std::invalid_argument("graded_rule: negative level");
  const Rule1D g = gauss_legendre(n);
  std::vector<double> breaks{0.0};
  for (int k = 1; k <= level; ++k) breaks.push_back(1.0 - std::ldexp(1.0, -k));
  breaks.push_back(1.0);
  Rule1D r;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s];
    const double h = breaks[s + 1] - a;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      r.x.push_back(a + h * g.x[i]);
      r.w.push_back(h * g.w[i]);
    }
  }
  return r;
}

Rule1D graded_rule_symmetric(int depth, int n) {
  if (depth <= 0) return gauss_legendre(n);
  const Rule1D half = graded_rule(depth, n);  // graded toward 1 on [0, 1]
  Rule1D r;
  for (std::size_t i = half.x.size(); i-- > 0;) {
    r.x.push_back(0.5 * (1.0 - half.x[i]));
    r.w.push_back(0.5 * half.w[i]);
  }
  for (std::size_t i = 0; i < half.x.size(); ++i) {
    r.x.push_back(0.5 + 0.5 * half.x[i]);
    r.w.push_back(0.5 * half.w[i]);
  }
  return r;
}

Quadrature build_quadrature(const Polytope& p, int level, int order) {
  return build_quadrature(p, QuadratureOptions{level, order, false});
}

Quadrature build_quadrature(const Polytope& p, const QuadratureOptions& options) {
  const int level = options.level;
  const int order = options.order;
  if (level < 1) throw std::invalid_argument("build_quadrature: level must be at least 1");
  if (order < 1) throw std::invalid_argument("build_quadrature: order must be positive");
  Quadrature q;
  q.level = level;
  q.order = order;
  const Rule1D gauss = gauss_legendre(order);
  const Rule1D tangential = gauss;
  const Vec2 c = p.vertex_mean();
  const auto& verts = p.vertices();
  const std::size_t m = verts.size();
  // radial strips [1 - 2^-k, 1 - 2^-(k+1)], the last one closing at r = 1
  std::vector<Rule1D> strips;
  std::vector<double> breaks{0.0};
  for (int k = 1; k <= level; ++k) breaks.push_back(1.0 - std::ldexp(1.0, -k));
  breaks.push_back(1.0);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    Rule1D r;
    const double h = breaks[k + 1] - breaks[k];
    for (std::size_t i = 0; i < gauss.x.size(); ++i) {
      r.x.push_back(breaks[k] + h * gauss.x[i]);
      r.w.push_back(h * gauss.w[i]);
    }
    strips.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 a = verts[i] - c;
    const Vec2 b = verts[(i + 1) % m] - c;
    const double jac = std::abs(cross(a, b));
    // x = c + r ((1 - s) a + s b), dx = r |a x b| dr ds
    for (std::size_t k = 0; k < strips.size(); ++k) {
      const Rule1D& radial = strips[k];
      const Rule1D tang = options.corner_grading ? graded_rule_symmetric(std::min(static_cast<int>(k), options.corner_depth), order) : tangential;
      for (std::size_t ir = 0; ir < radial.x.size(); ++ir) {
        const double r = radial.x[ir];
        for (std::size_t is = 0; is < tang.x.size(); ++is) {
          const double s = tang.x[is];
          const Vec2 pt = c + r * ((1.0 - s) * a + s * b);
          q.x.push_back(pt.x);
          q.y.push_back(pt.y);
          q.w.push_back(radial.w[ir] * tang.w[is] * r * jac);
        }
      }
    }
  }
  q.boundary.resize(p.facet_count());
  for (std::size_t f = 0; f < p.facet_count(); ++f) {
    const auto [a, b] = p.edge(f);
    const double scale = p.sigma_length(f);
    auto& bd = q.boundary[f];
    for (std::size_t i = 0; i < tangential.x.size(); ++i) {
      const double s = tangential.x[i];
      const Vec2 pt = (1.0 - s) * a + s * b;
      bd.x.push_back(pt.x);
      bd.y.push_back(pt.y);
      bd.w.push_back(tangential.w[i] * scale);
    }
  }
  return q;
}

}  // namespace toric
