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

#include "toric/poly_basis.hpp"

#include <algorithm>
#include <stdexcept>

#include "toric/kernels.hpp"

namespace toric {

namespace {

struct Lowering {
  int from = -1;  // derivative index with one fewer derivative in `dir`, or -1
  double factor = 0.0;
};

Lowering lower(int k, int dir, double inv_scale) {
  // recover (ax, ay) from the flat index
  int order = 0;
  while (deriv_count(order) <= k) ++order;
  const int ay = k - deriv_count(order - 1);
  const int ax = order - ay;
  const int a = dir == 0 ? ax : ay;
  if (a == 0) return {};
  return {dir == 0 ? deriv_index(ax - 1, ay) : deriv_index(ax, ay - 1), a * inv_scale};
}

}  // namespace

PolyBasis PolyBasis::build(const Polytope& p, const Quadrature& q, int degree, Weight weight) {
  if (degree < 1) throw std::invalid_argument("PolyBasis: degree must be at least 1");
  PolyBasis b;
  b.degree_ = degree;
  b.weight_ = weight;
  b.center_ = p.vertex_mean();
  double radius = 0;
  for (const Vec2& v : p.vertices()) radius = std::max(radius, std::hypot(v.x - b.center_.x, v.y - b.center_.y));
  b.scale_ = radius;

  for (int d = 0; d <= degree; ++d) {
    for (int a = d; a >= 0; --a) b.seed_.push_back({a, d - a});
  }
  const std::size_t n = b.seed_.size();
  b.parent_.assign(n, 0);
  b.dir_.assign(n, -1);
  auto index_of = [&](int a, int c) {
    const int d = a + c;
    return static_cast<std::size_t>(deriv_count(d - 1) + c);
  };
  for (std::size_t i = 1; i < n; ++i) {
    const auto [a, c] = b.seed_[i];
    if (a > 0) {
      b.parent_[i] = index_of(a - 1, c);
      b.dir_[i] = 0;
    } else {
      b.parent_[i] = index_of(a, c - 1);
      b.dir_[i] = 1;
    }
  }

  const std::size_t m = q.size();
  std::vector<double> wq(m);
  double vol = 0;
  for (std::size_t k = 0; k < m; ++k) {
    wq[k] = q.w[k] * weight({q.x[k], q.y[k]});
    vol += wq[k];
  }
  b.volume_ = vol;
  for (double& w : wq) w /= vol;

  std::vector<double> y0(m), y1(m);
  for (std::size_t k = 0; k < m; ++k) {
    y0[k] = (q.x[k] - b.center_.x) / b.scale_;
    y1[k] = (q.y[k] - b.center_.y) / b.scale_;
  }

  b.h_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  b.norm_.assign(n, 1.0);
  std::vector<std::vector<double>> cols(n, std::vector<double>(m));
  std::vector<double> v(m);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      std::fill(v.begin(), v.end(), 1.0);
    } else {
      simd::hadamard(b.dir_[i] == 0 ? y0 : y1, cols[b.parent_[i]], v);
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const double c = simd::weighted_dot(v, cols[j], wq);
        b.h_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += c;
        simd::axpy(-c, cols[j], v);
      }
    }
    const double nn = std::sqrt(simd::weighted_dot(v, v, wq));
    if (!(nn > 1e-13)) throw std::runtime_error("PolyBasis: Gram matrix is numerically singular");
    b.norm_[i] = nn;
    for (std::size_t k = 0; k < m; ++k) cols[i][k] = v[k] / nn;
  }
  return b;
}

void PolyBasis::evaluate(Vec2 x, int max_order, std::span<double> out, std::size_t count) const {
  if (max_order < 0 || max_order > kMaxDerivOrder) throw std::invalid_argument("PolyBasis: derivative order out of range");
  const int nd = deriv_count(max_order);
  if (count > size() || out.size() < count * static_cast<std::size_t>(nd)) {
    throw std::invalid_argument("PolyBasis: output span too small");
  }
  const double inv = 1.0 / scale_;
  const double y[2] = {(x.x - center_.x) * inv, (x.y - center_.y) * inv};
  Lowering low[2][15];
  for (int dir = 0; dir < 2; ++dir)
    for (int k = 0; k < nd; ++k) low[dir][k] = lower(k, dir, inv);

  for (std::size_t i = 0; i < count; ++i) {
    double* o = out.data() + i * static_cast<std::size_t>(nd);
    if (i == 0) {
      o[0] = 1.0;
      for (int k = 1; k < nd; ++k) o[k] = 0.0;
    } else {
      const int dir = dir_[i];
      const double* par = out.data() + parent_[i] * static_cast<std::size_t>(nd);
      for (int k = 0; k < nd; ++k) {
        double v = y[dir] * par[k];
        if (low[dir][k].from >= 0) v += low[dir][k].factor * par[low[dir][k].from];
        o[k] = v;
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      const double c = h_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double* pj = out.data() + j * static_cast<std::size_t>(nd);
      for (int k = 0; k < nd; ++k) o[k] -= c * pj[k];
    }
    for (int k = 0; k < nd; ++k) o[k] /= norm_[i];
  }
}

double PolyBasis::value(std::size_t i, Vec2 x) const {
  std::vector<double> buf(i + 1);
  evaluate(x, 0, buf, i + 1);
  return buf[i];
}

NodeTable PolyBasis::tabulate(std::span<const double> xs, std::span<const double> ys, int max_order) const {
  if (max_order < 0 || max_order > kMaxDerivOrder) throw std::invalid_argument("PolyBasis: derivative order out of range");
  if (xs.size() != ys.size()) throw std::invalid_argument("PolyBasis: coordinate spans differ in length");
  const int nd = deriv_count(max_order);
  const auto m = static_cast<Eigen::Index>(xs.size());
  const auto n = static_cast<Eigen::Index>(size());
  NodeTable t;
  t.max_order = max_order;
  t.d.assign(static_cast<std::size_t>(nd), Eigen::MatrixXd(m, n));
  const double inv = 1.0 / scale_;
  Eigen::VectorXd y[2] = {Eigen::VectorXd(m), Eigen::VectorXd(m)};
  for (Eigen::Index k = 0; k < m; ++k) {
    y[0](k) = (xs[static_cast<std::size_t>(k)] - center_.x) * inv;
    y[1](k) = (ys[static_cast<std::size_t>(k)] - center_.y) * inv;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < nd; ++k) {
      auto col = t.d[static_cast<std::size_t>(k)].col(i);
      if (i == 0) {
        col.setConstant(k == 0 ? 1.0 : 0.0);
      } else {
        const int dir = dir_[static_cast<std::size_t>(i)];
        const auto par = static_cast<Eigen::Index>(parent_[static_cast<std::size_t>(i)]);
        col = y[dir].cwiseProduct(t.d[static_cast<std::size_t>(k)].col(par));
        const Lowering lw = lower(k, dir, inv);
        if (lw.from >= 0) col += lw.factor * t.d[static_cast<std::size_t>(lw.from)].col(par);
      }
      // subtract earlier elements one at a time, matching evaluate()
      for (Eigen::Index j = 0; j < i; ++j) col -= h_(i, j) * t.d[static_cast<std::size_t>(k)].col(j);
      col /= norm_[static_cast<std::size_t>(i)];
    }
  }
  return t;
}

std::array<double, 3> PolyBasis::affine_coefficients(std::size_t i) const {
  if (i >= 3) throw std::invalid_argument("PolyBasis: element is not affine");
  // evaluate value and gradient at the center, which is exact for affine elements
  double buf[9];
  evaluate(center_, 1, std::span<double>(buf, 9), 3);
  const double* o = buf + i * 3;
  return {o[0] - o[1] * center_.x - o[2] * center_.y, o[1], o[2]};
}

}  // namespace toric
