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

#include "toric/potential.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "toric/kernels.hpp"
#include "toric/parallel.hpp"

namespace toric {

namespace {

std::string at(Vec2 x) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.17g, %.17g)", x.x, x.y);
  return buf;
}

// derivative index of d_i d_j d^alpha
int hess_index(int i, int j, int ax, int ay) {
  return deriv_index((i == 0) + (j == 0) + ax, (i == 1) + (j == 1) + ay);
}

template <class Get>
Jet jet_from(Get&& d, int order) {
  Jet j;
  j.order = order;
  j.value = d(0);
  if (order >= 1) j.grad = Vec2d(d(1), d(2));
  if (order >= 2) {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) j.H(a, b) = d(hess_index(a, b, 0, 0));
  }
  if (order >= 3) {
    for (int k = 0; k < 2; ++k)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) j.dH[k](a, b) = d(hess_index(a, b, k == 0, k == 1));
  }
  if (order >= 4) {
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) j.ddH[k][l](a, b) = d(hess_index(a, b, (k == 0) + (l == 0), (k == 1) + (l == 1)));
  }
  return j;
}

double trace_div2(const std::array<std::array<Mat2, 2>, 2>& dd) {
  // sum_ij (d_i d_j M)_{ij}
  double s = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s += dd[i][j](i, j);
  return s;
}

}  // namespace

Jet& Jet::operator+=(const Jet& o) {
  value += o.value;
  grad += o.grad;
  H += o.H;
  for (int k = 0; k < 2; ++k) {
    dH[k] += o.dH[k];
    for (int l = 0; l < 2; ++l) ddH[k][l] += o.ddH[k][l];
  }
  order = std::min(order, o.order);
  return *this;
}

Jet eval_canonical(const Polytope& p, Vec2 x, int order) {
  if (order < 0 || order > 4) throw std::invalid_argument("eval_canonical: order must be in 0..4");
  Jet j;
  j.order = order;
  for (const Facet& f : p.facets()) {
    const double l = f.ell(x);
    if (!(l > 0)) throw OutsidePolytope("eval_canonical: point " + at(x) + " is not interior");
    const Vec2d n(f.normal[0], f.normal[1]);
    j.value += 0.5 * l * std::log(l);
    if (order >= 1) j.grad += 0.5 * (std::log(l) + 1.0) * n;
    if (order >= 2) {
      const Mat2 nn = n * n.transpose();
      j.H += (0.5 / l) * nn;
      if (order >= 3) {
        const double il2 = 1.0 / (l * l);
        for (int k = 0; k < 2; ++k) j.dH[k] -= (0.5 * il2 * n(k)) * nn;
      }
      if (order >= 4) {
        const double il3 = 1.0 / (l * l * l);
        for (int k = 0; k < 2; ++k)
          for (int m = 0; m < 2; ++m) j.ddH[k][m] += (il3 * n(k) * n(m)) * nn;
      }
    }
  }
  return j;
}

Jet jet_from_derivatives(std::span<const double> d, int order) {
  return jet_from([&](int k) { return d[static_cast<std::size_t>(k)]; }, order);
}

Jet polynomial_jet(std::span<const double> derivs, std::span<const double> coeffs, int order) {
  const int nd = deriv_count(order);
  std::array<double, 15> acc{};
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double c = coeffs[i];
    if (c == 0.0) continue;
    for (int k = 0; k < nd; ++k) acc[static_cast<std::size_t>(k)] += c * derivs[i * static_cast<std::size_t>(nd) + static_cast<std::size_t>(k)];
  }
  return jet_from([&](int k) { return acc[static_cast<std::size_t>(k)]; }, order);
}

bool in_cone(const Mat2& H) {
  const double tr = H(0, 0) + H(1, 1);
  const double det = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  const double hi = 0.5 * tr + disc;
  const double lo = det / hi;  // product of eigenvalues over the larger one
  return std::isfinite(lo) && hi > 0 && lo > 1e-10 * hi;
}

void check_cone(const Mat2& H, Vec2 where) {
  if (!in_cone(H)) throw ConeExit("outside Kaehler cone at " + at(where), where);
}

InverseJet invert(const Jet& jet) {
  if (jet.order < 4) throw std::invalid_argument("invert: jet of order 4 required");
  InverseJet r;
  r.U = jet.H.inverse();
  for (int k = 0; k < 2; ++k) r.dU[k] = -r.U * jet.dH[k] * r.U;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      const Mat2 a = r.U * jet.dH[l] * r.U * jet.dH[k] * r.U;
      const Mat2 b = r.U * jet.dH[k] * r.U * jet.dH[l] * r.U;
      r.ddU[k][l] = a + b - r.U * jet.ddH[k][l] * r.U;
    }
  return r;
}

InverseJet invert_structured(const Polytope* p, Vec2 x, const Jet& poly, int order, Mat2* Hout) {
  // H = sum_a c_a n_a n_a^T + P with c_a = 1 / (2 l_a); m_a = n_a rotated by -90 deg
  struct F {
    Vec2d n, m;
    double l, c;
  };
  std::array<F, 32> fs;
  std::size_t nf = 0;
  if (p) {
    if (p->facet_count() > fs.size()) throw std::invalid_argument("invert_structured: too many facets");
    for (const Facet& f : p->facets()) {
      const double l = f.ell(x);
      if (!(l > 0)) throw OutsidePolytope("potential: point " + at(x) + " is not interior");
      fs[nf++] = {Vec2d(f.normal[0], f.normal[1]), Vec2d(f.normal[1], -f.normal[0]), l, 0.5 / l};
    }
  }
  const Mat2& P = poly.H;
  Mat2 adjP;
  adjP << P(1, 1), -P(0, 1), -P(1, 0), P(0, 0);
  Mat2 H = P;
  double det = P.determinant();
  Mat2 adj = adjP;
  for (std::size_t a = 0; a < nf; ++a) {
    H += fs[a].c * fs[a].n * fs[a].n.transpose();
    adj += fs[a].c * fs[a].m * fs[a].m.transpose();
    det += fs[a].c * fs[a].m.dot(P * fs[a].m);
    for (std::size_t b = a + 1; b < nf; ++b) {
      const double d = fs[a].n(0) * fs[b].n(1) - fs[a].n(1) * fs[b].n(0);
      det += fs[a].c * fs[b].c * d * d;
    }
  }
  if (Hout) *Hout = H;
  check_cone(H, x);
  InverseJet r;
  r.U = adj / det;
  if (order < 4) return r;

  // v_a = U n_a without the self term (m_a . n_a = 0)
  std::array<Vec2d, 32> v;
  for (std::size_t a = 0; a < nf; ++a) {
    Vec2d acc = adjP * fs[a].n;
    for (std::size_t b = 0; b < nf; ++b) {
      if (b != a) acc += fs[b].c * fs[b].m * fs[b].m.dot(fs[a].n);
    }
    v[a] = acc / det;
  }
  const Mat2& U = r.U;
  // S_k = U dH_k U
  std::array<Mat2, 2> S;
  for (int k = 0; k < 2; ++k) {
    S[k] = U * poly.dH[k] * U;
    for (std::size_t a = 0; a < nf; ++a) S[k] -= (0.5 * fs[a].n(k) / (fs[a].l * fs[a].l)) * v[a] * v[a].transpose();
    r.dU[k] = -S[k];
  }
  // S_l H S_k = sum_c c_c (S_l n_c)(S_k n_c)^T + S_l P S_k, with
  // S_k n_c = U dP_k v_c - 1/2 sum_a n_ak / l_a^2 v_a (v_a . n_c)
  std::array<std::array<Vec2d, 32>, 2> Sn;
  for (int k = 0; k < 2; ++k) {
    const Mat2 UdP = U * poly.dH[k];
    for (std::size_t c = 0; c < nf; ++c) {
      Vec2d acc = UdP * v[c];
      for (std::size_t a = 0; a < nf; ++a) acc -= (0.5 * fs[a].n(k) / (fs[a].l * fs[a].l) * v[a].dot(fs[c].n)) * v[a];
      Sn[k][c] = acc;
    }
  }
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      Mat2 lhk = S[l] * P * S[k];
      Mat2 khl = S[k] * P * S[l];
      for (std::size_t c = 0; c < nf; ++c) {
        lhk += fs[c].c * Sn[l][c] * Sn[k][c].transpose();
        khl += fs[c].c * Sn[k][c] * Sn[l][c].transpose();
      }
      Mat2 uddu = U * poly.ddH[k][l] * U;
      for (std::size_t a = 0; a < nf; ++a) {
        const double l3 = fs[a].l * fs[a].l * fs[a].l;
        uddu += (fs[a].n(k) * fs[a].n(l) / l3) * v[a] * v[a].transpose();
      }
      r.ddU[k][l] = lhk + khl - uddu;
    }
  return r;
}

SymplecticPotential::SymplecticPotential(Polytope p, std::shared_ptr<const PolyBasis> basis, Eigen::VectorXd coeffs,
                                         bool canonical)
    : polytope_(std::move(p)), basis_(std::move(basis)), coeffs_(std::move(coeffs)), canonical_(canonical) {
  if (coeffs_.size() > 0 && (!basis_ || static_cast<std::size_t>(coeffs_.size()) != basis_->size())) {
    throw std::invalid_argument("SymplecticPotential: coefficient count does not match the basis");
  }
}

SymplecticPotential::SymplecticPotential(Polytope p) : polytope_(std::move(p)) {}

bool SymplecticPotential::h_orthogonal() const {
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(3, coeffs_.size()); ++i)
    if (std::abs(coeffs_(i)) > 1e-12) return false;
  return true;
}

SymplecticPotential SymplecticPotential::with_coefficients(Eigen::VectorXd coeffs) const {
  return SymplecticPotential(polytope_, basis_, std::move(coeffs), canonical_);
}

Jet SymplecticPotential::jet(Vec2 x, int order) const {
  Jet j;
  j.order = order;
  if (canonical_) {
    j = eval_canonical(polytope_, x, order);
  } else if (!polytope_.contains_interior(x)) {
    throw OutsidePolytope("potential: point " + at(x) + " is not interior");
  }
  if (coeffs_.size() > 0) {
    std::vector<double> buf(basis_->size() * static_cast<std::size_t>(deriv_count(order)));
    basis_->evaluate(x, order, buf);
    j += polynomial_jet(buf, std::span<const double>(coeffs_.data(), static_cast<std::size_t>(coeffs_.size())), order);
  }
  return j;
}

namespace {

// polynomial part of u at x (zero jet when u has no correction)
Jet poly_jet(const SymplecticPotential& u, Vec2 x, int order) {
  Jet j;
  j.order = order;
  if (u.coefficients().size() > 0) {
    std::vector<double> buf(u.basis()->size() * static_cast<std::size_t>(deriv_count(order)));
    u.basis()->evaluate(x, order, buf);
    j = polynomial_jet(buf, std::span<const double>(u.coefficients().data(), static_cast<std::size_t>(u.coefficients().size())), order);
  }
  if (!u.canonical() && !u.polytope().contains_interior(x)) {
    throw OutsidePolytope("potential: point " + at(x) + " is not interior");
  }
  return j;
}

InverseJet inverse_at(const SymplecticPotential& u, Vec2 x) {
  return invert_structured(u.canonical() ? &u.polytope() : nullptr, x, poly_jet(u, x, 4), 4);
}

}  // namespace

double scalar_curvature(const SymplecticPotential& u, Vec2 x) { return -trace_div2(inverse_at(u, x).ddU); }

double linearized_scalar(const SymplecticPotential& u, const Eigen::VectorXd& psi, Vec2 x) {
  const InverseJet inv = inverse_at(u, x);
  const PolyBasis& b = *u.basis();
  std::vector<double> buf(b.size() * 15);
  b.evaluate(x, 4, buf);
  const Jet p = polynomial_jet(buf, std::span<const double>(psi.data(), static_cast<std::size_t>(psi.size())), 4);
  // d_i d_j (U P U), all nine product-rule terms
  const Mat2& U = inv.U;
  double s = 0;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) {
      const Mat2 m = inv.ddU[i][k] * p.H * U + U * p.H * inv.ddU[i][k] + U * p.ddH[i][k] * U +
                     inv.dU[i] * p.dH[k] * U + inv.dU[k] * p.dH[i] * U + inv.dU[i] * p.H * inv.dU[k] +
                     inv.dU[k] * p.H * inv.dU[i] + U * p.dH[i] * inv.dU[k] + U * p.dH[k] * inv.dU[i];
      s += m(i, k);
    }
  return s;
}

double laplacian(const SymplecticPotential& u, const Eigen::VectorXd& f, Vec2 x) {
  const InverseJet inv = inverse_at(u, x);
  const PolyBasis& b = *u.basis();
  std::vector<double> buf(b.size() * 6);
  b.evaluate(x, 2, buf);
  const Jet g = polynomial_jet(buf, std::span<const double>(f.data(), static_cast<std::size_t>(f.size())), 2);
  double s = 0;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) s += inv.dU[i](i, k) * g.grad(k) + inv.U(i, k) * g.H(i, k);
  return s;
}

double laplacian_affine(const SymplecticPotential& u, Vec2 g, Vec2 x) {
  const InverseJet inv = inverse_at(u, x);
  double s = 0;
  for (int i = 0; i < 2; ++i) s += inv.dU[i](i, 0) * g.x + inv.dU[i](i, 1) * g.y;
  return s;
}

MetricFields metric_fields(const SymplecticPotential& u, const Quadrature& q, const NodeTable* table,
                           bool with_curvature) {
  const int order = with_curvature ? 4 : 2;
  const std::size_t m = q.size();
  const bool has_phi = u.coefficients().size() > 0;
  if (has_phi && (!table || table->max_order < order || static_cast<std::size_t>(table->nodes()) != m)) {
    throw std::invalid_argument("metric_fields: node table missing or too shallow");
  }
  std::vector<Eigen::VectorXd> phi;
  if (has_phi) {
    for (int k = 0; k < deriv_count(order); ++k) phi.push_back((*table)(k) * u.coefficients());
  }
  MetricFields f;
  f.H.resize(m);
  f.U.resize(m);
  if (with_curvature) {
    f.s.resize(m);
    f.divU.resize(m);
  }
  const Polytope* poly = u.canonical() ? &u.polytope() : nullptr;
  auto node = [&](std::size_t k) {
    const Vec2 x{q.x[k], q.y[k]};
    Jet j;
    j.order = order;
    if (has_phi) {
      const auto kk = static_cast<Eigen::Index>(k);
      j = jet_from([&](int d) { return phi[static_cast<std::size_t>(d)](kk); }, order);
    }
    const InverseJet inv = invert_structured(poly, x, j, order, &f.H[k]);
    f.U[k] = inv.U;
    if (with_curvature) {
      f.s[k] = -trace_div2(inv.ddU);
      f.divU[k] = Vec2d(inv.dU[0](0, 0) + inv.dU[1](1, 0), inv.dU[0](0, 1) + inv.dU[1](1, 1));
    }
  };
  // failures are replayed serially so the reported node does not depend on
  // the thread count
  std::vector<char> failed(m, 0);
  parallel_for(m, [&](std::size_t k) {
    try {
      node(k);
    } catch (const ConeExit&) {
      failed[k] = 1;
    }
  });
  for (std::size_t k = 0; k < m; ++k) {
    if (failed[k]) node(k);
  }
  return f;
}

Eigen::MatrixXd weighted_cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::span<const double> w) {
  const auto n = a.cols();
  const auto m = b.cols();
  const auto rows = static_cast<std::size_t>(a.rows());
  Eigen::MatrixXd out(n, m);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const std::span<const double> ai(a.col(static_cast<Eigen::Index>(i)).data(), rows);
    for (Eigen::Index j = 0; j < m; ++j) {
      out(static_cast<Eigen::Index>(i), j) = simd::weighted_dot(ai, std::span<const double>(b.col(j).data(), rows), w);
    }
  });
  return out;
}

Eigen::MatrixXd assemble(const MetricFields& mf, const Quadrature& q, const PolyBasis& basis, const NodeTable& t,
                         OperatorKind kind) {
  const auto m = static_cast<Eigen::Index>(q.size());
  if (t.nodes() != m || static_cast<Eigen::Index>(mf.U.size()) != m) {
    throw std::invalid_argument("assemble: node count mismatch");
  }
  if (t.max_order < (kind == OperatorKind::linearized_scalar ? 2 : 1)) {
    throw std::invalid_argument("assemble: node table too shallow");
  }
  std::vector<double> w(static_cast<std::size_t>(m));
  double vol = 0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    w[kk] = q.w[kk] * basis.weight()({q.x[kk], q.y[kk]});
    vol += w[kk];
  }
  for (double& x : w) x /= vol;
  const auto n = t(0).cols();

  if (kind == OperatorKind::linearized_scalar) {
    // K_j = U Hp_j U, contracted with Hp_i (off-diagonal counted twice)
    Eigen::MatrixXd Kxx(m, n), Kxy(m, n), Kyy(m, n), Hxy2(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < m; ++k) {
        Mat2 P;
        P << t(3)(k, j), t(4)(k, j), t(4)(k, j), t(5)(k, j);
        const Mat2& U = mf.U[static_cast<std::size_t>(k)];
        const Mat2 K = U * P * U;
        Kxx(k, j) = K(0, 0);
        Kxy(k, j) = K(0, 1);
        Kyy(k, j) = K(1, 1);
        Hxy2(k, j) = 2.0 * t(4)(k, j);
      }
    }
    Eigen::MatrixXd A = weighted_cross(t(3), Kxx, w);
    A += weighted_cross(Hxy2, Kxy, w);
    A += weighted_cross(t(5), Kyy, w);
    return A;
  }

  // grad p_i . U grad p_j
  Eigen::MatrixXd Gx(m, n), Gy(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < m; ++k) {
      const Mat2& U = mf.U[static_cast<std::size_t>(k)];
      Gx(k, j) = U(0, 0) * t(1)(k, j) + U(0, 1) * t(2)(k, j);
      Gy(k, j) = U(1, 0) * t(1)(k, j) + U(1, 1) * t(2)(k, j);
    }
  }
  Eigen::MatrixXd D = weighted_cross(t(1), Gx, w);
  D += weighted_cross(t(2), Gy, w);
  if (kind == OperatorKind::laplacian) return -D;
  Eigen::MatrixXd A = weighted_cross(t(0), t(0), w);
  A -= 0.5 * D;
  return A;
}

Eigen::MatrixXd assemble(const SymplecticPotential& u, const PolyBasis& basis, const Quadrature& q, OperatorKind kind) {
  const NodeTable t = basis.tabulate(q, 2);
  std::unique_ptr<NodeTable> own;
  const NodeTable* ut = nullptr;
  if (u.coefficients().size() > 0) {
    if (u.basis().get() == &basis) {
      ut = &t;
    } else {
      own = std::make_unique<NodeTable>(u.basis()->tabulate(q, 2));
      ut = own.get();
    }
  }
  const MetricFields mf = metric_fields(u, q, ut, false);
  return assemble(mf, q, basis, t, kind);
}

}  // namespace toric
