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

#include "toric/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace toric {

namespace {

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

double sup(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Weighted discretization on one class; sums are V_w-normalized.
struct Weighted {
  Polytope p;
  Quadrature q;
  NodeTable table;
  Vec2d b;
  double volume = 0.0;
  Eigen::VectorXd w;         // q.w e^{theta_b} / V_w
  Eigen::VectorXd constant;  // 2 oint q_i e^{theta_b} dsigma / V_w - s_bar int q_i e^{theta_b} / V_w
  Eigen::MatrixXd mu_test;   // int theta_k q_i e^{theta_b} / V_w
};

Weighted discretize(const SolitonProblem& pr, const PolyBasis& basis, const PotentialBasis& theta, Quadrature q,
                    double s_bar) {
  Weighted d;
  d.p = pr.polytope;
  d.q = std::move(q);
  d.b = Vec2d(pr.field.b.x, pr.field.b.y);
  d.table = basis.tabulate(d.q, 2);
  const auto m = static_cast<Eigen::Index>(d.q.size());
  const Weight wt = pr.field.weight();
  d.w.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    d.w(k) = d.q.w[kk] * wt({d.q.x[kk], d.q.y[kk]});
  }
  d.volume = d.w.sum();
  d.w /= d.volume;

  std::vector<double> bx, by, bw;
  for (const auto& f : d.q.boundary) {
    for (std::size_t i = 0; i < f.x.size(); ++i) {
      bx.push_back(f.x[i]);
      by.push_back(f.y[i]);
      bw.push_back(f.w[i] * wt({f.x[i], f.y[i]}));
    }
  }
  const NodeTable bt = basis.tabulate(bx, by, 0);
  const Eigen::Map<const Eigen::VectorXd> bwv(bw.data(), static_cast<Eigen::Index>(bw.size()));
  d.constant = (2.0 / d.volume) * (bt(0).transpose() * bwv) - s_bar * (d.table(0).transpose() * d.w);

  Eigen::MatrixXd th(m, 3);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Vec2 x{d.q.x[static_cast<std::size_t>(k)], d.q.y[static_cast<std::size_t>(k)]};
    for (int j = 0; j < 3; ++j) th(k, j) = d.w(k) * theta.theta[static_cast<std::size_t>(j)](x);
  }
  d.mu_test = d.table(0).transpose() * th;
  return d;
}

// int e^{theta_b} (U : Hess q_i + b^T U grad q_i) / V_w
Eigen::VectorXd stiffness(const Weighted& d, const MetricFields& mf) {
  const auto m = static_cast<Eigen::Index>(d.q.size());
  Eigen::VectorXd gx(m), gy(m), a(m), c(m), e(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Mat2& U = mf.U[static_cast<std::size_t>(k)];
    const Vec2d v = U * d.b;
    gx(k) = d.w(k) * v(0);
    gy(k) = d.w(k) * v(1);
    a(k) = d.w(k) * U(0, 0);
    c(k) = d.w(k) * 2.0 * U(0, 1);
    e(k) = d.w(k) * U(1, 1);
  }
  return d.table(1).transpose() * gx + d.table(2).transpose() * gy + d.table(3).transpose() * a +
         d.table(4).transpose() * c + d.table(5).transpose() * e;
}

// d/dphi_j of the stiffness term, with the sign of the residual:
// int w [(U Hq_j U) : Hq_i + b^T U Hq_j U grad q_i]
Eigen::MatrixXd jacobian_phi(const Weighted& d, const MetricFields& mf, const PolyBasis& basis) {
  Eigen::MatrixXd J = assemble(mf, d.q, basis, d.table, OperatorKind::linearized_scalar);
  const auto m = static_cast<Eigen::Index>(d.q.size());
  const auto n = d.table(0).cols();
  Eigen::MatrixXd Gxx(m, n), Gxy(m, n), Gyy(m, n);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Mat2& U = mf.U[static_cast<std::size_t>(k)];
    const Vec2d v = U * d.b;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec2d g = U * Vec2d(d.table(1)(k, i), d.table(2)(k, i));
      Gxx(k, i) = v(0) * g(0);
      Gxy(k, i) = v(0) * g(1) + v(1) * g(0);
      Gyy(k, i) = v(1) * g(1);
    }
  }
  const std::span<const double> w(d.w.data(), static_cast<std::size_t>(m));
  J += weighted_cross(Gxx, d.table(3), w);
  J += weighted_cross(Gxy, d.table(4), w);
  J += weighted_cross(Gyy, d.table(5), w);
  return J;
}

struct Eval {
  MetricFields mf;
  Eigen::VectorXd r;
};

Eval evaluate(const std::shared_ptr<const PolyBasis>& basis, const Weighted& d, const Eigen::VectorXd& phi,
              const Eigen::Vector3d& mu) {
  const SymplecticPotential u(d.p, basis, phi);
  Eval e{metric_fields(u, d.q, &d.table, false), {}};
  e.r = d.constant - stiffness(d, e.mf) - d.mu_test * mu;
  return e;
}

}  // namespace

SolitonProblem make_soliton_problem(const Polytope& p, Vec2 b, SolverOptions options) {
  const Quadrature q = build_quadrature(p, options.quadrature);
  return {p, soliton_field_for(p, q, b), options};
}

SymplecticPotential potential_of(const SolitonSolveState& st) { return SymplecticPotential(st.polytope, st.basis, st.phi); }

SolitonSolveState extremal_soliton_solve(const SolitonProblem& pr, const SolitonSolveState* init) {
  const SolverOptions& opt = pr.options;
  SolitonSolveState st;
  st.polytope = pr.polytope;
  st.field = pr.field;
  Quadrature q = build_quadrature(pr.polytope, opt.quadrature);
  st.basis = std::make_shared<const PolyBasis>(PolyBasis::build(pr.polytope, q, opt.degree, pr.field.weight()));
  st.theta = orthonormal_affine_basis(pr.polytope, q, pr.field.weight());
  st.s_bar = s_bar_boundary(pr.polytope, 2.0);
  const auto n = static_cast<Eigen::Index>(st.basis->size());
  st.phi = Eigen::VectorXd::Zero(n);
  Eigen::Vector3d mu = Eigen::Vector3d::Zero();
  if (init && init->converged && init->basis) {
    st.phi = transfer(*init->basis, init->phi, *st.basis, q);
    st.phi.head(3).setZero();
    mu = Eigen::Vector3d(init->mu[0], init->mu[1], init->mu[2]);
    st.warm_start = "warm";
  }
  const Weighted d = discretize(pr, *st.basis, st.theta, std::move(q), st.s_bar);

  Eval cur;
  try {
    cur = evaluate(st.basis, d, st.phi, mu);
  } catch (const ConeExit& e) {
    st.failure = std::string("initial potential outside the cone: ") + e.what();
    return st;
  }
  double res = sup(cur.r);
  const Eigen::Index nphi = n - 3;
  for (int it = 0; it < opt.max_iter; ++it) {
    Eigen::MatrixXd J(n, n);
    const Eigen::MatrixXd A = jacobian_phi(d, cur.mf, *st.basis);
    J.leftCols(nphi) = A.rightCols(nphi);
    J.rightCols(3) = -d.mu_test;
    const Eigen::VectorXd dz = J.partialPivLu().solve(-cur.r);

    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, alpha *= 0.5) {
      Eigen::VectorXd phi = st.phi;
      phi.tail(nphi) += alpha * dz.head(nphi);
      const Eigen::Vector3d mt = mu + alpha * dz.tail(3);
      try {
        Eval trial = evaluate(st.basis, d, phi, mt);
        const double tr = sup(trial.r);
        if (!(tr < res || tr <= opt.tol)) continue;
        st.phi = std::move(phi);
        mu = mt;
        cur = std::move(trial);
        res = tr;
        accepted = true;
        break;
      } catch (const ConeExit&) {
      }
    }
    if (!accepted) {
      st.failure = "line search failed at iteration " + std::to_string(it + 1) + " (residual " + fmt(res) + ")";
      break;
    }
    st.iterations = it + 1;
    st.step = alpha * sup(dz);
    if (res < opt.tol && st.step < opt.step_tol) {
      st.converged = true;
      break;
    }
  }
  st.residual = res;
  st.mu = {mu(0), mu(1), mu(2)};
  if (!st.converged && st.failure.empty()) {
    st.failure = "no convergence after " + std::to_string(opt.max_iter) + " iterations (residual " + fmt(res) +
                 ", step " + fmt(st.step) + ")";
  }
  if (st.converged) {
    // the divergence term integrates to zero because U n = 0 on the boundary
    const NodeTable t4 = st.basis->tabulate(d.q, 4);
    const MetricFields mf = metric_fields(potential_of(st), d.q, &t4, true);
    double acc = 0;
    for (std::size_t k = 0; k < d.q.size(); ++k) {
      const double lap = mf.divU[k].dot(d.b);
      acc += d.q.w[k] * (mf.s[k] - st.s_bar - lap);
    }
    st.compatibility = acc;
  }
  return st;
}

KrsReport krs_certify(const SolitonProblem& pr, const SolitonSolveState& st, double tol) {
  if (!st.converged) throw std::invalid_argument("krs_certify: state did not converge");
  KrsReport r;
  r.anticanonical = is_anticanonical(pr.polytope);
  r.killing_norm = st.killing_norm();
  r.killing_small = r.killing_norm <= tol;
  r.krs = r.anticanonical && r.killing_small;
  if (r.krs) {
    r.verdict = "Kaehler-Ricci soliton (anticanonical class, extremal soliton with vanishing killing part)";
  } else if (!r.anticanonical) {
    r.verdict = "not a KRS: the class is not anticanonical";
  } else {
    r.verdict = "not a KRS: killing part of mu is " + fmt(r.killing_norm);
  }

  const Quadrature q = build_quadrature(pr.polytope, pr.options.quadrature);
  const PotentialBasis pb = orthonormal_affine_basis(pr.polytope, q);
  r.futaki_norm = std::hypot(futaki_boundary(pr.polytope, pb.theta[1], 2.0), futaki_boundary(pr.polytope, pb.theta[2], 2.0));
  r.futaki_vanishes = r.futaki_norm <= tol;
  // Delta theta_b = div(U b); evaluate pointwise
  const NodeTable t4 = st.basis->tabulate(q, 4);
  const MetricFields mc = metric_fields(potential_of(st), q, &t4, true);
  const Vec2d b(st.field.b.x, st.field.b.y);
  for (std::size_t k = 0; k < q.size(); ++k) r.theta_term_sup = std::max(r.theta_term_sup, std::abs(mc.divU[k].dot(b)));
  if (r.futaki_vanishes) r.csc_when_futaki_vanishes = r.theta_term_sup <= tol;
  return r;
}

SpectrumReport weighted_spectrum(const SymplecticPotential& u, const SolitonField& field, const PolyBasis& basis,
                                 const Quadrature& q, int count, double kernel_rel_tol) {
  if (!(basis.weight() == field.weight())) throw std::invalid_argument("weighted_spectrum: basis weight differs from the field");
  const Eigen::MatrixXd raw = assemble(u, basis, q, OperatorKind::weighted_drift);
  SpectrumReport r;
  const double scale = raw.cwiseAbs().maxCoeff();
  r.symmetry_error = (raw - raw.transpose()).cwiseAbs().maxCoeff() / scale;
  if (r.symmetry_error > 1e-8) {
    throw std::runtime_error("weighted_spectrum: assembled operator is not symmetric (" + fmt(r.symmetry_error) + ")");
  }
  const Eigen::MatrixXd A = 0.5 * (raw + raw.transpose());
  // mass matrix in the same weighted product (the identity up to rounding)
  const NodeTable t0 = basis.tabulate(q, 0);
  std::vector<double> w(q.size());
  double vol = 0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    w[k] = q.w[k] * basis.weight()({q.x[k], q.y[k]});
    vol += w[k];
  }
  for (double& x : w) x /= vol;
  Eigen::MatrixXd G = weighted_cross(t0(0), t0(0), w);
  G = 0.5 * (G + G.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, G);
  if (es.info() != Eigen::Success) throw std::runtime_error("weighted_spectrum: eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const auto n = ev.size();
  r.spectral_radius = ev.cwiseAbs().maxCoeff();
  r.kernel_tol = kernel_rel_tol * r.spectral_radius;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(ev(a)) < std::abs(ev(b)) || (std::abs(ev(a)) == std::abs(ev(b)) && ev(a) < ev(b));
  });
  const auto keep = std::min<Eigen::Index>(count, n);
  r.eigenvectors.resize(n, keep);
  for (Eigen::Index c = 0; c < keep; ++c) {
    const Eigen::Index i = order[static_cast<std::size_t>(c)];
    Eigen::VectorXd v = es.eigenvectors().col(i);
    // sign fix: first entry of noticeable size is positive
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(v(j)) > 1e-8) {
        if (v(j) < 0) v = -v;
        break;
      }
    }
    r.eigenvalues.push_back(ev(i));
    r.eigenvectors.col(c) = v;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(ev(i)) < r.kernel_tol) ++r.kernel_dimension;
  }
  std::vector<Eigen::Index> kernel;
  for (Eigen::Index c = 0; c < n && static_cast<int>(kernel.size()) < r.kernel_dimension; ++c) kernel.push_back(order[static_cast<std::size_t>(c)]);
  Eigen::MatrixXd K(n, static_cast<Eigen::Index>(kernel.size()));
  for (std::size_t c = 0; c < kernel.size(); ++c) K.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(kernel[c]);
  // weighted-centred x1, x2 are basis elements 1 and 2
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, 2);
  L(1, 0) = 1;
  L(2, 1) = 1;
  r.angles = principal_angles(K, L);
  if (r.kernel_dimension < n && r.kernel_tol > 0) {
    r.gap = std::abs(ev(order[static_cast<std::size_t>(r.kernel_dimension)])) / r.kernel_tol;
  }
  return r;
}

SpectrumReport weighted_spectrum(const SolitonSolveState& st, int count, double kernel_rel_tol) {
  const Quadrature q = build_quadrature(st.polytope, QuadratureOptions{});
  return weighted_spectrum(potential_of(st), st.field, *st.basis, q, count, kernel_rel_tol);
}

ProbeReport remark_probe(const SolitonProblem& pr, const SolitonSolveState& st, double rel_tol) {
  if (!st.converged) throw std::invalid_argument("remark_probe: state did not converge");
  const Quadrature q = build_quadrature(pr.polytope, pr.options.quadrature);
  const Weighted d = discretize(pr, *st.basis, st.theta, q, st.s_bar);
  const NodeTable& t = d.table;
  const MetricFields mf = metric_fields(potential_of(st), d.q, &t, false);
  const auto n = static_cast<Eigen::Index>(st.basis->size());
  Eigen::MatrixXd J(n, n + 3);
  J.leftCols(n) = jacobian_phi(d, mf, *st.basis);
  J.rightCols(3) = -d.mu_test;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
  ProbeReport r;
  r.unknowns = static_cast<int>(n + 3);
  const Eigen::VectorXd& sv = svd.singularValues();
  for (Eigen::Index i = 0; i < sv.size(); ++i) r.singular_values.push_back(sv(i));
  // a wide matrix has at least 3 null directions beyond the listed values
  int small = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) < rel_tol * sv(0)) ++small;
  }
  r.kernel_dimension = small + 3;
  const Eigen::MatrixXd kernel = svd.matrixV().rightCols(r.kernel_dimension);
  r.angles = principal_angles(kernel, Eigen::MatrixXd::Identity(n + 3, 3));
  const Eigen::Index last = sv.size() - 1 - small;
  if (last >= 0) r.gap = sv(last) / sv(0);
  return r;
}

FieldSearch adapt_field(const Polytope& p, Vec2 start, const SolverOptions& options, const SolitonSolveState* init,
                        double tol, int max_iter) {
  FieldSearch out;
  const auto killing = [](const SolitonSolveState& s) { return Eigen::Vector2d(s.mu[1], s.mu[2]); };
  const auto solve = [&](Vec2 b, const SolitonSolveState* warm) {
    SolitonSolveState s = extremal_soliton_solve(make_soliton_problem(p, b, options), warm);
    if (!s.converged) throw std::runtime_error("fixed-field solve failed at b = (" + fmt(b.x) + ", " + fmt(b.y) + "): " + s.failure);
    return s;
  };
  constexpr double h = 1e-5;
  Vec2 b = start;
  try {
    out.state = solve(b, init);
    for (int it = 0; it < max_iter; ++it) {
      const Eigen::Vector2d f = killing(out.state);
      if (f.norm() < tol) {
        out.converged = true;
        break;
      }
      Eigen::Matrix2d J;
      const SolitonSolveState sx = solve({b.x + h, b.y}, &out.state);
      const SolitonSolveState sy = solve({b.x, b.y + h}, &out.state);
      J.col(0) = (killing(sx) - f) / h;
      J.col(1) = (killing(sy) - f) / h;
      const Eigen::Vector2d db = J.fullPivLu().solve(-f);
      b = {b.x + db(0), b.y + db(1)};
      out.state = solve(b, &out.state);
      out.iterations = it + 1;
    }
    if (!out.converged) {
      if (killing(out.state).norm() < tol) {
        out.converged = true;
      } else {
        out.failure = "field search: no convergence after " + std::to_string(max_iter) + " iterations";
      }
    }
  } catch (const std::runtime_error& e) {
    out.failure = e.what();
  }
  return out;
}

std::vector<SolitonPathEntry> soliton_path(const Polytope& base, std::size_t exceptional_facet,
                                           std::span<const double> t_list, const SolverOptions& options,
                                           const PathOptions& path) {
  if (exceptional_facet >= base.facet_count()) throw std::invalid_argument("soliton_path: no such facet");
  const SolitonField field = tian_zhu_field(base, build_quadrature(base, options.quadrature));
  std::vector<double> delta(base.facet_count(), 0.0);
  delta[exceptional_facet] = -1.0;
  const ClassDeformation c = ClassDeformation::raw(base, delta);
  std::vector<SolitonPathEntry> out;
  const SolitonSolveState* prev = nullptr;
  for (double t : t_list) {
    SolitonPathEntry e;
    e.t = t;
    try {
      const Polytope pt = deform(c, t);
      if (path.adapt_field) {
        const Vec2 start = prev ? prev->field.b : field.b;
        FieldSearch fs = adapt_field(pt, start, options, prev);
        e.state = std::move(fs.state);
        if (!fs.converged) {
          e.state.converged = false;
          e.state.failure = fs.failure;
        }
      } else {
        e.state = extremal_soliton_solve(make_soliton_problem(pt, field.b, options), prev);
      }
    } catch (const CombinatoricsError& ex) {
      e.state.failure = ex.what();
    } catch (const std::invalid_argument& ex) {
      e.state.failure = ex.what();
    }
    out.push_back(std::move(e));
    if (out.back().state.converged) prev = &out.back().state;
  }
  return out;
}

}  // namespace toric
