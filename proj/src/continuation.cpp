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

#include "toric/continuation.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <sstream>

namespace toric {

namespace {

// Everything a solve needs on one P_t. Sums are V-normalized.
struct Discretization {
  Polytope p;
  Quadrature q;
  NodeTable table;
  double volume = 0.0;
  Eigen::VectorXd w;           // q.w / V
  Eigen::VectorXd boundary;    // 2 oint p_i dsigma / V
  Eigen::MatrixXd theta_test;  // int theta_k p_i / V
};

Discretization discretize(const ProjectedProblem& pr, const Polytope& pt, const PolyBasis& basis, Quadrature q,
                          int order) {
  Discretization d;
  d.p = pt;
  d.q = std::move(q);
  d.table = basis.tabulate(d.q, order);
  const auto m = static_cast<Eigen::Index>(d.q.size());
  d.w = Eigen::Map<const Eigen::VectorXd>(d.q.w.data(), m);
  d.volume = d.w.sum();
  d.w /= d.volume;

  std::vector<double> bx, by, bw;
  for (const auto& f : d.q.boundary) {
    bx.insert(bx.end(), f.x.begin(), f.x.end());
    by.insert(by.end(), f.y.begin(), f.y.end());
    bw.insert(bw.end(), f.w.begin(), f.w.end());
  }
  const NodeTable bt = basis.tabulate(bx, by, 0);
  d.boundary = (2.0 / d.volume) * (bt(0).transpose() * Eigen::Map<const Eigen::VectorXd>(bw.data(), static_cast<Eigen::Index>(bw.size())));

  Eigen::MatrixXd th(m, 3);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Vec2 x{d.q.x[static_cast<std::size_t>(k)], d.q.y[static_cast<std::size_t>(k)]};
    for (int j = 0; j < 3; ++j) th(k, j) = d.w(k) * pr.theta().theta[static_cast<std::size_t>(j)](x);
  }
  d.theta_test = d.table(0).transpose() * th;
  return d;
}

// int U : Hess p_i / V for every basis element
Eigen::VectorXd stiffness_term(const Discretization& d, const MetricFields& mf) {
  const auto m = static_cast<Eigen::Index>(d.q.size());
  Eigen::VectorXd a(m), b(m), c(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Mat2& U = mf.U[static_cast<std::size_t>(k)];
    a(k) = d.w(k) * U(0, 0);
    b(k) = d.w(k) * 2.0 * U(0, 1);
    c(k) = d.w(k) * U(1, 1);
  }
  return d.table(3).transpose() * a + d.table(4).transpose() * b + d.table(5).transpose() * c;
}

double sup(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

struct Eval {
  MetricFields mf;
  Eigen::VectorXd r;
};

Eval evaluate(const std::shared_ptr<const PolyBasis>& basis, const Discretization& d, const Eigen::VectorXd& phi,
              const Eigen::Vector3d& c) {
  const SymplecticPotential u(d.p, basis, phi);
  Eval e{metric_fields(u, d.q, &d.table, false), {}};
  e.r = d.boundary - stiffness_term(d, e.mf) - d.theta_test * c;
  return e;
}

}  // namespace

ProjectedProblem::ProjectedProblem(ClassDeformation deformation, SolverOptions options)
    : deformation_(std::move(deformation)), options_(options) {
  if (options_.degree < 2) throw std::invalid_argument("ProjectedProblem: basis degree must be at least 2");
  theta_ = orthonormal_affine_basis(base(), build_quadrature(base(), options_.quadrature));
}

std::shared_ptr<const PolyBasis> ProjectedProblem::basis_for(const Polytope& pt) const {
  return std::make_shared<const PolyBasis>(
      PolyBasis::build(pt, build_quadrature(pt, options_.quadrature), options_.degree));
}

Eigen::VectorXd transfer(const PolyBasis& from, const Eigen::VectorXd& c, const PolyBasis& to, const Quadrature& q) {
  const NodeTable a = from.tabulate(q, 0);
  const NodeTable b = to.tabulate(q, 0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(q.size()));
  for (std::size_t k = 0; k < q.size(); ++k) w(static_cast<Eigen::Index>(k)) = q.w[k] * to.weight()({q.x[k], q.y[k]});
  const Eigen::VectorXd wf = w.cwiseProduct(a(0) * c);
  return b(0).transpose() * wf / w.sum();
}

ProjectedSolveState solve_projected(const ProjectedProblem& pr, double t, const ProjectedSolveState* init) {
  const SolverOptions& opt = pr.options();
  ProjectedSolveState st;
  st.t = t;
  st.polytope = deform(pr.deformation(), t);
  Quadrature q = build_quadrature(st.polytope, opt.quadrature);
  st.basis = std::make_shared<const PolyBasis>(PolyBasis::build(st.polytope, q, opt.degree));
  const auto n = static_cast<Eigen::Index>(st.basis->size());
  st.phi = Eigen::VectorXd::Zero(n);
  if (init && init->converged && init->basis) {
    st.phi = transfer(*init->basis, init->phi, *st.basis, q);
    st.phi.head(3).setZero();
    st.warm_start = "t=" + fmt(init->t);
  }
  const Discretization d = discretize(pr, st.polytope, *st.basis, std::move(q), 2);
  // the affine rows do not see phi, so Xi is fixed by the class
  Eigen::Vector3d c = d.theta_test.topRows(3).fullPivLu().solve(d.boundary.head(3));

  Eval cur;
  try {
    cur = evaluate(st.basis, d, st.phi, c);
  } catch (const ConeExit& e) {
    st.failure = std::string("initial potential outside the cone: ") + e.what();
    st.failure_point = e.where();
    return st;
  }
  double res = sup(cur.r);
  const Eigen::Index nphi = n - 3;
  for (int it = 0; it < opt.max_iter; ++it) {
    Eigen::MatrixXd J(n, n);
    const Eigen::MatrixXd A = assemble(cur.mf, d.q, *st.basis, d.table, OperatorKind::linearized_scalar);
    J.leftCols(nphi) = A.rightCols(nphi);
    J.rightCols(3) = -d.theta_test;
    const Eigen::VectorXd dz = J.partialPivLu().solve(-cur.r);

    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, alpha *= 0.5) {
      Eigen::VectorXd phi = st.phi;
      phi.tail(nphi) += alpha * dz.head(nphi);
      const Eigen::Vector3d ct = c + alpha * dz.tail(3);
      try {
        Eval trial = evaluate(st.basis, d, phi, ct);
        const double tr = sup(trial.r);
        if (!(tr < res || tr <= opt.tol)) continue;
        st.phi = std::move(phi);
        c = ct;
        cur = std::move(trial);
        res = tr;
        accepted = true;
        break;
      } catch (const ConeExit& e) {
        st.failure_point = e.where();
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
  st.xi = {c(0), c(1), c(2)};
  if (!st.converged && st.failure.empty()) {
    st.failure = "no convergence after " + std::to_string(opt.max_iter) + " iterations (residual " + fmt(res) +
                 ", step " + fmt(st.step) + ")";
  }
  return st;
}

SymplecticPotential potential_of(const ProjectedSolveState& st) {
  return SymplecticPotential(st.polytope, st.basis, st.phi);
}

Affine theta_field(const ProjectedProblem& pr, const ProjectedSolveState& st) {
  const auto& th = pr.theta().theta;
  const Affine k = th[1] * st.xi[1] + th[2] * st.xi[2];
  return {k.c - k(st.polytope.centroid()), k.g};
}

Eigen::Matrix2d centered_gram(const ProjectedProblem& pr, const Polytope& pt) {
  const Quadrature q = build_quadrature(pt, 1, 4);
  const Vec2 m = pt.centroid();
  Eigen::Matrix2d C = Eigen::Matrix2d::Zero();
  for (std::size_t k = 0; k < q.size(); ++k) {
    const Vec2d d(q.x[k] - m.x, q.y[k] - m.y);
    C += q.w[k] * d * d.transpose();
  }
  Eigen::Matrix2d G;
  for (int j = 0; j < 2; ++j) G.col(j) = Vec2d(pr.theta().theta[static_cast<std::size_t>(j + 1)].g.x,
                                               pr.theta().theta[static_cast<std::size_t>(j + 1)].g.y);
  return G.transpose() * C * G;
}

PhiValue phi_value(const ProjectedProblem& pr, const ProjectedSolveState& st) {
  if (!st.converged) throw std::invalid_argument("phi_value: state did not converge");
  PhiValue v;
  const Affine theta = theta_field(pr, st);
  const auto& th = pr.theta().theta;
  const Affine full = th[0] * st.xi[0] + th[1] * st.xi[1] + th[2] * st.xi[2];
  v.c0_centered = full(st.polytope.centroid());

  const Eigen::Vector2d c(st.xi[1], st.xi[2]);
  v.gram = centered_gram(pr, st.polytope);
  v.quadratic = c.dot(v.gram * c);

  const Moments mo = moments(st.polytope);
  v.weak = 2.0 * (dot(theta.g, mo.boundary_first) + theta.c * mo.sigma);

  const Quadrature q = build_quadrature(st.polytope, pr.options().quadrature);
  const NodeTable table = st.basis->tabulate(q, 4);
  const MetricFields mf = metric_fields(potential_of(st), q, &table, true);
  const Affine killing = th[1] * st.xi[1] + th[2] * st.xi[2];
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double th_k = theta({q.x[k], q.y[k]});
    v.sup_killing = std::max(v.sup_killing, std::abs(killing({q.x[k], q.y[k]})));
    v.integral += q.w[k] * th_k * (mf.s[k] - v.c0_centered);
    v.sup_theta = std::max(v.sup_theta, std::abs(th_k));
    v.sup_s_minus_c0 = std::max(v.sup_s_minus_c0, std::abs(mf.s[k] - v.c0_centered));
  }
  return v;
}

bool detect_csc(const ProjectedSolveState& st, double tol) { return st.killing_norm() <= tol; }

std::vector<double> PhiScan::t() const {
  std::vector<double> out;
  for (const auto& s : samples) out.push_back(s.state.t);
  return out;
}

PhiScan scan(const ProjectedProblem& pr, std::span<const double> t_list, const ScanOptions& options) {
  for (std::size_t i = 1; i < t_list.size(); ++i) {
    if (!(t_list[i] > t_list[i - 1])) throw std::invalid_argument("scan: t grid must be strictly increasing");
  }
  PhiScan out;
  const ProjectedSolveState* prev = nullptr;
  for (double t : t_list) {
    try {
      ProjectedSolveState st = solve_projected(pr, t, prev);
      if (!st.converged) {
        out.warnings.push_back("t = " + fmt(t) + " dropped: " + st.failure);
        continue;
      }
      PhiValue v = phi_value(pr, st);
      out.samples.push_back({std::move(st), v});
      prev = &out.samples.back().state;
    } catch (const CombinatoricsError& e) {
      out.warnings.push_back("t = " + fmt(t) + " dropped: " + e.what());
    }
  }
  fit_scan(out, options);
  return out;
}

namespace {

// least-squares coefficients (unscaled) of a degree-d polynomial in t
std::vector<double> polyfit(const std::vector<double>& t, const std::vector<double>& y, int d, double* residual) {
  const auto n = static_cast<Eigen::Index>(t.size());
  double tmax = 0;
  for (double x : t) tmax = std::max(tmax, std::abs(x));
  if (tmax == 0) tmax = 1;
  Eigen::MatrixXd V(n, d + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j <= d; ++j) V(i, j) = std::pow(t[static_cast<std::size_t>(i)] / tmax, j);
  }
  const Eigen::VectorXd yy = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  const Eigen::VectorXd a = V.colPivHouseholderQr().solve(yy);
  if (residual) *residual = sup(V * a - yy);
  std::vector<double> out;
  for (int j = 0; j <= d; ++j) out.push_back(a(j) / std::pow(tmax, j));
  return out;
}

std::vector<double> multiply(const std::vector<double>& a, const std::vector<double>& b, std::size_t keep) {
  std::vector<double> out(keep, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size() && i + j < keep; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

double horner(const std::vector<double>& a, double t) {
  double v = 0;
  for (std::size_t j = a.size(); j-- > 0;) v = v * t + a[j];
  return v;
}

}  // namespace

void fit_scan(PhiScan& s, const ScanOptions& options) {
  s.window = options.window;
  s.fit.clear();
  s.fit_direct.clear();
  s.fit_residual = s.fit_direct_residual = 0;
  s.fit_degree = options.fit_degree;
  const int deg = options.fit_degree;
  if (static_cast<int>(s.samples.size()) > deg) {
    std::vector<double> t, phi, c1, c2, m11, m12, m22;
    for (const auto& x : s.samples) {
      t.push_back(x.state.t);
      phi.push_back(x.phi.quadratic);
      c1.push_back(x.state.xi[1]);
      c2.push_back(x.state.xi[2]);
      m11.push_back(x.phi.gram(0, 0));
      m12.push_back(x.phi.gram(0, 1));
      m22.push_back(x.phi.gram(1, 1));
    }
    s.fit_direct = polyfit(t, phi, deg, &s.fit_direct_residual);
    const auto keep = static_cast<std::size_t>(deg + 1);
    const auto p1 = polyfit(t, c1, deg, nullptr), p2 = polyfit(t, c2, deg, nullptr);
    const auto q11 = polyfit(t, m11, deg, nullptr), q12 = polyfit(t, m12, deg, nullptr),
               q22 = polyfit(t, m22, deg, nullptr);
    s.fit.assign(keep, 0.0);
    const auto a = multiply(multiply(p1, p1, keep), q11, keep);
    const auto b = multiply(multiply(p1, p2, keep), q12, keep);
    const auto c = multiply(multiply(p2, p2, keep), q22, keep);
    for (std::size_t j = 0; j < keep; ++j) s.fit[j] = a[j] + 2 * b[j] + c[j];
    // residual of the untruncated product, so it measures the fits and not the truncation
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Eigen::Vector2d cv(horner(p1, t[i]), horner(p2, t[i]));
      Eigen::Matrix2d m;
      m << horner(q11, t[i]), horner(q12, t[i]), horner(q12, t[i]), horner(q22, t[i]);
      s.fit_residual = std::max(s.fit_residual, std::abs(cv.dot(m * cv) - phi[i]));
    }
  }

  std::vector<double> lx, ly;
  for (const auto& x : s.samples) {
    const double t = x.state.t;
    if (t >= options.window[0] * (1 - 1e-12) && t <= options.window[1] * (1 + 1e-12) &&
        x.phi.quadratic > options.phi_floor) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(x.phi.quadratic));
    }
  }
  s.slope_points = static_cast<int>(lx.size());
  s.slope = s.slope_stderr = 0;
  s.slope_ci = {0, 0};
  if (lx.size() < 2) return;
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / n, my += ly[i] / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  s.slope = sxy / sxx;
  if (lx.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double r = ly[i] - my - s.slope * (lx[i] - mx);
      rss += r * r;
    }
    s.slope_stderr = std::sqrt(rss / (n - 2) / sxx);
    const boost::math::students_t dist(n - 2);
    const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
    s.slope_ci = {s.slope - q * s.slope_stderr, s.slope + q * s.slope_stderr};
  } else {
    s.slope_ci = {s.slope, s.slope};
  }
}

namespace {

const PhiSample* sample_at(const PhiScan& s, double t) {
  for (const auto& x : s.samples) {
    if (std::abs(x.state.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return &x;
  }
  return nullptr;
}

// one-sided 4-point stencils at 0, h, 2h, 3h
double d1(const std::array<double, 4>& f, double h) { return (-11 * f[0] + 18 * f[1] - 9 * f[2] + 2 * f[3]) / (6 * h); }
double d2(const std::array<double, 4>& f, double h) { return (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / (h * h); }

}  // namespace

ExpansionReport expansion_identities(const PhiScan& s, double volume, double tol) {
  ExpansionReport r;
  double h = 0;
  for (const auto& x : s.samples) {
    if (x.state.t > 0) {
      h = x.state.t;
      break;
    }
  }
  r.h = h;
  std::array<const PhiSample*, 4> p{};
  std::array<const PhiSample*, 4> p2{};
  bool coarse = h > 0;
  for (int i = 0; i < 4; ++i) {
    p[static_cast<std::size_t>(i)] = h > 0 ? sample_at(s, i * h) : nullptr;
    p2[static_cast<std::size_t>(i)] = h > 0 ? sample_at(s, 2 * i * h) : nullptr;
    if (!p[static_cast<std::size_t>(i)]) r.grid_ok = false;
    if (!p2[static_cast<std::size_t>(i)]) coarse = false;
  }
  r.grid_ok = h > 0 && std::all_of(p.begin(), p.end(), [](auto* x) { return x != nullptr; });
  if (!r.grid_ok) {
    r.problem = "grid lacks the points 0, h, 2h, 3h with h = smallest positive t";
    return r;
  }
  r.stencil_condition = 12.0 / (h * h);
  auto values = [](const std::array<const PhiSample*, 4>& q, auto get) {
    std::array<double, 4> f{};
    for (std::size_t i = 0; i < 4; ++i) f[i] = get(*q[i]);
    return f;
  };
  const auto phi = values(p, [](const PhiSample& x) { return x.phi.quadratic; });
  r.phi0 = phi[0];
  r.dphi0 = d1(phi, h);
  r.ddphi0 = d2(phi, h);
  double trunc1 = 0;
  if (coarse) {
    const auto phi2 = values(p2, [](const PhiSample& x) { return x.phi.quadratic; });
    const double c2 = d2(phi2, 2 * h);
    r.truncation = std::abs(r.ddphi0 - c2) / 3.0;
    r.ddphi0 = (4 * r.ddphi0 - c2) / 3.0;
    const double c1 = d1(phi2, 2 * h);
    trunc1 = std::abs(r.dphi0 - c1) / 7.0;
    r.dphi0 = (8 * r.dphi0 - c1) / 7.0;
  }
  for (std::size_t k = 0; k < 3; ++k) {
    const auto c = values(p, [k](const PhiSample& x) { return x.state.xi[k]; });
    r.xi_prime[k] = d1(c, h);
    if (coarse) {
      const auto cc = values(p2, [k](const PhiSample& x) { return x.state.xi[k]; });
      r.xi_prime[k] = (8 * r.xi_prime[k] - d1(cc, 2 * h)) / 7.0;
    }
  }
  r.xi_prime_killing = std::hypot(r.xi_prime[1], r.xi_prime[2]);
  r.ddphi0_predicted = 2 * volume * (r.xi_prime[1] * r.xi_prime[1] + r.xi_prime[2] * r.xi_prime[2]);

  r.phi0_ok = std::abs(r.phi0) <= tol;
  r.dphi0_ok = std::abs(r.dphi0) <= tol + trunc1;
  r.second_ok = std::abs(r.ddphi0 - r.ddphi0_predicted) <= std::max(tol, 1e-6 * std::abs(r.ddphi0_predicted)) + r.truncation;
  const ProjectedSolveState& s0 = p[0]->state;
  r.ke_start = s0.polytope.facet_count() > 0 && is_anticanonical(s0.polytope) && s0.killing_norm() <= 1e-8;
  if (r.ke_start) {
    r.xi_prime_ok = r.xi_prime_killing < 1e-6;
    r.order_ok = s.slope_points >= 2 && s.slope >= 4.0 - 0.3;
  }
  r.passed = r.phi0_ok && r.dphi0_ok && r.second_ok && r.xi_prime_ok && r.order_ok;
  return r;
}

AlmostCscBound almost_csc_bound(const PhiScan& s, int m, double coefficient_tol) {
  AlmostCscBound b;
  b.m = m;
  b.required = (m + 1) / 2.0 - 0.3;
  if (static_cast<int>(s.fit.size()) <= m) {
    b.problem = "fit has fewer than m coefficients";
    return b;
  }
  if (s.fit_residual > coefficient_tol) {
    b.problem = "fit does not reproduce the Phi samples (residual " + fmt(s.fit_residual) + ")";
    return b;
  }
  for (int j = 1; j <= m; ++j) {
    if (std::abs(s.fit[static_cast<std::size_t>(j)]) >= coefficient_tol) {
      b.problem = "fitted a_" + std::to_string(j) + " = " + fmt(s.fit[static_cast<std::size_t>(j)]) +
                  " is not below " + fmt(coefficient_tol);
      return b;
    }
  }
  b.applicable = true;
  std::vector<double> lx, ly;
  bool all_small = true;
  for (const auto& x : s.samples) {
    const double t = x.state.t;
    if (t < s.window[0] * (1 - 1e-12) || t > s.window[1] * (1 + 1e-12)) continue;
    const double v = x.phi.sup_killing;
    b.sup_norms.push_back(v);
    if (v >= 1e-8) all_small = false;
    if (v > 0) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(v));
    }
  }
  if (all_small) {
    b.vacuous = true;
    b.passed = true;
    return b;
  }
  if (lx.size() < 2) {
    b.problem = "fewer than two samples in the fit window";
    return b;
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / n, my += ly[i] / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  b.exponent = sxy / sxx;
  b.constant = std::exp(my - b.exponent * mx);
  b.passed = b.exponent >= b.required;
  return b;
}

std::vector<double> principal_angles(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() == 0 || b.cols() == 0) return {};
  auto orth = [](const Eigen::MatrixXd& x) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), x.cols()));
  };
  const Eigen::MatrixXd m = orth(a).transpose() * orth(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    out.push_back(std::acos(std::clamp(svd.singularValues()(i), 0.0, 1.0)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

KernelReport verify_nondegeneracy(const SymplecticPotential& u, const PolyBasis& basis, const Quadrature& q,
                                  double rel_tol) {
  const Eigen::MatrixXd A = assemble(u, basis, q, OperatorKind::linearized_scalar);
  const auto n = A.rows();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  KernelReport r;
  const Eigen::VectorXd& sv = svd.singularValues();
  r.operator_norm = sv(0);
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    r.singular_values.push_back(sv(i));
    if (sv(i) < rel_tol * sv(0)) ++r.dimension;
  }
  const Eigen::MatrixXd kernel = svd.matrixV().rightCols(r.dimension);
  const Eigen::MatrixXd affine = Eigen::MatrixXd::Identity(n, 3);
  r.angles = principal_angles(kernel, affine);
  if (n > 3) {
    Eigen::JacobiSVD<Eigen::MatrixXd> c(A.bottomRightCorner(n - 3, n - 3));
    r.complement_min_singular = c.singularValues()(c.singularValues().size() - 1);
  }
  return r;
}

}  // namespace toric
