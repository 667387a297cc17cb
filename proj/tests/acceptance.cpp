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

// Acceptance checks: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>

#include "fixtures.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "toric/io.hpp"
#include "toric/parallel.hpp"

using namespace toric;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel(double a, double b, double floor = 1e-15) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Converged projected states from criteria 3, 4 and 6, reused by criterion 5.
struct Shared {
  std::vector<std::pair<std::string, PhiValue>> phis;
  std::string csv3, csv6, csv10;
};

// --- 1 ----------------------------------------------------------------------
Outcome linearization() {
  const std::vector<Polytope> ps{fixtures::unit_simplex(), fixtures::unit_square(), fixtures::trapezoid(),
                                 fixtures::hexagon()};
  double worst = 0;
  unsigned seed = 1000;
  for (int trial = 0; trial < 20; ++trial) {
    const Polytope& p = ps[static_cast<std::size_t>(trial) % ps.size()];
    const Quadrature q = build_quadrature(p, 5);
    const auto b = std::make_shared<const PolyBasis>(PolyBasis::build(p, q, 12));
    const Eigen::VectorXd c = helpers::random_correction(*b, p, q, seed++);
    const Eigen::VectorXd psi = helpers::random_correction(*b, p, q, seed++, 1.0);
    const SymplecticPotential u(p, b, c);
    constexpr double eps = 1e-5;
    const SymplecticPotential up(p, b, c + eps * psi), um(p, b, c - eps * psi);
    double diff = 0, scale = 0;
    for (std::size_t k = static_cast<std::size_t>(trial); k < q.size(); k += 211) {
      const Vec2 x{q.x[k], q.y[k]};
      const double fd = (scalar_curvature(up, x) - scalar_curvature(um, x)) / (2 * eps);
      const double an = linearized_scalar(u, psi, x);
      diff = std::max(diff, std::abs(an - fd));
      scale = std::max(scale, std::abs(an));
    }
    worst = std::max(worst, diff / scale);
  }
  return {worst < 1e-6, "20 triples, max relative error " + g(worst)};
}

// --- 2 ----------------------------------------------------------------------
Outcome futaki_invariance() {
  const double kappa = calibrate_kappa();
  double worst_boundary = 0, worst_mutual = 0;
  unsigned seed = 2000;
  for (const Polytope& p : {fixtures::unit_simplex(), fixtures::unit_square(), fixtures::trapezoid(), fixtures::hexagon()}) {
    const Quadrature q = build_quadrature(p, 5);
    const auto b = std::make_shared<const PolyBasis>(PolyBasis::build(p, q, 6));
    const PotentialBasis th = orthonormal_affine_basis(p, q);
    for (std::size_t i = 1; i < 3; ++i) {
      const double fb = futaki_boundary(p, th.theta[i], kappa);
      const double scale = futaki_scale(p, q, th.theta[i], kappa);
      double lo = 1e300, hi = -1e300;
      for (int r = 0; r < 5; ++r) {
        const SymplecticPotential u(p, b, helpers::random_correction(*b, p, q, seed++, 0.002));
        const double fi = futaki_interior(u, q, th.theta[i]);
        lo = std::min(lo, fi);
        hi = std::max(hi, fi);
        worst_boundary = std::max(worst_boundary, std::abs(fi - fb) / scale);
      }
      worst_mutual = std::max(worst_mutual, (hi - lo) / scale);
    }
  }
  return {worst_boundary < 1e-6 && worst_mutual < 1e-6,
          "kappa " + io::exact(kappa) + ", interior vs boundary " + g(worst_boundary) + ", spread " + g(worst_mutual) +
              " (relative to the cancelling terms)"};
}

// --- 3 ----------------------------------------------------------------------
std::string product_scan_csv(Shared* shared, Outcome* out) {
  const ProjectedProblem pr(ClassDeformation::raw(fixtures::unit_square(), {0, 0, 1, 0}));
  std::vector<double> ts;
  for (int i = 1; i <= 8; ++i) ts.push_back(0.05 * i);
  const PhiScan s = scan(pr, ts, ScanOptions{4, {0.05, 0.4}, 1e-20});
  if (out) {
    double killing = 0, phi = 0, hess = 0;
    for (const PhiSample& x : s.samples) {
      killing = std::max(killing, x.state.killing_norm());
      phi = std::max(phi, std::abs(x.phi.integral));
      const SymplecticPotential u = potential_of(x.state);
      const Quadrature q = build_quadrature(x.state.polytope);
      for (std::size_t k = 0; k < q.size(); ++k) {
        const Vec2 p{q.x[k], q.y[k]};
        const Mat2 d = u.jet(p, 2).H - oracles::rectangle_hessian(0, 1 + x.state.t, 0, 1, p);
        hess = std::max(hess, d.cwiseAbs().maxCoeff());
      }
      if (shared) shared->phis.push_back({"square t=" + io::exact(x.state.t), x.phi});
    }
    const bool all = s.samples.size() == ts.size();
    *out = {all && killing < 1e-8 && phi < 1e-10 && hess < 1e-6,
            std::to_string(s.samples.size()) + "/" + std::to_string(ts.size()) + " converged, |(c1,c2)| " + g(killing) +
                ", Phi " + g(phi) + ", Hessian sup error " + g(hess)};
  }
  return io::scan_csv(s).str();
}

// --- 4 ----------------------------------------------------------------------
Outcome blowup_extremal(Shared* shared) {
  const ProjectedProblem pr(ClassDeformation::raw(fixtures::trapezoid(), {0, 0, 0, -1}));
  const ProjectedSolveState s = solve_projected(pr, 0.0);
  if (!s.converged) return {false, "no convergence: " + s.failure};
  const PhiValue v = phi_value(pr, s);
  shared->phis.push_back({"blowup t=0", v});
  const double kappa = calibrate_kappa();
  const double sb = s_bar_boundary(s.polytope, kappa);
  const double fut = futaki_boundary(s.polytope, theta_field(pr, s), kappa);
  const bool ok = s.killing_norm() > 1e-3 && !detect_csc(s) && rel(v.c0_centered, sb) < 1e-6 && v.integral > 0 &&
                  rel(fut, v.integral) < 1e-6;
  return {ok, "|(c1,c2)| " + g(s.killing_norm()) + ", c0 " + io::exact(v.c0_centered) + " vs s_bar " + io::exact(sb) +
                  ", Phi " + g(v.integral) + ", Futaki pairing rel. diff " + g(rel(fut, v.integral))};
}

// --- 6, 7 -------------------------------------------------------------------
struct HexagonRun {
  PhiScan scan;
  double volume = 0;
  std::string csv;
};

HexagonRun hexagon_scan() {
  const ClassDeformation c = ClassDeformation::reduced(fixtures::hexagon(), {0.3, -0.7, 0.2, 0.9, -0.4, 0.1}, true);
  const ProjectedProblem pr(c);
  std::vector<double> ts;
  for (int i = 0; i <= 10; ++i) ts.push_back(0.01 * i);
  HexagonRun r;
  r.scan = scan(pr, ts);
  r.volume = c.base().area();
  r.csv = io::scan_csv(r.scan).str();
  return r;
}

Outcome vanishing_order(const HexagonRun& h, Shared* shared) {
  for (const PhiSample& x : h.scan.samples) shared->phis.push_back({"hexagon t=" + io::exact(x.state.t), x.phi});
  if (h.scan.samples.size() != 11) return {false, "only " + std::to_string(h.scan.samples.size()) + "/11 samples converged"};
  const ExpansionReport e = expansion_identities(h.scan, h.volume);
  const double slope = h.scan.slope;
  const bool ok = slope >= 3.7 && slope <= 4.3 && e.xi_prime_killing < 1e-6 && e.ke_start;
  return {ok, "slope " + io::exact(slope) + " (95% CI " + g(h.scan.slope_ci[0]) + ".." + g(h.scan.slope_ci[1]) +
                  "), Xi'(0) = (" + g(e.xi_prime[0]) + ", " + g(e.xi_prime[1]) + ", " + g(e.xi_prime[2]) +
                  "), killing part " + g(e.xi_prime_killing)};
}

Outcome almost_csc(const HexagonRun& h) {
  const AlmostCscBound b = almost_csc_bound(h.scan, 3);
  std::string coeffs;
  for (int j = 1; j <= 3 && j < static_cast<int>(h.scan.fit.size()); ++j) coeffs += " " + g(h.scan.fit[static_cast<std::size_t>(j)]);
  if (!b.applicable) return {false, "not applicable: " + b.problem + "; a1..a3" + coeffs};
  return {b.exponent >= 1.7, "a1..a3" + coeffs + ", exponent " + io::exact(b.exponent)};
}

// --- 5 ----------------------------------------------------------------------
Outcome quadratic_identity(const Shared& shared) {
  double worst = 0;
  std::string where;
  for (const auto& [name, v] : shared.phis) {
    const double r = rel(v.integral, v.quadratic);
    if (r > worst) {
      worst = r;
      where = name;
    }
  }
  return {!shared.phis.empty() && worst < 1e-9,
          std::to_string(shared.phis.size()) + " converged states, max relative difference " + g(worst) +
              (where.empty() ? "" : " (" + where + ")")};
}

// --- 8 ----------------------------------------------------------------------
Outcome nondegeneracy() {
  std::string detail;
  bool ok = true;
  for (const Polytope& p : {fixtures::unit_square(), fixtures::hexagon()}) {
    const Quadrature q = build_quadrature(p, 5);
    const PolyBasis b = PolyBasis::build(p, q, 12);
    const KernelReport k = verify_nondegeneracy(SymplecticPotential(p), b, q);
    const double angle = k.angles.empty() ? 0.0 : *std::max_element(k.angles.begin(), k.angles.end());
    const double ratio = k.complement_min_singular / k.operator_norm;
    ok = ok && k.dimension == 3 && angle < 1e-4 && ratio > 1e-3;
    detail += p.name() + ": dim " + std::to_string(k.dimension) + ", angle " + g(angle) + ", sigma_min/norm " + g(ratio) + "; ";
  }
  return {ok, detail};
}

// --- 9 ----------------------------------------------------------------------
Outcome tian_zhu() {
  double sym = 0, res = 0;
  for (const Polytope& p : {fixtures::cp2(), fixtures::centered_square()}) {
    const SolitonField f = tian_zhu_field(p, build_quadrature(p, 5));
    sym = std::max(sym, std::hypot(f.b.x, f.b.y));
    res = std::max(res, f.residual);
  }
  const Polytope t = fixtures::trapezoid();
  const Quadrature q = build_quadrature(t, 5);
  const SolitonField f = tian_zhu_field(t, q);
  const double beta = oracles::bisect_diagonal();
  const double err = std::max(std::abs(f.b.x - beta), std::abs(f.b.y - beta));
  const PotentialBasis wb = orthonormal_affine_basis(t, q, f.weight());
  const double mf = std::max(std::abs(modified_futaki(t, q, f, wb.theta[1])), std::abs(modified_futaki(t, q, f, wb.theta[2])));
  return {sym < 1e-10 && res < 1e-10 && err < 1e-8 && mf < 1e-9,
          "|b| symmetric " + g(sym) + " (residual " + g(res) + "), trapezoid b " + io::exact(f.b.x) + " vs oracle " +
              io::exact(beta) + " (diff " + g(err) + "), modified Futaki " + g(mf)};
}

// --- 10, 11 -----------------------------------------------------------------
struct KrsRun {
  SolitonProblem problem;
  SolitonSolveState state;
};

KrsRun krs_state() {
  const Polytope t = fixtures::trapezoid();
  const SolverOptions o;
  const Vec2 b = tian_zhu_field(t, build_quadrature(t, o.quadrature)).b;
  KrsRun r{make_soliton_problem(t, b, o), {}};
  r.state = extremal_soliton_solve(r.problem);
  return r;
}

std::string path_csv(std::vector<SolitonPathEntry>* keep) {
  const std::vector<double> ts{0.05, 0.1, 0.2, 0.3};
  auto path = soliton_path(fixtures::trapezoid(), 3, ts);
  std::string csv = io::soliton_csv(path).str();
  if (keep) *keep = std::move(path);
  return csv;
}

Outcome krs_and_path(const KrsRun& k, Shared* shared) {
  if (!k.state.converged) return {false, "KRS solve failed: " + k.state.failure};
  const KrsReport rep = krs_certify(k.problem, k.state);
  std::vector<SolitonPathEntry> path;
  shared->csv10 = path_csv(&path);
  bool conv = true;
  double worst = 0;
  std::string mus;
  for (const auto& e : path) {
    conv = conv && e.state.converged;
    worst = std::max(worst, e.state.killing_norm());
    mus += " " + g(e.state.killing_norm());
  }
  // the same classes with the field adapted per class, for the record
  std::string adapted;
  {
    const std::vector<double> ts{0.05, 0.1, 0.2, 0.3};
    const auto ap = soliton_path(fixtures::trapezoid(), 3, ts, SolverOptions{}, PathOptions{true});
    double am = 0;
    bool ac = true;
    for (const auto& e : ap) {
      ac = ac && e.state.converged;
      am = std::max(am, e.state.killing_norm());
    }
    adapted = "; with the field adapted per class: " + std::string(ac ? "converged" : "failed") + ", max |(mu1,mu2)| " +
              g(am) + ", b1 at t=0.3 " + (ap.back().state.basis ? g(ap.back().state.field.b.x) : std::string("-"));
  }
  const bool ok = rep.krs && k.state.killing_norm() < 1e-6 && conv && worst < 1e-6;
  return {ok, "KRS |(mu1,mu2)| " + g(k.state.killing_norm()) + (rep.krs ? " certified" : " not certified") +
                  "; frozen-field path " + (conv ? "converged" : "failed") + ", |(mu1,mu2)| at t=0.05,0.1,0.2,0.3:" + mus +
                  adapted};
}

Outcome weighted_kernel(const KrsRun& k) {
  if (!k.state.converged) return {false, "KRS solve failed"};
  const SpectrumReport r = weighted_spectrum(k.state, 6);
  const double angle = r.angles.empty() ? 1.0 : *std::max_element(r.angles.begin(), r.angles.end());
  return {r.kernel_dimension == 2 && angle < 1e-3 && r.gap >= 10.0,
          "dim " + std::to_string(r.kernel_dimension) + ", angle " + g(angle) + ", gap " + g(r.gap) +
              " x kernel tolerance, symmetry error " + g(r.symmetry_error)};
}

// --- 12 ---------------------------------------------------------------------
Outcome determinism(const Shared& shared, const HexagonRun& first6) {
  set_thread_count(1);
  const std::string a = product_scan_csv(nullptr, nullptr);
  const std::string b = hexagon_scan().csv;
  const std::string c = path_csv(nullptr);
  const bool ok = a == shared.csv3 && b == first6.csv && c == shared.csv10;
  return {ok, std::string("reruns on 1 thread: criterion 3 ") + (a == shared.csv3 ? "identical" : "differs") +
                  ", criterion 6 " + (b == first6.csv ? "identical" : "differs") + ", criterion 10 " +
                  (c == shared.csv10 ? "identical" : "differs") + " (" + std::to_string(a.size() + b.size() + c.size()) +
                  " bytes)"};
}

}  // namespace

int main() {
  const int threads = static_cast<int>(std::max(2u, std::min(8u, std::thread::hardware_concurrency())));
  set_thread_count(threads);
  bool all = true;
  const auto report = [&](int id, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && o.pass;
    std::printf("criterion %2d: %s  %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), sec);
    std::fflush(stdout);
  };

  Shared shared;
  HexagonRun hex;
  std::optional<KrsRun> krs;
  report(1, linearization);
  report(2, futaki_invariance);
  report(3, [&] {
    Outcome o;
    shared.csv3 = product_scan_csv(&shared, &o);
    return o;
  });
  report(4, [&] { return blowup_extremal(&shared); });
  report(6, [&] {
    hex = hexagon_scan();
    return vanishing_order(hex, &shared);
  });
  report(7, [&] { return almost_csc(hex); });
  report(5, [&] { return quadratic_identity(shared); });
  report(8, nondegeneracy);
  report(9, tian_zhu);
  report(10, [&] {
    krs = krs_state();
    return krs_and_path(*krs, &shared);
  });
  report(11, [&] { return weighted_kernel(*krs); });
  report(12, [&] { return determinism(shared, hex); });
  std::printf("%s\n", all ? "all criteria PASS" : "some criteria FAIL");
  return all ? 0 : 1;
}
