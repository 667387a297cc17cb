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

// Command line front end: one subcommand per experiment, JSON config in, CSV,
// state and manifest files out.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "toric/io.hpp"
#include "toric/kernels.hpp"
#include "toric/parallel.hpp"

using namespace toric;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kNoConvergence = 3;

struct Options {
  std::string config;
  std::string out;
  int threads = 0;
  bool strict = false;
};

// Shared state of one run; every subcommand writes its manifest through it.
class Run {
 public:
  Run(std::string name, const Options& o) : name_(std::move(name)), opts_(o) { m_.subcommand = name_; }

  io::RunConfig& config() { return cfg_; }
  io::RunManifest& manifest() { return m_; }
  const Polytope& polytope() const { return p_; }
  fs::path out_dir() const { return out_; }

  void load() {
    cfg_ = io::parse_config(opts_.config, opts_.strict);
    out_ = opts_.out.empty() ? cfg_.out : fs::path(opts_.out);
    m_.config_hash = io::fnv1a_hex(cfg_.text);
    m_.warnings = cfg_.warnings;
    p_ = io::load_polytope(cfg_.polytope);
    m_.polytope_hash = io::polytope_hash(p_);
    if (cfg_.kappa) {
      m_.kappa = *cfg_.kappa;
      m_.kappa_source = "config";
    } else {
      m_.kappa = timed("calibrate_kappa", [] { return calibrate_kappa(); });
      m_.kappa_source = "calibrated";
      io::write_back_kappa(cfg_.source, m_.kappa);
      m_.warnings.push_back("kappa calibrated and written back to " + cfg_.source.string());
    }
  }

  template <class F>
  auto timed(const std::string& op, F&& f) -> decltype(f()) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = f();
    m_.timings.push_back({op, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
    return r;
  }

  void write(const std::string& file, const std::string& contents) {
    const fs::path p = out_ / file;
    io::write_atomic(p, contents);
    m_.outputs.push_back(p.string());
  }

  int finish(int code) {
    m_.exit_code = code;
    m_.threads = thread_count();
    m_.isa = std::string(simd::isa_name(simd::active_isa()));
    if (out_.empty()) out_ = opts_.out.empty() ? fs::path("out") : fs::path(opts_.out);
    io::write_atomic(out_ / (name_ + ".manifest.json"), m_.json());
    return code;
  }

 private:
  std::string name_;
  Options opts_;
  io::RunConfig cfg_;
  io::RunManifest m_;
  Polytope p_;
  fs::path out_;
};

std::string state_name(const std::string& cmd, double t) { return cmd + ".t" + io::exact(t) + ".state.json"; }

void print(const io::Csv& c) { std::cout << c.str(); }

// exit code 2 when the configuration asks for something the inputs cannot give
struct Invalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ClassDeformation deformation(Run& r) {
  const auto& c = r.config();
  if (c.delta.size() != r.polytope().facet_count()) {
    throw Invalid("deformation.delta needs " + std::to_string(r.polytope().facet_count()) + " entries");
  }
  std::vector<std::string> warnings;
  ClassDeformation d = ClassDeformation::reduced(r.polytope(), c.delta, c.trace_reduce, &warnings);
  for (auto& w : warnings) r.manifest().warnings.push_back(w);
  return d;
}

Vec2 field_b(Run& r, const Quadrature& q) {
  if (r.config().b) return *r.config().b;
  if (!is_anticanonical(r.polytope())) throw Invalid("soliton.b is required: the polytope is not anticanonical");
  const SolitonField f = r.timed("tian_zhu_field", [&] { return tian_zhu_field(r.polytope(), q); });
  if (!f.converged) throw Invalid("Tian-Zhu field did not converge");
  return f.b;
}

std::size_t exceptional_facet(Run& r) {
  if (r.config().exceptional_facet) return *r.config().exceptional_facet;
  const auto& fs = r.polytope().facets();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (fs[i].normal == std::array<int, 2>{1, 1}) return i;
  }
  throw Invalid("soliton.exceptional_facet is required: no facet with normal (1, 1)");
}

json krs_json(const KrsReport& k) {
  return {{"anticanonical", k.anticanonical}, {"killing_norm", io::exact(k.killing_norm)}, {"krs", k.krs},
          {"verdict", k.verdict},           {"futaki_norm", io::exact(k.futaki_norm)},   {"futaki_vanishes", k.futaki_vanishes},
          {"theta_term_sup", io::exact(k.theta_term_sup)},
          {"csc_when_futaki_vanishes", k.csc_when_futaki_vanishes}};
}

json probe_json(const ProbeReport& p) {
  json a = json::array();
  for (double x : p.angles) a.push_back(io::exact(x));
  return {{"unknowns", p.unknowns}, {"kernel_dimension", p.kernel_dimension}, {"angles", a}, {"gap", io::exact(p.gap)}};
}

SolitonSolveState solve_soliton(Run& r, const SolitonProblem& pr) {
  std::optional<SolitonSolveState> init;
  if (r.config().init_state) {
    init = io::soliton_state(io::load_state(*r.config().init_state), pr.options.quadrature);
  }
  return r.timed("extremal_soliton_solve", [&] { return extremal_soliton_solve(pr, init ? &*init : nullptr); });
}

// --- subcommands -----------------------------------------------------------

int cmd_validate(Run& r) {
  const Polytope& p = r.polytope();
  io::Csv c{{"vertex", "x1", "x2"}, {}};
  for (std::size_t i = 0; i < p.vertices().size(); ++i) {
    c.add({std::to_string(i), io::num(p.vertices()[i].x), io::num(p.vertices()[i].y)});
  }
  print(c);
  r.write("validate.csv", c.str());
  std::cout << "name " << p.name() << ", facets " << p.facet_count() << ", area " << io::exact(p.area())
            << ", anticanonical " << (is_anticanonical(p) ? "yes" : "no") << "\n";
  return kOk;
}

int cmd_futaki(Run& r) {
  const auto& c = r.config();
  const Quadrature q = build_quadrature(r.polytope(), c.solver_options().quadrature);
  auto basis = std::make_shared<const PolyBasis>(PolyBasis::build(r.polytope(), q, 4));
  const SymplecticPotential u(r.polytope(), basis, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->size())));
  io::Csv out{{"name", "f", "interior", "boundary", "discrepancy", "s_bar"}, {}};
  for (std::size_t i = 0; i < c.futaki_directions.size(); ++i) {
    const Vec2 g = c.futaki_directions[i];
    const FutakiReport f = futaki_report(u, q, Affine{0.0, g}, r.manifest().kappa);
    out.add({"d" + std::to_string(i), "\"" + io::exact(g.x) + " x1 + " + io::exact(g.y) + " x2\"", io::num(f.interior),
             io::num(f.boundary), io::num(f.discrepancy), io::num(f.s_bar)});
  }
  print(out);
  r.write("futaki.csv", out.str());
  return kOk;
}

int cmd_solve_extremal(Run& r) {
  const auto& c = r.config();
  const ProjectedProblem pr(deformation(r), c.solver_options());
  std::optional<ProjectedSolveState> init;
  if (c.init_state) init = io::projected_state(io::load_state(*c.init_state), pr.options().quadrature);
  ProjectedSolveState s;
  try {
    s = r.timed("solve_projected", [&] { return solve_projected(pr, c.t, init ? &*init : nullptr); });
  } catch (const CombinatoricsError& e) {
    const json d = {{"t", io::exact(c.t)}, {"error", e.what()}, {"critical_t", io::exact(e.critical_t())}};
    r.write("solve-extremal.diagnostics.json", d.dump(2) + "\n");
    std::cerr << e.what() << "\n";
    return kNoConvergence;
  }
  r.write(state_name("solve-extremal", c.t), io::state_json(io::to_state_file(s)));
  if (!s.converged) {
    const json d = {{"t", io::exact(c.t)}, {"error", s.failure}, {"residual", io::exact(s.residual)},
                    {"failure_point", {io::exact(s.failure_point.x), io::exact(s.failure_point.y)}}};
    r.write("solve-extremal.diagnostics.json", d.dump(2) + "\n");
    std::cerr << s.failure << "\n";
    return kNoConvergence;
  }
  const PhiValue v = phi_value(pr, s);
  const io::Csv csv = io::projected_csv(s, v);
  print(csv);
  r.write("solve-extremal.csv", csv.str());
  r.manifest().extra = json{{"csc", detect_csc(s)}, {"killing_norm", io::exact(s.killing_norm())},
                            {"phi_quadratic", io::exact(v.quadratic)}, {"c0_centered", io::exact(v.c0_centered)}}
                           .dump();
  return kOk;
}

int cmd_phi_scan(Run& r) {
  const auto& c = r.config();
  if (c.t_grid.empty()) throw Invalid("scan.t_grid is required");
  const ProjectedProblem pr(deformation(r), c.solver_options());
  ScanOptions so;
  so.fit_degree = c.fit_degree;
  so.window = c.window;
  const PhiScan s = r.timed("scan", [&] { return scan(pr, c.t_grid, so); });
  for (auto& w : s.warnings) r.manifest().warnings.push_back(w);
  const io::Csv csv = io::scan_csv(s);
  print(csv);
  r.write("phi-scan.csv", csv.str());

  json fit = json::array(), direct = json::array();
  for (double a : s.fit) fit.push_back(io::exact(a));
  for (double a : s.fit_direct) direct.push_back(io::exact(a));
  json summary = {{"fit_degree", s.fit_degree},
                  {"fit", fit},
                  {"fit_residual", io::exact(s.fit_residual)},
                  {"fit_direct", direct},
                  {"fit_direct_residual", io::exact(s.fit_direct_residual)},
                  {"window", {io::exact(s.window[0]), io::exact(s.window[1])}},
                  {"slope_points", s.slope_points},
                  {"slope", io::exact(s.slope)},
                  {"slope_ci", {io::exact(s.slope_ci[0]), io::exact(s.slope_ci[1])}}};
  if (s.samples.size() >= 4) {
    const ExpansionReport e = expansion_identities(s, pr.base().area());
    summary["expansion"] = {{"ke_start", e.ke_start}, {"xi_prime_ok", e.xi_prime_ok}, {"order_ok", e.order_ok}};
  }
  if (s.fit_degree >= 3) {
    const AlmostCscBound b = almost_csc_bound(s, 3);
    summary["almost_csc"] = {{"applicable", b.applicable}, {"exponent", io::exact(b.exponent)}, {"passed", b.passed}, {"problem", b.problem}};
  }
  r.write("phi-scan.fit.json", summary.dump(2) + "\n");
  return s.samples.size() == c.t_grid.size() ? kOk : kNoConvergence;
}

int cmd_soliton_field(Run& r) {
  const Quadrature q = build_quadrature(r.polytope(), r.config().solver_options().quadrature);
  if (!is_anticanonical(r.polytope())) throw Invalid("the Tian-Zhu field needs an anticanonical polytope");
  const SolitonField f = r.timed("tian_zhu_field", [&] { return tian_zhu_field(r.polytope(), q); });
  io::Csv csv{{"b1", "b2", "residual", "iterations", "hessian_min_eig"}, {}};
  csv.add({io::num(f.b.x), io::num(f.b.y), io::num(f.residual), std::to_string(f.iterations), io::num(f.hessian_min_eig)});
  print(csv);
  r.write("soliton-field.csv", csv.str());
  return f.converged ? kOk : kNoConvergence;
}

int cmd_soliton_solve(Run& r) {
  const SolverOptions o = r.config().solver_options();
  const Quadrature q = build_quadrature(r.polytope(), o.quadrature);
  const SolitonProblem pr = make_soliton_problem(r.polytope(), field_b(r, q), o);
  const SolitonSolveState s = solve_soliton(r, pr);
  r.write(state_name("soliton-solve", 0.0), io::state_json(io::to_state_file(s)));
  const io::Csv csv = io::soliton_csv({{0.0, s}});
  print(csv);
  r.write("soliton-solve.csv", csv.str());
  if (!s.converged) {
    std::cerr << s.failure << "\n";
    return kNoConvergence;
  }
  json extra = {{"krs", krs_json(krs_certify(pr, s))}, {"compatibility", io::exact(s.compatibility)}};
  if (!is_anticanonical(r.polytope())) extra["probe"] = probe_json(remark_probe(pr, s));
  r.manifest().extra = extra.dump();
  return kOk;
}

int cmd_soliton_path(Run& r) {
  const auto& c = r.config();
  if (c.path_t.empty()) throw Invalid("soliton.t_grid is required");
  if (!is_anticanonical(r.polytope())) throw Invalid("soliton-path starts from an anticanonical polytope");
  const std::size_t facet = exceptional_facet(r);
  const auto path = r.timed("soliton_path", [&] {
    return soliton_path(r.polytope(), facet, c.path_t, c.solver_options(), PathOptions{c.adapt_field});
  });
  const io::Csv csv = io::soliton_csv(path);
  print(csv);
  r.write("soliton-path.csv", csv.str());
  bool ok = true;
  for (const auto& e : path) {
    if (e.state.basis) r.write(state_name("soliton-path", e.t), io::state_json(io::to_state_file(e.state)));
    if (!e.state.converged) {
      ok = false;
      r.manifest().warnings.push_back("t = " + io::exact(e.t) + ": " + e.state.failure);
    }
  }
  return ok ? kOk : kNoConvergence;
}

int cmd_spectrum(Run& r) {
  const SolverOptions o = r.config().solver_options();
  const Quadrature q = build_quadrature(r.polytope(), o.quadrature);
  const SolitonProblem pr = make_soliton_problem(r.polytope(), field_b(r, q), o);
  const SolitonSolveState s = solve_soliton(r, pr);
  if (!s.converged) {
    std::cerr << s.failure << "\n";
    return kNoConvergence;
  }
  const SpectrumReport sp = r.timed("weighted_spectrum", [&] { return weighted_spectrum(s, r.config().spectrum_count); });
  const io::Csv csv = io::spectrum_csv(sp);
  print(csv);
  r.write("spectrum.csv", csv.str());
  json angles = json::array();
  for (double a : sp.angles) angles.push_back(io::exact(a));
  r.manifest().extra = json{{"kernel_dimension", sp.kernel_dimension}, {"kernel_tol", io::exact(sp.kernel_tol)},
                            {"spectral_radius", io::exact(sp.spectral_radius)}, {"gap", io::exact(sp.gap)},
                            {"symmetry_error", io::exact(sp.symmetry_error)}, {"angles", angles},
                            {"probe", probe_json(remark_probe(pr, s))}}
                           .dump();
  return kOk;
}

// Summarizes the manifests found in the output directory.
int cmd_report(const Options& o) {
  const fs::path dir = o.out.empty() ? fs::path("out") : fs::path(o.out);
  if (!fs::is_directory(dir)) {
    std::cerr << "no output directory " << dir << "\n";
    return kValidation;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string n = e.path().filename().string();
    if (n.size() > 14 && n.ends_with(".manifest.json") && n != "report.manifest.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  io::Csv csv{{"subcommand", "exit_code", "config_hash", "polytope_hash", "kappa", "warnings", "outputs"}, {}};
  for (const fs::path& f : files) {
    std::ifstream in(f);
    const json j = json::parse(in);
    csv.add({j.value("subcommand", ""), std::to_string(j.value("exit_code", -1)), j.value("config_hash", ""),
             j.value("polytope_hash", ""), j.value("kappa", ""), std::to_string(j["warnings"].size()),
             std::to_string(j["outputs"].size())});
  }
  print(csv);
  io::write_atomic(dir / "report.csv", csv.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toric-lab: extremal metrics and extremal solitons on toric surfaces"};
  app.require_subcommand(1);
  // flags are accepted after the subcommand as well
  app.fallthrough();
  Options opts;
  app.add_option("--config", opts.config, "JSON run configuration");
  app.add_option("--out", opts.out, "output directory (overrides the config)");
  app.add_option("--threads", opts.threads, "worker threads (default 1; results do not depend on it)")->check(CLI::NonNegativeNumber);
  app.add_flag("--strict", opts.strict, "unknown config keys are errors");

  using Handler = std::function<int(Run&)>;
  const std::vector<std::tuple<std::string, std::string, Handler>> commands{
      {"validate", "check a polytope file and print its vertices", cmd_validate},
      {"futaki", "Futaki invariant, interior and boundary forms", cmd_futaki},
      {"solve-extremal", "projected extremal solve at one t", cmd_solve_extremal},
      {"phi-scan", "scan Phi(t) over a t grid and fit its expansion", cmd_phi_scan},
      {"soliton-field", "Tian-Zhu field of an anticanonical polytope", cmd_soliton_field},
      {"soliton-solve", "extremal soliton solve and KRS certificate", cmd_soliton_solve},
      {"soliton-path", "soliton solves along c1 - t[E]", cmd_soliton_path},
      {"spectrum", "weighted drift spectrum at a solved soliton", cmd_spectrum},
  };
  Handler chosen;
  std::string chosen_name;
  for (const auto& [name, help, fn] : commands) {
    app.add_subcommand(name, help)->callback([&chosen, &chosen_name, name = name, fn = fn] {
      chosen = fn;
      chosen_name = name;
    });
  }
  bool report = false;
  app.add_subcommand("report", "summarize the manifests in the output directory")->callback([&] { report = true; });
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }
  if (opts.threads > 0) set_thread_count(opts.threads);
  if (report) return cmd_report(opts);
  if (opts.config.empty()) {
    std::cerr << "--config is required for " << chosen_name << "\n";
    return kValidation;
  }

  Run run(chosen_name, opts);
  try {
    run.load();
    return run.finish(chosen(run));
  } catch (const io::ConfigError& e) {
    std::cerr << "validation error";
    if (!e.field().empty()) std::cerr << " [" << e.field() << "]";
    std::cerr << ": " << e.what() << "\n";
    run.manifest().warnings.push_back(e.what());
    return run.finish(kValidation);
  } catch (const Invalid& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    run.manifest().warnings.push_back(e.what());
    return run.finish(kValidation);
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    run.manifest().warnings.push_back(e.what());
    return run.finish(kValidation);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    run.manifest().warnings.push_back(e.what());
    return run.finish(1);
  }
}
