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

#include "toric/io.hpp"

#include <unistd.h>

#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "toric/kernels.hpp"

namespace toric::io {

namespace {

using json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path, const std::string& field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(field, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int line_of(std::string_view text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

json parse_json(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const int line = line_of(text, e.byte);
    throw ConfigError("", origin + ": line " + std::to_string(line) + ": " + e.what(), line);
  }
}

// Typed access with the dotted key path in every error.
class Reader {
 public:
  Reader(const json& j, std::string path, bool strict, std::vector<std::string>* warnings)
      : j_(j), path_(std::move(path)), strict_(strict), warnings_(warnings) {
    if (!j_.is_object()) throw ConfigError(path_, where("") + " must be an object");
  }

  ~Reader() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      try {
        return parse_number(v.get<std::string>());
      } catch (const std::invalid_argument&) {
      }
    }
    throw ConfigError(where(key), where(key) + " must be a number");
  }

  double positive(const std::string& key) {
    const double v = number(key);
    if (!(v > 0)) throw ConfigError(where(key), where(key) + " must be > 0");
    return v;
  }

  int integer(const std::string& key, int min) {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key), where(key) + " must be an integer");
    const auto x = v.get<long long>();
    if (x < min) throw ConfigError(where(key), where(key) + " must be >= " + std::to_string(min));
    return static_cast<int>(x);
  }

  bool boolean(const std::string& key) {
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(where(key), where(key) + " must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(where(key), where(key) + " must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError(where(key), where(key) + " must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const json& e = v[i];
      if (e.is_number()) {
        out.push_back(e.get<double>());
      } else if (e.is_string()) {
        try {
          out.push_back(parse_number(e.get<std::string>()));
        } catch (const std::invalid_argument&) {
          throw ConfigError(where(key), where(key) + "[" + std::to_string(i) + "] is not a number");
        }
      } else {
        throw ConfigError(where(key), where(key) + "[" + std::to_string(i) + "] is not a number");
      }
    }
    return out;
  }

  std::vector<double> increasing(const std::string& key) {
    std::vector<double> v = numbers(key);
    if (v.empty()) throw ConfigError(where(key), where(key) + " must not be empty");
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (!(v[i] > v[i - 1])) {
        throw ConfigError(where(key), where(key) + " must be strictly increasing (entry " + std::to_string(i) + ")");
      }
    }
    return v;
  }

  Vec2 pair(const std::string& key) {
    const std::vector<double> v = numbers(key);
    if (v.size() != 2) throw ConfigError(where(key), where(key) + " must have two entries");
    return {v[0], v[1]};
  }

  Reader sub(const std::string& key) { return Reader(at(key), where(key), strict_, warnings_); }

  // call after reading: reports keys nobody asked for
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (seen_.count(it.key())) continue;
      const std::string msg = "unknown key " + where(it.key());
      if (strict_) throw ConfigError(where(it.key()), msg);
      if (warnings_) warnings_->push_back(msg);
    }
  }

 private:
  const json& j_;
  std::string path_;
  bool strict_;
  std::vector<std::string>* warnings_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

json weight_json(const Weight& w) {
  json j;
  j["exponential"] = w.exponential;
  j["b"] = json::array({exact(w.b.x), exact(w.b.y)});
  j["shift"] = exact(w.shift);
  return j;
}

}  // namespace

SolverOptions RunConfig::solver_options() const {
  SolverOptions o;
  o.degree = degree;
  o.quadrature.level = level;
  o.tol = tol;
  o.max_iter = max_iter;
  o.max_halvings = max_halvings;
  return o;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15e", v);
  return buf;
}

double parse_number(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE) throw std::invalid_argument("not a number: " + text);
  return v;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir, bool strict) {
  RunConfig c;
  c.text = std::string(text);
  const json j = parse_json(text, "config");
  Reader r(j, "", strict, &c.warnings);
  if (!r.has("polytope")) throw ConfigError("polytope", "missing required key polytope");
  c.polytope = resolve(base_dir, r.string("polytope"));

  if (r.has("solver")) {
    Reader s = r.sub("solver");
    if (s.has("degree")) c.degree = s.integer("degree", 4);
    if (s.has("level")) c.level = s.integer("level", 0);
    if (s.has("tol")) c.tol = s.positive("tol");
    if (s.has("max_iter")) c.max_iter = s.integer("max_iter", 1);
    if (s.has("max_halvings")) c.max_halvings = s.integer("max_halvings", 0);
    if (s.has("init_state")) c.init_state = resolve(base_dir, s.string("init_state"));
    s.finish();
  }
  if (r.has("deformation")) {
    Reader d = r.sub("deformation");
    if (d.has("delta")) c.delta = d.numbers("delta");
    if (d.has("trace_reduce")) c.trace_reduce = d.boolean("trace_reduce");
    if (d.has("t")) c.t = d.number("t");
    d.finish();
  }
  if (r.has("scan")) {
    Reader s = r.sub("scan");
    if (s.has("t_grid")) c.t_grid = s.increasing("t_grid");
    if (s.has("fit_degree")) c.fit_degree = s.integer("fit_degree", 1);
    if (s.has("window")) {
      const Vec2 w = s.pair("window");
      if (!(w.x > 0 && w.y > w.x)) throw ConfigError("scan.window", "scan.window must satisfy 0 < lo < hi");
      c.window = {w.x, w.y};
    }
    s.finish();
  }
  if (r.has("soliton")) {
    Reader s = r.sub("soliton");
    if (s.has("b")) c.b = s.pair("b");
    if (s.has("exceptional_facet")) c.exceptional_facet = static_cast<std::size_t>(s.integer("exceptional_facet", 0));
    if (s.has("t_grid")) c.path_t = s.increasing("t_grid");
    if (s.has("adapt_field")) c.adapt_field = s.boolean("adapt_field");
    if (s.has("spectrum_count")) c.spectrum_count = s.integer("spectrum_count", 1);
    s.finish();
  }
  if (r.has("futaki")) {
    Reader f = r.sub("futaki");
    if (f.has("directions")) {
      const json& v = f.at("directions");
      if (!v.is_array() || v.empty()) throw ConfigError("futaki.directions", "futaki.directions must be a non-empty array");
      c.futaki_directions.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string key = "futaki.directions[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].size() != 2 || !v[i][0].is_number() || !v[i][1].is_number()) {
          throw ConfigError(key, key + " must be a pair of numbers");
        }
        c.futaki_directions.push_back({v[i][0].get<double>(), v[i][1].get<double>()});
      }
    }
    f.finish();
  }
  if (r.has("kappa")) c.kappa = r.positive("kappa");
  if (r.has("out")) c.out = resolve(base_dir, r.string("out"));
  r.finish();
  return c;
}

RunConfig parse_config(const std::filesystem::path& path, bool strict) {
  const std::string text = read_file(path, "config");
  RunConfig c = parse_config_text(text, path.parent_path(), strict);
  c.source = path;
  return c;
}

void write_back_kappa(const std::filesystem::path& config, double kappa) {
  json j = parse_json(read_file(config, "config"), config.string());
  j["kappa"] = kappa;
  write_atomic(config, j.dump(2) + "\n");
}

Polytope parse_polytope(std::string_view text, const std::string& origin) {
  const json j = parse_json(text, origin);
  Reader r(j, "", true, nullptr);
  std::string name;
  if (r.has("name")) name = r.string("name");
  if (!r.has("facets") || !r.at("facets").is_array()) throw ConfigError("facets", origin + ": facets must be an array");
  std::vector<Facet> facets;
  const json& fs = r.at("facets");
  for (std::size_t i = 0; i < fs.size(); ++i) {
    Reader f(fs[i], "facets[" + std::to_string(i) + "]", true, nullptr);
    const json& n = f.has("normal") ? f.at("normal") : throw ConfigError(f.where("normal"), origin + ": missing " + f.where("normal"));
    if (!n.is_array() || n.size() != 2 || !n[0].is_number_integer() || !n[1].is_number_integer()) {
      throw ConfigError(f.where("normal"), origin + ": " + f.where("normal") + " must be two integers");
    }
    if (!f.has("offset")) throw ConfigError(f.where("offset"), origin + ": missing " + f.where("offset"));
    Facet facet;
    facet.normal = {n[0].get<int>(), n[1].get<int>()};
    facet.offset = f.number("offset");
    f.finish();
    facets.push_back(facet);
  }
  r.finish();
  PolytopeCheck check = validate_delzant(std::move(facets), name);
  if (!check.ok()) {
    std::string msg = origin + ": not a Delzant polygon";
    for (const Diagnostic& d : check.problems) msg += "\n  " + std::string(to_string(d.kind)) + ": " + d.message;
    throw ConfigError("facets", msg);
  }
  return *check.polytope;
}

Polytope load_polytope(const std::filesystem::path& path) { return parse_polytope(read_file(path, "polytope"), path.string()); }

std::string polytope_json(const Polytope& p) {
  json j;
  j["name"] = p.name();
  j["facets"] = json::array();
  for (const Facet& f : p.facets()) {
    json e;
    e["normal"] = json::array({f.normal[0], f.normal[1]});
    e["offset"] = exact(f.offset);
    j["facets"].push_back(e);
  }
  return j.dump(2);
}

std::string polytope_hash(const Polytope& p) {
  // normals and offsets only: renaming a file does not change the hash
  std::string s;
  for (const Facet& f : p.facets()) {
    s += std::to_string(f.normal[0]) + "," + std::to_string(f.normal[1]) + "," + exact(f.offset) + ";";
  }
  return fnv1a_hex(s);
}

std::string state_json(const StateFile& s) {
  json j;
  j["kind"] = s.kind;
  j["polytope_hash"] = polytope_hash(s.polytope);
  j["polytope"] = json::parse(polytope_json(s.polytope));
  j["degree"] = s.degree;
  j["weight"] = weight_json(s.weight);
  j["t"] = exact(s.t);
  j["converged"] = s.converged;
  j["iterations"] = s.iterations;
  j["residual"] = exact(s.residual);
  j["multipliers"] = json::array({exact(s.multipliers[0]), exact(s.multipliers[1]), exact(s.multipliers[2])});
  json seeds = json::array();
  for (const auto& e : s.seeds) seeds.push_back(json::array({e[0], e[1]}));
  j["seed_order"] = seeds;
  json c = json::array();
  for (Eigen::Index i = 0; i < s.phi.size(); ++i) c.push_back(exact(s.phi(i)));
  j["coefficients"] = c;
  return j.dump(2) + "\n";
}

StateFile parse_state(std::string_view text) {
  const json j = parse_json(text, "state");
  Reader r(j, "", true, nullptr);
  StateFile s;
  s.kind = r.string("kind");
  if (s.kind != "projected" && s.kind != "soliton") throw ConfigError("kind", "state kind must be projected or soliton");
  s.polytope = parse_polytope(r.at("polytope").dump(), "state.polytope");
  if (polytope_hash(s.polytope) != r.string("polytope_hash")) {
    throw ConfigError("polytope_hash", "state polytope does not match its recorded hash");
  }
  s.degree = r.integer("degree", 0);
  {
    Reader w = r.sub("weight");
    s.weight.exponential = w.boolean("exponential");
    s.weight.b = w.pair("b");
    s.weight.shift = w.number("shift");
    w.finish();
  }
  s.t = r.number("t");
  s.converged = r.boolean("converged");
  s.iterations = r.integer("iterations", 0);
  s.residual = r.number("residual");
  const std::vector<double> m = r.numbers("multipliers");
  if (m.size() != 3) throw ConfigError("multipliers", "multipliers must have three entries");
  s.multipliers = {m[0], m[1], m[2]};
  const json& seeds = r.at("seed_order");
  if (!seeds.is_array()) throw ConfigError("seed_order", "seed_order must be an array");
  for (const json& e : seeds) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("seed_order", "seed_order entries must be pairs");
    s.seeds.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  const std::vector<double> c = r.numbers("coefficients");
  if (c.size() != s.seeds.size()) throw ConfigError("coefficients", "coefficients and seed_order differ in length");
  s.phi = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
  r.finish();
  return s;
}

StateFile load_state(const std::filesystem::path& path) { return parse_state(read_file(path, "state")); }

namespace {

StateFile common(const std::string& kind, const Polytope& p, const PolyBasis& b, const Eigen::VectorXd& phi) {
  StateFile f;
  f.kind = kind;
  f.polytope = p;
  f.degree = b.degree();
  f.weight = b.weight();
  for (std::size_t i = 0; i < b.size(); ++i) f.seeds.push_back(b.seed(i));
  f.phi = phi;
  return f;
}

std::shared_ptr<const PolyBasis> rebuild(const StateFile& f, const Quadrature& q) {
  auto b = std::make_shared<const PolyBasis>(PolyBasis::build(f.polytope, q, f.degree, f.weight));
  bool same = b->size() == f.seeds.size();
  for (std::size_t i = 0; same && i < b->size(); ++i) same = b->seed(i) == f.seeds[i];
  if (!same) throw ConfigError("seed_order", "state seed order does not match the rebuilt basis");
  return b;
}

}  // namespace

StateFile to_state_file(const ProjectedSolveState& s) {
  StateFile f = common("projected", s.polytope, *s.basis, s.phi);
  f.multipliers = s.xi;
  f.t = s.t;
  f.residual = s.residual;
  f.iterations = s.iterations;
  f.converged = s.converged;
  return f;
}

StateFile to_state_file(const SolitonSolveState& s) {
  StateFile f = common("soliton", s.polytope, *s.basis, s.phi);
  f.multipliers = s.mu;
  f.residual = s.residual;
  f.iterations = s.iterations;
  f.converged = s.converged;
  return f;
}

ProjectedSolveState projected_state(const StateFile& f, const QuadratureOptions& quadrature) {
  ProjectedSolveState s;
  s.t = f.t;
  s.polytope = f.polytope;
  s.basis = rebuild(f, build_quadrature(f.polytope, quadrature));
  s.phi = f.phi;
  s.xi = f.multipliers;
  s.residual = f.residual;
  s.iterations = f.iterations;
  s.converged = f.converged;
  s.warm_start = "file";
  return s;
}

SolitonSolveState soliton_state(const StateFile& f, const QuadratureOptions& quadrature) {
  const Quadrature q = build_quadrature(f.polytope, quadrature);
  SolitonSolveState s;
  s.polytope = f.polytope;
  s.field = soliton_field_for(f.polytope, q, f.weight.b);
  s.basis = rebuild(f, q);
  s.theta = orthonormal_affine_basis(f.polytope, q, f.weight);
  s.s_bar = s_bar_boundary(f.polytope, 2.0);
  s.phi = f.phi;
  s.mu = f.multipliers;
  s.residual = f.residual;
  s.iterations = f.iterations;
  s.converged = f.converged;
  s.warm_start = "file";
  return s;
}

std::string Csv::str() const {
  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string_view software_version() { return "0.1.0"; }

std::string RunManifest::json() const {
  io::json j;
  j["subcommand"] = subcommand;
  j["software_version"] = software_version();
  j["config_hash"] = config_hash;
  j["polytope_hash"] = polytope_hash;
  j["kappa"] = exact(kappa);
  j["kappa_source"] = kappa_source;
  j["conventions"] = {
      {"measure", "Lebesgue dx on P, dsigma = dL/|n| on facets, no n! or 2pi factors"},
      {"gram_schmidt_order", "1, x1, x2, then graded-lexicographic monomials"},
      {"futaki_sign", "F(f) = kappa oint f dsigma - s_bar int f dx"},
      {"scalar_curvature", "s = -sum d_i d_j U^ij"},
  };
  j["threads"] = threads;
  j["isa"] = isa;
  io::json t = io::json::array();
  for (const Timing& x : timings) t.push_back({{"operation", x.operation}, {"seconds", x.seconds}});
  j["timings"] = t;
  j["warnings"] = warnings;
  j["outputs"] = outputs;
  j["exit_code"] = exit_code;
  if (!extra.empty()) j["results"] = io::json::parse(extra);
  return j.dump(2) + "\n";
}

Csv scan_csv(const PhiScan& scan) {
  Csv c{{"t", "c0", "c1", "c2", "Phi", "residual", "iters"}, {}};
  for (const PhiSample& s : scan.samples) {
    c.add({num(s.state.t), num(s.state.xi[0]), num(s.state.xi[1]), num(s.state.xi[2]), num(s.phi.integral),
           num(s.state.residual), std::to_string(s.state.iterations)});
  }
  return c;
}

Csv projected_csv(const ProjectedSolveState& s, const PhiValue& phi) {
  PhiScan one;
  one.samples.push_back({s, phi});
  return scan_csv(one);
}

Csv soliton_csv(const std::vector<SolitonPathEntry>& path) {
  Csv c{{"t", "mu0", "mu1", "mu2", "residual", "iters", "b1", "b2", "failure"}, {}};
  for (const SolitonPathEntry& e : path) {
    const SolitonSolveState& s = e.state;
    if (s.basis) {
      c.add({num(e.t), num(s.mu[0]), num(s.mu[1]), num(s.mu[2]), num(s.residual), std::to_string(s.iterations),
             num(s.field.b.x), num(s.field.b.y), s.converged ? "" : "\"" + s.failure + "\""});
    } else {
      c.add({num(e.t), "", "", "", "", "", "", "", "\"" + s.failure + "\""});
    }
  }
  return c;
}

Csv spectrum_csv(const SpectrumReport& r) {
  Csv c{{"index", "eigenvalue"}, {}};
  for (Eigen::Index i = 0; i < r.eigenvectors.rows(); ++i) c.header.push_back("v" + std::to_string(i));
  for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) {
    std::vector<std::string> row{std::to_string(k), num(r.eigenvalues[k])};
    for (Eigen::Index i = 0; i < r.eigenvectors.rows(); ++i) row.push_back(num(r.eigenvectors(i, static_cast<Eigen::Index>(k))));
    c.add(std::move(row));
  }
  return c;
}

}  // namespace toric::io
