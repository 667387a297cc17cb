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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "toric/continuation.hpp"
#include "toric/soliton.hpp"

namespace toric::io {

/// A configuration or input file that does not match its schema. `field` is
/// the dotted key path (empty for syntax errors, which carry `line` instead).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what, int line = 0)
      : std::runtime_error(what), field_(std::move(field)), line_(line) {}
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

struct RunConfig {
  std::filesystem::path source;  // config file, empty when parsed from text
  std::string text;              // raw bytes, hashed into the manifest
  std::filesystem::path polytope;

  // solver
  int degree = 12;
  int level = 5;
  double tol = 1e-10;
  int max_iter = 50;
  int max_halvings = 30;
  std::optional<std::filesystem::path> init_state;

  // deformation and scan
  std::vector<double> delta;
  bool trace_reduce = false;
  double t = 0.0;
  std::vector<double> t_grid;
  int fit_degree = 8;
  std::array<double, 2> window{1e-2, 1e-1};

  // soliton
  std::optional<Vec2> b;  // default: Tian-Zhu field of the polytope
  std::optional<std::size_t> exceptional_facet;
  std::vector<double> path_t;
  bool adapt_field = false;
  int spectrum_count = 6;

  std::vector<Vec2> futaki_directions{{1, 0}, {0, 1}};
  std::optional<double> kappa;
  std::filesystem::path out = "out";

  std::vector<std::string> warnings;  // unknown keys outside strict mode

  SolverOptions solver_options() const;
};

/// Reads and validates a JSON config; relative paths resolve against the
/// config file's directory. Unknown keys are errors in strict mode and
/// warnings otherwise.
RunConfig parse_config(const std::filesystem::path& path, bool strict);
RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir, bool strict);

/// Adds "kappa" to the config file on disk (atomic rewrite, key order kept).
void write_back_kappa(const std::filesystem::path& config, double kappa);

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Shortest-exact decimal text of a double ("%.17g").
std::string exact(double v);
/// Parses a JSON number or a decimal string.
double parse_number(const std::string& text);

/// Polytope file: {"name", "facets": [{"normal": [a, b], "offset": x}]}.
/// Offsets may be numbers or decimal strings; validation failures throw
/// ConfigError listing every problem.
Polytope load_polytope(const std::filesystem::path& path);
Polytope parse_polytope(std::string_view text, const std::string& origin = "polytope");
std::string polytope_json(const Polytope& p);
std::string polytope_hash(const Polytope& p);

/// State file shared by the continuation and soliton solvers: the polytope,
/// basis degree, weight, seed order and coefficients as decimal strings plus
/// the multipliers and solver diagnostics.
struct StateFile {
  std::string kind;  // "projected" or "soliton"
  Polytope polytope;
  int degree = 0;
  Weight weight;
  std::vector<std::array<int, 2>> seeds;
  Eigen::VectorXd phi;
  std::array<double, 3> multipliers{};
  double t = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

std::string state_json(const StateFile& s);
StateFile parse_state(std::string_view text);
StateFile load_state(const std::filesystem::path& path);
StateFile to_state_file(const ProjectedSolveState& s);
StateFile to_state_file(const SolitonSolveState& s);

/// Rebuilds a solver state for warm starts; the basis is reconstructed from
/// the polytope, degree and weight on `quadrature` and must reproduce the
/// stored seed order.
ProjectedSolveState projected_state(const StateFile& f, const QuadratureOptions& quadrature);
SolitonSolveState soliton_state(const StateFile& f, const QuadratureOptions& quadrature);

/// Minimal CSV table; cells are preformatted strings.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const;
};

/// "%.15e"
std::string num(double v);

/// Writes through a temporary file in the same directory and renames it over
/// `path`, so readers never see a partial file.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

struct Timing {
  std::string operation;
  double seconds = 0.0;
};

struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  std::string polytope_hash;
  double kappa = 0.0;
  std::string kappa_source;  // "config" or "calibrated"
  int threads = 1;
  std::string isa;
  std::vector<Timing> timings;
  std::vector<std::string> warnings;
  std::vector<std::string> outputs;
  int exit_code = 0;
  std::string extra;  // JSON object text merged under "results", may be empty

  std::string json() const;
};

std::string_view software_version();

// Result tables shared by the command line tool and the acceptance checks.

/// t, c0, c1, c2, Phi, residual, iters (Phi in its integral form).
Csv scan_csv(const PhiScan& scan);
Csv projected_csv(const ProjectedSolveState& s, const PhiValue& phi);
/// t, mu0, mu1, mu2, residual, iters, b1, b2; failed samples keep their row
/// with empty numeric cells and the failure text in a last column.
Csv soliton_csv(const std::vector<SolitonPathEntry>& path);
/// index, eigenvalue, then the basis coefficients of each eigenvector.
Csv spectrum_csv(const SpectrumReport& r);

}  // namespace toric::io
