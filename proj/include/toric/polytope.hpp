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
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace toric {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// One facet of a Delzant polygon: the half-plane <x, normal> + offset >= 0.
/// The normal is primitive and points into the polygon.
struct Facet {
  std::array<int, 2> normal{0, 0};
  double offset = 0.0;

  Vec2 n() const { return {static_cast<double>(normal[0]), static_cast<double>(normal[1])}; }
  double norm() const;
  /// Affine defining function l(x) = <x, n> + offset.
  double ell(Vec2 p) const { return p.x * normal[0] + p.y * normal[1] + offset; }
};

/// A validated Delzant polygon. Immutable once constructed; build one through
/// validate_delzant() or deform().
class Polytope {
 public:
  const std::string& name() const { return name_; }
  const std::vector<Facet>& facets() const { return facets_; }
  std::size_t facet_count() const { return facets_.size(); }

  /// Vertices counterclockwise, starting from the lexicographically smallest.
  const std::vector<Vec2>& vertices() const { return vertices_; }

  /// Facet indices in counterclockwise boundary order (same start as vertices:
  /// facet_cycle()[i] is the edge from vertices()[i] to vertices()[i + 1]).
  const std::vector<std::size_t>& facet_cycle() const { return cycle_; }

  /// Edge endpoints of a facet, in counterclockwise traversal order.
  std::array<Vec2, 2> edge(std::size_t facet) const { return edges_[facet]; }

  double area() const { return area_; }
  double euclidean_length(std::size_t facet) const { return lengths_[facet]; }
  /// Edge length in the lattice-normalized measure: Euclidean length / |n|.
  double sigma_length(std::size_t facet) const { return lengths_[facet] / facets_[facet].norm(); }
  /// Total sigma-length of the boundary.
  double boundary_sigma() const;
  Vec2 vertex_mean() const;
  Vec2 centroid() const;

  /// Strictly interior (every defining function positive).
  bool contains_interior(Vec2 p) const;
  /// Smallest defining-function value at p.
  double min_ell(Vec2 p) const;

  std::vector<double> offsets() const;

 private:
  friend struct PolytopeBuilder;
  std::string name_;
  std::vector<Facet> facets_;
  std::vector<Vec2> vertices_;
  std::vector<std::size_t> cycle_;
  std::vector<std::array<Vec2, 2>> edges_;
  std::vector<double> lengths_;
  double area_ = 0.0;
};

struct Diagnostic {
  enum class Kind {
    too_few_facets,
    zero_normal,
    non_primitive_normal,
    parallel_facets,
    unbounded,
    redundant_facet,
    empty_interior,
    non_delzant_vertex,
  };
  Kind kind;
  std::string message;
  std::optional<std::size_t> facet;
  std::optional<Vec2> vertex;
};

std::string_view to_string(Diagnostic::Kind kind);

/// Outcome of validate_delzant: a polytope, or the list of violated conditions.
struct PolytopeCheck {
  std::optional<Polytope> polytope;
  std::vector<Diagnostic> problems;

  bool ok() const { return polytope.has_value(); }
  /// The polytope, or throws std::invalid_argument listing every problem.
  const Polytope& value() const;
};

PolytopeCheck validate_delzant(std::vector<Facet> facets, std::string name = {});

/// Raised when a deformation changes the combinatorial type of the polygon.
class CombinatoricsError : public std::runtime_error {
 public:
  CombinatoricsError(const std::string& what, double critical_t)
      : std::runtime_error(what), critical_t_(critical_t) {}
  /// Parameter value at which the first edge degenerates.
  double critical_t() const { return critical_t_; }

 private:
  double critical_t_;
};

/// A unit perturbation of the facet offsets of a base polygon: the toric
/// stand-in for a direction in the space of Kaehler classes.
class ClassDeformation {
 public:
  /// Unreduced offset perturbation, rescaled to unit Euclidean norm.
  static ClassDeformation raw(Polytope base, std::vector<double> delta);

  /// Removes the translation part (and optionally the scaling direction along
  /// the base offsets), then renormalizes. Each nontrivial removal appends a
  /// warning.
  static ClassDeformation reduced(Polytope base, std::vector<double> delta, bool trace_reduce,
                                  std::vector<std::string>* warnings = nullptr);

  const Polytope& base() const { return base_; }
  std::span<const double> delta() const { return delta_; }
  bool translation_reduced() const { return translation_reduced_; }
  bool trace_reduced() const { return trace_reduced_; }

  /// Range (t_min, t_max) around 0 in which the combinatorics are unchanged.
  std::array<double, 2> admissible_range() const;

 private:
  ClassDeformation(Polytope base, std::vector<double> delta, bool translation, bool trace)
      : base_(std::move(base)), delta_(std::move(delta)),
        translation_reduced_(translation), trace_reduced_(trace) {}

  Polytope base_;
  std::vector<double> delta_;
  bool translation_reduced_ = false;
  bool trace_reduced_ = false;
};

/// Offsets lambda_a + t * delta_a with the same normals. Throws
/// CombinatoricsError (carrying the critical t) if an edge degenerates.
Polytope deform(const ClassDeformation& deformation, double t);

/// Same normals, new offsets; throws CombinatoricsError on a change of type.
Polytope with_offsets(const Polytope& base, std::span<const double> offsets);

/// Translation vectors (<v, n_a>)_a for v = e1, e2.
std::array<std::vector<double>, 2> translation_directions(const Polytope& p);

/// Offsets all equal after a translation (least-squares check within tol).
bool is_anticanonical(const Polytope& p, double tol = 1e-10);

}  // namespace toric
