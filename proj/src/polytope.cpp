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

#include "toric/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace toric {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Vec2 intersect(const Facet& a, const Facet& b) {
  // <x, n_a> = -lambda_a, <x, n_b> = -lambda_b
  const double det = static_cast<double>(a.normal[0]) * b.normal[1] -
                     static_cast<double>(a.normal[1]) * b.normal[0];
  const double ra = -a.offset;
  const double rb = -b.offset;
  return {(ra * b.normal[1] - rb * a.normal[1]) / det, (a.normal[0] * rb - b.normal[0] * ra) / det};
}

Vec2 edge_direction(const Facet& f) { return {static_cast<double>(f.normal[1]), -static_cast<double>(f.normal[0])}; }

// Vertices and signed edge lengths for facets traversed in the given cyclic order.
// vertex[i] is the start of the edge on cycle[i].
struct CycleGeometry {
  std::vector<Vec2> starts;
  std::vector<double> lengths;  // indexed like cycle
};

CycleGeometry cycle_geometry(const std::vector<Facet>& facets, const std::vector<std::size_t>& cycle) {
  const std::size_t m = cycle.size();
  CycleGeometry g;
  g.starts.resize(m);
  g.lengths.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    g.starts[i] = intersect(facets[cycle[(i + m - 1) % m]], facets[cycle[i]]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 d = edge_direction(facets[cycle[i]]);
    const Vec2 e = g.starts[(i + 1) % m] - g.starts[i];
    g.lengths[i] = dot(e, d) / std::sqrt(dot(d, d));
  }
  return g;
}

double angle_of(const Facet& f) {
  double a = std::atan2(static_cast<double>(f.normal[1]), static_cast<double>(f.normal[0]));
  if (a < 0) a += 2 * kPi;
  return a;
}

bool bounded_cycle(const std::vector<Facet>& facets, const std::vector<std::size_t>& cycle) {
  if (cycle.size() < 3) return false;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const Facet& a = facets[cycle[i]];
    const Facet& b = facets[cycle[(i + 1) % cycle.size()]];
    // consecutive normals must turn strictly less than pi counterclockwise
    if (cross(a.n(), b.n()) <= 0) return false;
  }
  return true;
}

double length_scale(const std::vector<Facet>& facets) {
  double s = 1.0;
  for (const auto& f : facets) s = std::max(s, std::abs(f.offset) / f.norm());
  return s;
}

}  // namespace

double Facet::norm() const {
  return std::hypot(static_cast<double>(normal[0]), static_cast<double>(normal[1]));
}

std::string_view to_string(Diagnostic::Kind kind) {
  switch (kind) {
    case Diagnostic::Kind::too_few_facets: return "too_few_facets";
    case Diagnostic::Kind::zero_normal: return "zero_normal";
    case Diagnostic::Kind::non_primitive_normal: return "non_primitive_normal";
    case Diagnostic::Kind::parallel_facets: return "parallel_facets";
    case Diagnostic::Kind::unbounded: return "unbounded";
    case Diagnostic::Kind::redundant_facet: return "redundant_facet";
    case Diagnostic::Kind::empty_interior: return "empty_interior";
    case Diagnostic::Kind::non_delzant_vertex: return "non_delzant_vertex";
  }
  return "unknown";
}

struct PolytopeBuilder {
  static Polytope make(std::string name, std::vector<Facet> facets, const std::vector<std::size_t>& cycle,
                       const CycleGeometry& g) {
    Polytope p;
    p.name_ = std::move(name);
    p.facets_ = std::move(facets);
    const std::size_t m = cycle.size();
    // rotate so that the first vertex is lexicographically smallest
    std::size_t first = 0;
    for (std::size_t i = 1; i < m; ++i) {
      const Vec2 a = g.starts[i];
      const Vec2 b = g.starts[first];
      if (a.x < b.x || (a.x == b.x && a.y < b.y)) first = i;
    }
    p.cycle_.resize(m);
    p.vertices_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      p.cycle_[i] = cycle[(first + i) % m];
      p.vertices_[i] = g.starts[(first + i) % m];
    }
    p.edges_.resize(m);
    p.lengths_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t f = p.cycle_[i];
      p.edges_[f] = {p.vertices_[i], p.vertices_[(i + 1) % m]};
      p.lengths_[f] = g.lengths[(first + i) % m];
    }
    double a2 = 0;
    for (std::size_t i = 0; i < m; ++i) a2 += cross(p.vertices_[i], p.vertices_[(i + 1) % m]);
    p.area_ = 0.5 * a2;
    return p;
  }
};

double Polytope::boundary_sigma() const {
  double s = 0;
  for (std::size_t a = 0; a < facets_.size(); ++a) s += sigma_length(a);
  return s;
}

Vec2 Polytope::vertex_mean() const {
  Vec2 c;
  for (const auto& v : vertices_) c = c + v;
  return (1.0 / static_cast<double>(vertices_.size())) * c;
}

Vec2 Polytope::centroid() const {
  Vec2 c;
  const std::size_t m = vertices_.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 a = vertices_[i];
    const Vec2 b = vertices_[(i + 1) % m];
    c = c + cross(a, b) * (a + b);
  }
  return (1.0 / (6.0 * area_)) * c;
}

bool Polytope::contains_interior(Vec2 p) const { return min_ell(p) > 0; }

double Polytope::min_ell(Vec2 p) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& f : facets_) m = std::min(m, f.ell(p));
  return m;
}

std::vector<double> Polytope::offsets() const {
  std::vector<double> out;
  out.reserve(facets_.size());
  for (const auto& f : facets_) out.push_back(f.offset);
  return out;
}

const Polytope& PolytopeCheck::value() const {
  if (polytope) return *polytope;
  std::ostringstream os;
  os << "invalid Delzant polygon:";
  for (const auto& d : problems) os << "\n  [" << to_string(d.kind) << "] " << d.message;
  throw std::invalid_argument(os.str());
}

PolytopeCheck validate_delzant(std::vector<Facet> facets, std::string name) {
  PolytopeCheck out;
  auto add = [&](Diagnostic::Kind k, std::string msg, std::optional<std::size_t> f = {},
                 std::optional<Vec2> v = {}) { out.problems.push_back({k, std::move(msg), f, v}); };

  if (facets.size() < 3) {
    add(Diagnostic::Kind::too_few_facets, "a polygon needs at least 3 facets, got " + std::to_string(facets.size()));
  }
  for (std::size_t a = 0; a < facets.size(); ++a) {
    const auto [p, q] = facets[a].normal;
    if (p == 0 && q == 0) {
      add(Diagnostic::Kind::zero_normal, "facet " + std::to_string(a) + " has zero normal", a);
    } else if (std::gcd(p, q) != 1) {
      add(Diagnostic::Kind::non_primitive_normal,
          "facet " + std::to_string(a) + " normal (" + std::to_string(p) + ", " + std::to_string(q) +
              ") is not primitive",
          a);
    }
    if (!std::isfinite(facets[a].offset)) {
      add(Diagnostic::Kind::empty_interior, "facet " + std::to_string(a) + " has non-finite offset", a);
    }
  }
  if (!out.problems.empty()) return out;

  std::vector<std::size_t> order(facets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return angle_of(facets[a]) < angle_of(facets[b]); });
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const Facet& a = facets[order[i]];
    const Facet& b = facets[order[i + 1]];
    if (a.normal == b.normal) {
      add(Diagnostic::Kind::parallel_facets,
          "facets " + std::to_string(order[i]) + " and " + std::to_string(order[i + 1]) + " share a normal",
          order[i + 1]);
    }
  }
  if (!out.problems.empty()) return out;
  if (!bounded_cycle(facets, order)) {
    add(Diagnostic::Kind::unbounded, "normals do not positively span the plane; the region is unbounded");
    return out;
  }

  const double tol = 1e-12 * length_scale(facets);
  std::vector<std::size_t> cycle = order;
  std::vector<std::size_t> removed;
  CycleGeometry g = cycle_geometry(facets, cycle);
  for (;;) {
    std::size_t worst = cycle.size();
    double worst_len = tol;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      if (g.lengths[i] <= worst_len) {
        worst_len = g.lengths[i];
        worst = i;
      }
    }
    if (worst == cycle.size()) break;
    removed.push_back(cycle[worst]);
    cycle.erase(cycle.begin() + static_cast<std::ptrdiff_t>(worst));
    if (!bounded_cycle(facets, cycle)) break;
    g = cycle_geometry(facets, cycle);
  }

  bool empty = !bounded_cycle(facets, cycle);
  if (!empty) {
    for (std::size_t a : removed) {
      for (const Vec2& v : g.starts) {
        if (facets[a].ell(v) < -tol) empty = true;
      }
    }
  }
  if (empty) {
    add(Diagnostic::Kind::empty_interior, "the facet inequalities have no common interior point");
    return out;
  }
  for (std::size_t a : removed) {
    add(Diagnostic::Kind::redundant_facet,
        "facet " + std::to_string(a) + " does not support an edge of positive length", a);
  }

  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const Facet& a = facets[cycle[(i + cycle.size() - 1) % cycle.size()]];
    const Facet& b = facets[cycle[i]];
    const long det = static_cast<long>(a.normal[0]) * b.normal[1] - static_cast<long>(a.normal[1]) * b.normal[0];
    if (det != 1) {
      const Vec2 v = g.starts[i];
      add(Diagnostic::Kind::non_delzant_vertex,
          "vertex (" + fmt(v.x) + ", " + fmt(v.y) + ") is not smooth: |det| of adjacent normals is " +
              std::to_string(std::labs(det)),
          cycle[i], v);
    }
  }
  if (!out.problems.empty()) return out;

  out.polytope = PolytopeBuilder::make(std::move(name), std::move(facets), cycle, g);
  return out;
}

Polytope with_offsets(const Polytope& base, std::span<const double> offsets) {
  if (offsets.size() != base.facet_count()) throw std::invalid_argument("offset count does not match facet count");
  std::vector<Facet> facets = base.facets();
  for (std::size_t a = 0; a < facets.size(); ++a) facets[a].offset = offsets[a];
  const auto& cycle = base.facet_cycle();
  CycleGeometry g = cycle_geometry(facets, cycle);
  const double tol = 1e-12 * length_scale(facets);
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (!(g.lengths[i] > tol)) {
      throw CombinatoricsError("facet " + std::to_string(cycle[i]) + " degenerates (edge length " +
                                   fmt(g.lengths[i]) + ")",
                               std::numeric_limits<double>::quiet_NaN());
    }
  }
  return PolytopeBuilder::make(base.name(), std::move(facets), cycle, g);
}

std::array<std::vector<double>, 2> translation_directions(const Polytope& p) {
  std::array<std::vector<double>, 2> t;
  for (const auto& f : p.facets()) {
    t[0].push_back(f.normal[0]);
    t[1].push_back(f.normal[1]);
  }
  return t;
}

bool is_anticanonical(const Polytope& p, double tol) {
  // find v with <v, n_a> + lambda_a = 1 for all a: least squares on two facets, check the rest
  const auto& f = p.facets();
  const Facet fa = f[p.facet_cycle()[0]];
  const Facet fb = f[p.facet_cycle()[1]];
  const Facet ga{fa.normal, fa.offset - 1.0};
  const Facet gb{fb.normal, fb.offset - 1.0};
  const Vec2 v = intersect(ga, gb);
  for (const auto& fc : f) {
    if (std::abs(fc.ell(v) - 1.0) > tol) return false;
  }
  return true;
}

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void subtract_projection(std::vector<double>& v, const std::vector<double>& unit) {
  double d = 0;
  for (std::size_t i = 0; i < v.size(); ++i) d += v[i] * unit[i];
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * unit[i];
}

std::vector<double> normalized(std::vector<double> v, const char* what) {
  const double n = norm2(v);
  if (!(n > 1e-14)) throw std::invalid_argument(std::string(what) + ": deformation vanishes after reduction");
  for (double& x : v) x /= n;
  return v;
}

}  // namespace

ClassDeformation ClassDeformation::raw(Polytope base, std::vector<double> delta) {
  if (delta.size() != base.facet_count()) throw std::invalid_argument("deformation length does not match facets");
  auto unit = normalized(std::move(delta), "raw");
  return ClassDeformation(std::move(base), std::move(unit), false, false);
}

ClassDeformation ClassDeformation::reduced(Polytope base, std::vector<double> delta, bool trace_reduce,
                                           std::vector<std::string>* warnings) {
  if (delta.size() != base.facet_count()) throw std::invalid_argument("deformation length does not match facets");
  const double input_norm = norm2(delta);
  if (!(input_norm > 0)) throw std::invalid_argument("zero deformation");

  // orthonormal basis of the removed directions, by Gram-Schmidt
  std::vector<std::vector<double>> removed;
  auto push = [&](std::vector<double> v) {
    for (const auto& u : removed) subtract_projection(v, u);
    for (const auto& u : removed) subtract_projection(v, u);
    const double n = norm2(v);
    if (n < 1e-12) return;
    for (double& x : v) x /= n;
    removed.push_back(std::move(v));
  };
  auto tr = translation_directions(base);
  push(tr[0]);
  push(tr[1]);
  const std::size_t n_translation = removed.size();
  if (trace_reduce) push(base.offsets());

  std::vector<double> v = delta;
  for (std::size_t k = 0; k < removed.size(); ++k) {
    const std::vector<double> before = v;
    subtract_projection(v, removed[k]);
    double moved = 0;
    for (std::size_t i = 0; i < v.size(); ++i) moved = std::max(moved, std::abs(v[i] - before[i]));
    if (warnings && moved > 1e-12 * input_norm) {
      warnings->push_back(k < n_translation ? "removed translation component of size " + fmt(moved)
                                            : "removed scaling component of size " + fmt(moved));
    }
  }
  auto unit = normalized(std::move(v), "reduced");
  return ClassDeformation(std::move(base), std::move(unit), true, trace_reduce);
}

std::array<double, 2> ClassDeformation::admissible_range() const {
  const auto& facets = base_.facets();
  const auto& cycle = base_.facet_cycle();
  std::vector<Facet> shifted = facets;
  for (std::size_t a = 0; a < shifted.size(); ++a) shifted[a].offset += delta_[a];
  const CycleGeometry g0 = cycle_geometry(facets, cycle);
  const CycleGeometry g1 = cycle_geometry(shifted, cycle);
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const double slope = g1.lengths[i] - g0.lengths[i];
    if (slope < 0) hi = std::min(hi, -g0.lengths[i] / slope);
    if (slope > 0) lo = std::max(lo, -g0.lengths[i] / slope);
  }
  return {lo, hi};
}

Polytope deform(const ClassDeformation& deformation, double t) {
  const auto [lo, hi] = deformation.admissible_range();
  if (!(t > lo && t < hi)) {
    const double crit = t >= hi ? hi : lo;
    throw CombinatoricsError("deformation parameter t = " + fmt(t) + " leaves the combinatorial type (critical t = " +
                                 fmt(crit) + ")",
                             crit);
  }
  std::vector<double> offsets = deformation.base().offsets();
  for (std::size_t a = 0; a < offsets.size(); ++a) offsets[a] += t * deformation.delta()[a];
  return with_offsets(deformation.base(), offsets);
}

}  // namespace toric
