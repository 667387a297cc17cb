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

#include <functional>
#include <memory>
#include <random>

#include "toric/potential.hpp"

namespace helpers {

/// Coefficients of f in an orthonormal basis, by quadrature on q.
inline Eigen::VectorXd project(const toric::PolyBasis& b, const toric::Quadrature& q,
                               const std::function<double(double, double)>& f) {
  const toric::NodeTable t = b.tabulate(q, 0);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.size()));
  double vol = 0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double w = q.w[k] * b.weight()({q.x[k], q.y[k]});
    vol += w;
    c += (w * f(q.x[k], q.y[k])) * t(0).row(static_cast<Eigen::Index>(k)).transpose();
  }
  return c / vol;
}

/// A random polynomial correction small enough to keep u_can + phi in the cone
/// at every node of q. Higher-degree coefficients are damped.
inline Eigen::VectorXd random_correction(const toric::PolyBasis& b, const toric::Polytope& p,
                                         const toric::Quadrature& q, unsigned seed, double amplitude = 0.05) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd c(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto [e1, e2] = b.seed(i);
    const double deg = e1 + e2;
    c(static_cast<Eigen::Index>(i)) = deg < 2 ? 0.0 : g(rng) / (deg * deg);
  }
  const auto basis = std::make_shared<const toric::PolyBasis>(b);
  for (double a = amplitude; a > 1e-6; a *= 0.5) {
    const Eigen::VectorXd cand = a * c;
    toric::SymplecticPotential u(p, basis, cand);
    try {
      const toric::NodeTable t = b.tabulate(q, 2);
      toric::metric_fields(u, q, &t, false);
      return cand;
    } catch (const toric::ConeExit&) {
    }
  }
  return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.size()));
}

}  // namespace helpers
