/*
 *  Copyright 2026 The plaplab Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */


#pragma once

// Nonlinear diffusivity of the regularized p-Laplacian and the face-based
// conservative divergence shared by the solver and the residual checks.

#include <algorithm>
#include <cmath>
#include <span>

#include "plaplab/grid.hpp"

namespace plaplab {

/// Gradients below this magnitude carry zero flux in the unregularized flux.
inline constexpr double kZeroGradient = 1e-14;

/// Diffusivity A(|g|^2) = (|g|^2 + eps^2)^((p-2)/2). With eps = 0 the
/// squared gradient is floored at floor^2 so that A stays finite.
struct Diffusivity {
  double p = 2.0;
  double eps = 0.0;
  double floor = 1e-8;

  double operator()(double grad_sq) const {
    if (p == 2.0) return 1.0;
    double s = grad_sq + eps * eps;
    if (eps == 0.0) s = std::max(grad_sq, floor * floor);
    return std::pow(s, 0.5 * (p - 2.0));
  }
  bool floored() const { return eps == 0.0; }
};

/// |g|^(p-2) g, zero when |g| < kZeroGradient.
inline Vec plaplace_flux(const Vec& g, double p) {
  const double m = norm(g);
  if (m < kZeroGradient) return {0.0, 0.0};
  const double c = std::pow(m, p - 2.0);
  return {c * g[0], c * g[1]};
}

/// (|g|^2 + eps^2)^((p-2)/2) g; for eps = 0 identical to plaplace_flux.
inline Vec regularized_flux(const Vec& g, double p, double eps) {
  if (eps == 0.0) return plaplace_flux(g, p);
  const double c = std::pow(norm_sq(g) + eps * eps, 0.5 * (p - 2.0));
  return {c * g[0], c * g[1]};
}

/// Gradient reconstructed on the face between node n and n + e_axis: the
/// normal component is the compact difference, tangential components average
/// the central differences of the two adjacent nodes. Both nodes must be
/// interior along every tangential axis.
inline Vec face_gradient(std::span<const double> slice, const Grid& g, const Node& n, int axis) {
  Vec out{0.0, 0.0};
  Node m = n;
  m[axis] += 1;
  out[axis] = (slice[g.spatial_index(m)] - slice[g.spatial_index(n)]) / g.h(axis);
  for (int b = 0; b < g.dim(); ++b) {
    if (b == axis) continue;
    auto cd = [&](Node k) {
      Node up = k, dn = k;
      up[b] += 1;
      dn[b] -= 1;
      return (slice[g.spatial_index(up)] - slice[g.spatial_index(dn)]) / (2.0 * g.h(b));
    };
    out[b] = 0.5 * (cd(n) + cd(m));
  }
  return out;
}

/// Face coefficients of an interior node: [axis][0] is the face toward
/// n - e_axis, [axis][1] the face toward n + e_axis.
using FaceCoefficients = std::array<std::array<double, 2>, 2>;

inline FaceCoefficients face_coefficients(std::span<const double> slice, const Grid& g,
                                          const Node& n, const Diffusivity& A) {
  FaceCoefficients c{{{0.0, 0.0}, {0.0, 0.0}}};
  for (int a = 0; a < g.dim(); ++a) {
    Node w = n;
    w[a] -= 1;
    c[a][0] = A(norm_sq(face_gradient(slice, g, w, a)));
    c[a][1] = A(norm_sq(face_gradient(slice, g, n, a)));
  }
  return c;
}

/// Conservative divergence of the regularized flux at an interior node,
/// using the same face reconstruction as the implicit solver.
inline double discrete_divergence(std::span<const double> slice, const Grid& g, const Node& n,
                                  const Diffusivity& A) {
  const auto c = face_coefficients(slice, g, n, A);
  const double un = slice[g.spatial_index(n)];
  double div = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    Node e = n, w = n;
    e[a] += 1;
    w[a] -= 1;
    const double h2 = g.h(a) * g.h(a);
    div += (c[a][1] * (slice[g.spatial_index(e)] - un) - c[a][0] * (un - slice[g.spatial_index(w)])) /
           h2;
  }
  return div;
}

/// Conservative divergence of the regularized flux (unfloored; zero flux
/// across faces with vanishing gradient when eps = 0).
inline double flux_divergence(std::span<const double> slice, const Grid& g, const Node& n,
                              double p, double eps) {
  double div = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    Node w = n;
    w[a] -= 1;
    const double east = regularized_flux(face_gradient(slice, g, n, a), p, eps)[a];
    const double west = regularized_flux(face_gradient(slice, g, w, a), p, eps)[a];
    div += (east - west) / g.h(a);
  }
  return div;
}

}  // namespace plaplab
