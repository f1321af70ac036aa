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

// Closed-form reference solutions. Every nontrivial solution is checked by
// substitution into the equation before it is handed out.

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "plaplab/flux.hpp"
#include "plaplab/grid.hpp"

namespace plaplab {

struct ValidityDomain {
  /// Points with |x| < exclude_radius are outside the domain.
  double exclude_radius = 0.0;
  /// Times t <= t_min are outside the domain.
  double t_min = -std::numeric_limits<double>::infinity();

  bool contains(const Point& x, double t) const {
    return t > t_min && std::hypot(x[0], x[1]) >= exclude_radius;
  }
};

struct AnalyticSolution {
  std::string name;
  int dim = 1;
  std::function<double(const Point&, double)> value;
  std::function<Vec(const Point&, double)> gradient;
  std::function<double(const Point&, double)> time_derivative;
  ValidityDomain domain;
  bool nonnegative = false;

  double operator()(const Point& x, double t) const { return value(x, t); }
};

namespace detail {

/// Fourth-order central difference of a scalar function of one variable.
template <class F>
double diff4(F&& f, double x, double h) {
  return (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h);
}

}  // namespace detail

/// Strong-form residual u_t - div((|grad u|^2 + eps^2)^((p-2)/2) grad u) of an
/// analytic solution at one point, by fourth-order differences of u in time
/// and of the analytic flux in space.
inline double substitution_residual(const AnalyticSolution& sol, const Point& x, double t,
                                    double p, double eps, double step = 1e-3) {
  const double ut = detail::diff4([&](double s) { return sol.value(x, s); }, t, step);
  double div = 0.0;
  for (int a = 0; a < sol.dim; ++a) {
    div += detail::diff4(
        [&](double s) {
          Point y = x;
          y[a] = s;
          // No zero-gradient cutoff here: near a critical point of a
          // fast-diffusion profile the gradient is tiny but the flux is not.
          const Vec g = sol.gradient(y, t);
          const double s2 = norm_sq(g) + eps * eps;
          return s2 > 0.0 ? std::pow(s2, 0.5 * (p - 2.0)) * g[a] : 0.0;
        },
        x[a], step);
  }
  return ut - div;
}

/// Largest mismatch between the declared derivatives and differences of u.
inline double derivative_consistency(const AnalyticSolution& sol, const Point& x, double t,
                                     double step = 1e-3) {
  double worst = std::abs(sol.time_derivative(x, t) -
                          detail::diff4([&](double s) { return sol.value(x, s); }, t, step));
  const Vec g = sol.gradient(x, t);
  for (int a = 0; a < sol.dim; ++a) {
    const double fd = detail::diff4(
        [&](double s) {
          Point y = x;
          y[a] = s;
          return sol.value(y, t);
        },
        x[a], step);
    worst = std::max(worst, std::abs(g[a] - fd));
  }
  return worst;
}

/// Runs the substitution gate over the given sample points.
inline void self_verify(const AnalyticSolution& sol, std::span<const Point> points,
                        std::span<const double> times, double p, double tol = 1e-6,
                        double step = 1e-3) {
  for (const Point& x : points)
    for (double t : times) {
      if (!sol.domain.contains(x, t)) continue;
      const double r = substitution_residual(sol, x, t, p, 0.0, step);
      const double c = derivative_consistency(sol, x, t, step);
      const double scale = std::max(1.0, std::abs(sol.time_derivative(x, t)));
      if (!(std::abs(r) <= tol * scale) || !(c <= tol * scale)) {
        std::ostringstream os;
        os << sol.name << " failed substitution at x=(" << x[0] << "," << x[1] << "), t=" << t
           << ": residual " << r << ", derivative mismatch " << c;
        throw Error(ErrorKind::oracle_verification, os.str());
      }
    }
}

/// u(x, t) = <a, x> + b. Solves the equation for every p and every eps.
inline AnalyticSolution linear_solution(std::span<const double> slope, double offset) {
  require(slope.size() == 1 || slope.size() == 2, ErrorKind::invalid_parameter,
          "slope must have 1 or 2 components");
  const Vec a{slope[0], slope.size() == 2 ? slope[1] : 0.0};
  AnalyticSolution s;
  s.name = "linear";
  s.dim = static_cast<int>(slope.size());
  s.value = [a, offset](const Point& x, double) { return a[0] * x[0] + a[1] * x[1] + offset; };
  s.gradient = [a](const Point&, double) { return a; };
  s.time_derivative = [](const Point&, double) { return 0.0; };
  s.nonnegative = false;
  return s;
}

inline AnalyticSolution constant_solution(int dim, double c) {
  const std::vector<double> zero(static_cast<std::size_t>(dim), 0.0);
  auto s = linear_solution(zero, c);
  s.name = "constant";
  s.nonnegative = c >= 0.0;
  return s;
}

/// Barenblatt profile of the fast diffusion p-Laplace flow, 1 < p < 2:
///   u = s^(-n/lambda) [C + k (|x| s^(-1/lambda))^(p/(p-1))]^((p-1)/(p-2)),
///   s = t + t0, lambda = n(p-2) + p, k = ((2-p)/p) lambda^(1/(1-p)).
inline AnalyticSolution barenblatt_fast_diffusion(double p, int n, double mass_c, double t0) {
  require(p > 1.0 && p < 2.0, ErrorKind::invalid_parameter, "Barenblatt profile needs 1 < p < 2");
  require(n == 1 || n == 2, ErrorKind::invalid_parameter, "dimension must be 1 or 2");
  require(mass_c > 0.0, ErrorKind::invalid_parameter, "mass parameter must be positive");
  require(t0 > 0.0, ErrorKind::invalid_parameter, "time shift must be positive");
  const double lambda = n * (p - 2.0) + p;
  require(lambda > 0.0, ErrorKind::invalid_parameter,
          "n(p-2)+p must be positive for the Barenblatt profile");

  const double k = ((2.0 - p) / p) * std::pow(lambda, 1.0 / (1.0 - p));
  const double m = p / (p - 1.0);
  const double e = (p - 1.0) / (p - 2.0);
  const double dn = static_cast<double>(n);

  auto radius = [](const Point& x) { return std::hypot(x[0], x[1]); };
  auto base = [=](double r, double s) {
    const double xi = r * std::pow(s, -1.0 / lambda);
    return mass_c + k * std::pow(xi, m);
  };

  AnalyticSolution sol;
  std::ostringstream nm;
  nm << "barenblatt(p=" << p << ",n=" << n << ",C=" << mass_c << ",t0=" << t0 << ")";
  sol.name = nm.str();
  sol.dim = n;
  sol.nonnegative = true;
  sol.domain.t_min = -t0;
  sol.value = [=](const Point& x, double t) {
    const double s = t + t0;
    return std::pow(s, -dn / lambda) * std::pow(base(radius(x), s), e);
  };
  sol.gradient = [=](const Point& x, double t) -> Vec {
    const double s = t + t0;
    const double r = radius(x);
    if (r == 0.0) return {0.0, 0.0};
    const double sc = std::pow(s, -1.0 / lambda);
    const double xi = r * sc;
    const double B = mass_c + k * std::pow(xi, m);
    // du/dr = s^(-n/lambda) e B^(e-1) k m xi^(m-1) s^(-1/lambda)
    const double dudr =
        std::pow(s, -dn / lambda) * e * std::pow(B, e - 1.0) * k * m * std::pow(xi, m - 1.0) * sc;
    return {dudr * x[0] / r, dudr * x[1] / r};
  };
  sol.time_derivative = [=](const Point& x, double t) {
    const double s = t + t0;
    const double r = radius(x);
    const double xi = r * std::pow(s, -1.0 / lambda);
    const double xim = std::pow(xi, m);
    const double B = mass_c + k * xim;
    const double u = std::pow(s, -dn / lambda) * std::pow(B, e);
    // d/ds log u = -n/(lambda s) - e k m xi^m / (lambda s B)
    return u * (-dn / (lambda * s) - e * k * m * xim / (lambda * s * B));
  };

  // The profile contains |x|^(p/(p-1)), which is only C^2 at the origin for
  // p > 3/2; difference stencils centred there lose their order, so the
  // sample stays off x = 0.
  std::vector<Point> pts;
  for (double a : {-3.0, -1.5, -0.7, 0.05, 0.3, 0.7, 2.2})
    pts.push_back(n == 1 ? Point{a, 0.0} : Point{a, 0.5 * a - 0.4});
  const std::vector<double> times{0.0, 0.5, 1.0};
  // Small C gives a sharp core of width (C/k)^(1/m) t0^(1/lambda); the
  // stencil step follows it.
  const double core = std::pow(mass_c / k, 1.0 / m) * std::pow(t0, 1.0 / lambda);
  self_verify(sol, pts, times, p, 1e-6, 1e-3 * std::min(1.0, core));
  return sol;
}

/// Stationary radial solution |x|^((p-2)/(p-1)) in two dimensions, valid
/// outside the ball of radius `exclude_radius`.
inline AnalyticSolution radial_p_harmonic(double p, double exclude_radius) {
  require(p > 1.0 && p <= 2.0, ErrorKind::invalid_parameter, "need 1 < p <= 2");
  require(exclude_radius > 0.0, ErrorKind::invalid_domain,
          "the validity domain must exclude a ball around the origin");
  const double k = (p - 2.0) / (p - 1.0);
  AnalyticSolution sol;
  sol.name = "radial_p_harmonic";
  sol.dim = 2;
  sol.nonnegative = true;
  sol.domain.exclude_radius = exclude_radius;
  sol.value = [k](const Point& x, double) { return std::pow(std::hypot(x[0], x[1]), k); };
  sol.gradient = [k](const Point& x, double) -> Vec {
    const double r = std::hypot(x[0], x[1]);
    const double c = k * std::pow(r, k - 2.0);
    return {c * x[0], c * x[1]};
  };
  sol.time_derivative = [](const Point&, double) { return 0.0; };

  std::vector<Point> pts;
  for (int i = 0; i < 8; ++i) {
    const double phi = 0.785398163397448 * i + 0.1;
    for (double r : {1.0, 1.5})
      if (r >= exclude_radius) pts.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  const std::vector<double> times{0.0};
  self_verify(sol, pts, times, p);
  return sol;
}

/// Rejects grids that reach outside the validity domain of a solution.
inline void require_valid_on(const AnalyticSolution& sol, const Grid& g) {
  require(sol.dim == g.dim(), ErrorKind::invalid_domain, "solution and grid dimension differ");
  require(g.time().lo > sol.domain.t_min, ErrorKind::invalid_domain,
          "grid starts before the solution exists");
  if (sol.domain.exclude_radius > 0.0) {
    // Closest point of the spatial box to the origin.
    double d2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double c = std::clamp(0.0, g.axis(a).lo, g.axis(a).hi);
      d2 += c * c;
    }
    require(std::sqrt(d2) >= sol.domain.exclude_radius, ErrorKind::invalid_domain,
            "grid covers the excluded neighbourhood of the origin");
  }
}

inline SpaceTimeField sample(const Grid& g, const AnalyticSolution& sol) {
  require_valid_on(sol, g);
  return sample(g, [&](const Point& x, double t) { return sol.value(x, t); });
}

/// Nodal substitution residual of an analytic solution on every grid node.
inline SpaceTimeField pde_residual(const AnalyticSolution& sol, const Grid& g, double p,
                                   double eps) {
  require_valid_on(sol, g);
  return sample(g, [&](const Point& x, double t) {
    return substitution_residual(sol, x, t, p, eps, 1e-3);
  });
}

/// Nodal residual u_t - div(flux) of a discrete field: centered time
/// difference and the conservative face-flux divergence; lateral boundary
/// nodes carry 0.
inline SpaceTimeField pde_residual(const SpaceTimeField& field, double p, double eps) {
  const Grid& g = field.grid;
  const SpaceTimeField ut = time_derivative_field(field);
  SpaceTimeField out(g);
  for (int l = 0; l < g.levels(); ++l) {
    const auto slice = field.slice(l);
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
      const Node n = g.node_of(s);
      if (!g.interior(n, 1)) continue;
      out(l, n) = ut(l, n) - flux_divergence(slice, g, n, p, eps);
    }
  }
  return out;
}

}  // namespace plaplab
