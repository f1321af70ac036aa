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

// Backward Euler with lagged-diffusivity (Picard) iteration for
//   u_t = div((|grad u|^2 + eps^2)^((p-2)/2) grad u) + f
// with Dirichlet data on the parabolic boundary.

#include <chrono>
#include <cmath>
#include <concepts>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "plaplab/exact_solutions.hpp"
#include "plaplab/flux.hpp"
#include "plaplab/grid.hpp"

namespace plaplab {

struct SolverParams {
  double p = 2.0;
  double eps = 0.0;
  double picard_tol = 1e-10;
  int picard_max_iters = 200;
  double linear_tol = 1e-12;
  /// Replaces |grad u| from below when eps == 0.
  double floor = 1e-8;
  /// Optional source term f(x, t); zero when empty.
  std::function<double(const Point&, double)> source;

  void validate() const {
    require(p > 1.0 && p <= 2.0, ErrorKind::invalid_parameter, "solver needs 1 < p <= 2");
    require(eps >= 0.0, ErrorKind::invalid_parameter, "eps must be nonnegative");
    require(picard_tol > 0.0 && linear_tol > 0.0, ErrorKind::invalid_parameter,
            "tolerances must be positive");
    require(picard_max_iters > 0, ErrorKind::invalid_parameter, "picard_max_iters must be positive");
    require(eps > 0.0 || floor > 0.0, ErrorKind::invalid_parameter,
            "eps = 0 requires a positive diffusivity floor");
  }

  Diffusivity diffusivity() const { return Diffusivity{p, eps, floor}; }
  bool floored() const { return eps == 0.0; }
};

/// Dirichlet data on the lateral boundary and on the initial slice.
struct BoundaryData {
  std::function<double(const Point&, double)> lateral;
  std::function<double(const Point&)> initial;

  static BoundaryData from(std::function<double(const Point&, double)> g, double t_lo) {
    BoundaryData b;
    b.lateral = g;
    b.initial = [g, t_lo](const Point& x) { return g(x, t_lo); };
    return b;
  }
  static BoundaryData trace(const AnalyticSolution& sol, double t_lo) {
    return from([sol](const Point& x, double t) { return sol.value(x, t); }, t_lo);
  }

  /// Finite on the parabolic boundary and consistent at the corners.
  void validate(const Grid& g) const {
    require(static_cast<bool>(lateral) && static_cast<bool>(initial),
            ErrorKind::invalid_parameter, "boundary data needs lateral and initial evaluators");
    const double t0 = g.time().lo;
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
      const Node n = g.node_of(s);
      const Point x = g.point(n);
      const double u0 = initial(x);
      require(std::isfinite(u0), ErrorKind::invalid_parameter, "initial data not finite");
      if (!g.on_lateral_boundary(n)) continue;
      for (int l = 0; l < g.levels(); ++l)
        require(std::isfinite(lateral(x, g.t(l))), ErrorKind::invalid_parameter,
                "lateral data not finite");
      require(std::abs(lateral(x, t0) - u0) <= 1e-9, ErrorKind::invalid_parameter,
              "initial and lateral data disagree at a corner");
    }
  }
};

struct SolveLog {
  std::vector<int> picard_iterations;
  std::vector<double> final_updates;
  std::vector<int> linear_iterations;
  double wall_seconds = 0.0;
  bool failed = false;
  int failed_step = -1;
  bool floored = false;

  int total_picard() const {
    int s = 0;
    for (int k : picard_iterations) s += k;
    return s;
  }
};

/// Raised when a step does not converge; carries the partial log.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, SolveLog log)
      : Error(ErrorKind::solver_failure, what), log_(std::move(log)) {}
  const SolveLog& log() const { return log_; }

 private:
  SolveLog log_;
};

struct SolveResult {
  SpaceTimeField field;
  SolveLog log;
};

namespace detail {

/// Thomas algorithm for a symmetric tridiagonal system; false on a
/// nonpositive pivot.
inline bool solve_tridiagonal(std::vector<double> diag, const std::vector<double>& off,
                              std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (!(diag[i - 1] > 0.0)) return false;
    const double w = off[i - 1] / diag[i - 1];
    diag[i] -= w * off[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  if (!(diag[n - 1] > 0.0)) return false;
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
  return true;
}

struct LinearStats {
  int iterations = 0;
  bool ok = true;
};

}  // namespace detail

/// One frozen-coefficient solve (I - tau div(A grad .)) u = u_old + tau f.
/// `boundary_slice` supplies the lateral values at the new level; `iterate`
/// freezes A and seeds the iterative solver. Returns the new spatial slice.
inline std::vector<double> picard_step(const Grid& g, const SolverParams& params,
                                       std::span<const double> iterate,
                                       std::span<const double> previous_level,
                                       std::span<const double> boundary_slice, double t_new,
                                       detail::LinearStats* stats = nullptr) {
  require(iterate.size() == g.spatial_size() && previous_level.size() == g.spatial_size() &&
              boundary_slice.size() == g.spatial_size(),
          ErrorKind::shape_mismatch, "slice sizes do not match the grid");
  const Diffusivity A = params.diffusivity();
  const double tau = g.tau();
  std::vector<double> out(boundary_slice.begin(), boundary_slice.end());
  detail::LinearStats local;

  auto source = [&](const Node& n) {
    return params.source ? params.source(g.point(n), t_new) : 0.0;
  };

  if (g.dim() == 1) {
    const int N = g.axis(0).cells;
    const std::size_t m = static_cast<std::size_t>(N - 1);
    std::vector<double> diag(m), off(m > 0 ? m - 1 : 0), rhs(m);
    const double r = tau / (g.h(0) * g.h(0));
    for (int i = 1; i < N; ++i) {
      const Node n{i, 0};
      const auto c = face_coefficients(iterate, g, n, A);
      if (!(c[0][0] > 0.0 && c[0][1] > 0.0))
        throw Error(ErrorKind::solver_failure, "nonpositive diffusivity: coefficient bug");
      const std::size_t k = static_cast<std::size_t>(i - 1);
      diag[k] = 1.0 + r * (c[0][0] + c[0][1]);
      rhs[k] = previous_level[static_cast<std::size_t>(i)] + tau * source(n);
      if (i == 1) rhs[k] += r * c[0][0] * boundary_slice[0];
      if (i == N - 1) rhs[k] += r * c[0][1] * boundary_slice[static_cast<std::size_t>(N)];
      if (i < N - 1) off[k] = -r * c[0][1];
    }
    if (!detail::solve_tridiagonal(std::move(diag), off, rhs))
      throw Error(ErrorKind::solver_failure, "tridiagonal elimination broke down");
    for (int i = 1; i < N; ++i) out[static_cast<std::size_t>(i)] = rhs[static_cast<std::size_t>(i - 1)];
    local.iterations = 1;
    if (stats) *stats = local;
    return out;
  }

  // Two dimensions: Jacobi-preconditioned conjugate gradient on the
  // interior unknowns; boundary neighbours enter the right-hand side.
  const int N0 = g.axis(0).cells, N1 = g.axis(1).cells;
  const std::size_t nx = static_cast<std::size_t>(N0 - 1), ny = static_cast<std::size_t>(N1 - 1);
  const std::size_t m = nx * ny;
  auto unknown = [&](int i, int j) {
    return static_cast<std::size_t>(i - 1) * ny + static_cast<std::size_t>(j - 1);
  };
  const double r0 = tau / (g.h(0) * g.h(0)), r1 = tau / (g.h(1) * g.h(1));
  // Per-unknown coefficients: west, east, south, north.
  std::vector<std::array<double, 4>> coef(m);
  std::vector<double> diag(m), b(m), x(m);
  for (int i = 1; i < N0; ++i)
    for (int j = 1; j < N1; ++j) {
      const Node n{i, j};
      const auto c = face_coefficients(iterate, g, n, A);
      for (const auto& ax : c)
        for (double v : ax)
          if (!(v > 0.0)) throw Error(ErrorKind::solver_failure, "nonpositive diffusivity: coefficient bug");
      const std::size_t k = unknown(i, j);
      coef[k] = {r0 * c[0][0], r0 * c[0][1], r1 * c[1][0], r1 * c[1][1]};
      diag[k] = 1.0 + coef[k][0] + coef[k][1] + coef[k][2] + coef[k][3];
      double rhs = previous_level[g.spatial_index(n)] + tau * source(n);
      if (i == 1) rhs += coef[k][0] * boundary_slice[g.spatial_index({0, j})];
      if (i == N0 - 1) rhs += coef[k][1] * boundary_slice[g.spatial_index({N0, j})];
      if (j == 1) rhs += coef[k][2] * boundary_slice[g.spatial_index({i, 0})];
      if (j == N1 - 1) rhs += coef[k][3] * boundary_slice[g.spatial_index({i, N1})];
      b[k] = rhs;
      x[k] = iterate[g.spatial_index(n)];
    }

  auto apply = [&](const std::vector<double>& v, std::vector<double>& y) {
    for (int i = 1; i < N0; ++i)
      for (int j = 1; j < N1; ++j) {
        const std::size_t k = unknown(i, j);
        double s = diag[k] * v[k];
        if (i > 1) s -= coef[k][0] * v[unknown(i - 1, j)];
        if (i < N0 - 1) s -= coef[k][1] * v[unknown(i + 1, j)];
        if (j > 1) s -= coef[k][2] * v[unknown(i, j - 1)];
        if (j < N1 - 1) s -= coef[k][3] * v[unknown(i, j + 1)];
        y[k] = s;
      }
  };
  auto dotv = [](const std::vector<double>& a, const std::vector<double>& c) {
    std::vector<double> t(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) t[i] = a[i] * c[i];
    return pairwise_sum(t);
  };

  std::vector<double> r(m), z(m), d(m), q(m);
  apply(x, q);
  for (std::size_t k = 0; k < m; ++k) r[k] = b[k] - q[k];
  const double bnorm = std::sqrt(dotv(b, b));
  const double target = params.linear_tol * (bnorm > 0.0 ? bnorm : 1.0);
  for (std::size_t k = 0; k < m; ++k) z[k] = r[k] / diag[k];
  d = z;
  double rz = dotv(r, z);
  const int max_it = static_cast<int>(10 * m) + 100;
  int it = 0;
  double rnorm = std::sqrt(dotv(r, r));
  while (rnorm > target && it < max_it) {
    apply(d, q);
    const double dq = dotv(d, q);
    if (!(dq > 0.0)) throw Error(ErrorKind::solver_failure, "conjugate gradient lost positivity");
    const double alpha = rz / dq;
    for (std::size_t k = 0; k < m; ++k) {
      x[k] += alpha * d[k];
      r[k] -= alpha * q[k];
    }
    for (std::size_t k = 0; k < m; ++k) z[k] = r[k] / diag[k];
    const double rz_new = dotv(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < m; ++k) d[k] = z[k] + beta * d[k];
    rnorm = std::sqrt(dotv(r, r));
    ++it;
  }
  if (rnorm > target) {
    // Round-off floor: accept if the recomputed residual is within 100x.
    apply(x, q);
    double true_r = 0.0;
    for (std::size_t k = 0; k < m; ++k) true_r += (b[k] - q[k]) * (b[k] - q[k]);
    if (std::sqrt(true_r) > 100.0 * target)
      throw Error(ErrorKind::solver_failure, "conjugate gradient did not reach linear_tol");
  }
  for (int i = 1; i < N0; ++i)
    for (int j = 1; j < N1; ++j) out[g.spatial_index({i, j})] = x[unknown(i, j)];
  local.iterations = it;
  if (stats) *stats = local;
  return out;
}

/// Regularized solve on the whole cylinder. Boundary nodes carry the data
/// exactly at every level.
inline SolveResult solve_regularized(const Grid& g, const SolverParams& params,
                                     const BoundaryData& boundary) {
  params.validate();
  boundary.validate(g);
  const auto start = std::chrono::steady_clock::now();

  SolveResult res{SpaceTimeField(g), SolveLog{}};
  res.log.floored = params.floored();
  SpaceTimeField& u = res.field;

  for (std::size_t s = 0; s < g.spatial_size(); ++s)
    u.values[s] = boundary.initial(g.point(g.node_of(s)));

  std::vector<double> bslice(g.spatial_size());
  for (int l = 1; l < g.levels(); ++l) {
    const double t = g.t(l);
    const auto prev = u.slice(l - 1);
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
      const Node n = g.node_of(s);
      bslice[s] = g.on_lateral_boundary(n) ? boundary.lateral(g.point(n), t) : prev[s];
    }
    std::vector<double> iterate(bslice);
    double update = 0.0;
    int iters = 0;
    int lin = 0;
    bool converged = false;
    while (iters < params.picard_max_iters) {
      detail::LinearStats st;
      std::vector<double> next = picard_step(g, params, iterate, prev, bslice, t, &st);
      lin += st.iterations;
      ++iters;
      double diff = 0.0, mag = 0.0;
      for (std::size_t s = 0; s < next.size(); ++s) {
        diff = std::max(diff, std::abs(next[s] - iterate[s]));
        mag = std::max(mag, std::abs(next[s]));
      }
      update = mag > 0.0 ? diff / mag : diff;
      iterate = std::move(next);
      if (!std::isfinite(update)) break;
      if (update <= params.picard_tol) {
        converged = true;
        break;
      }
    }
    res.log.picard_iterations.push_back(iters);
    res.log.final_updates.push_back(update);
    res.log.linear_iterations.push_back(lin);
    if (!converged) {
      res.log.failed = true;
      res.log.failed_step = l;
      res.log.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::ostringstream os;
      os << "Picard iteration did not converge at step " << l << " (relative update " << update
         << " after " << iters << " iterations)";
      throw SolverError(os.str(), res.log);
    }
    std::copy(iterate.begin(), iterate.end(), u.slice(l).begin());
  }
  res.log.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

/// Smooth test function with evaluable value, spatial gradient and time
/// derivative.
template <class Phi>
concept TestFunction = requires(const Phi& f, const Point& x, double t) {
  { f.value(x, t) } -> std::convertible_to<double>;
  { f.gradient(x, t) } -> std::convertible_to<Vec>;
  { f.time_derivative(x, t) } -> std::convertible_to<double>;
};

/// integral u phi_t - integral A <grad u, grad phi> over the cylinder, with
/// A = (|grad u|^2 + eps^2)^((p-2)/2). Vanishes up to discretization error
/// for solutions. phi must vanish on the parabolic boundary and at t_hi.
template <TestFunction Phi>
double weak_form_residual(const SpaceTimeField& field, const Phi& phi, double p, double eps) {
  const Grid& g = field.grid;
  const int last = g.levels() - 1;
  for (int l = 0; l <= last; ++l)
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
      const Node n = g.node_of(s);
      const bool edge = l == 0 || l == last || !g.interior(n, 1);
      if (!edge) continue;
      const Point x = g.point(n);
      const double t = g.t(l);
      if (std::abs(phi.value(x, t)) > 1e-14 || norm(phi.gradient(x, t)) > 1e-14)
        throw Error(ErrorKind::invalid_test_function,
                    "test function does not vanish on the parabolic boundary and at t_hi");
    }
  const auto grad = gradient_field(field);
  const Region all = full_region(g);
  return integrate(g, all, [&](int l, const Node& n) {
    const Point x = g.point(n);
    const double t = g.t(l);
    const Vec gp = phi.gradient(x, t);
    const double dt = phi.time_derivative(x, t);
    if (gp[0] == 0.0 && gp[1] == 0.0 && dt == 0.0) return 0.0;
    const Vec F = regularized_flux(grad[g.index(l, n)], p, eps);
    return field(l, n) * dt - dot(F, gp);
  });
}

}  // namespace plaplab
