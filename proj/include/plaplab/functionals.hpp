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

// Integral quantities of the regularized flow: the energy-type functionals
// J, W, M, O of the convergence argument, the seven terms of the
// differentiated-equation identity, and the weighted Hessian and time
// derivative integrals used by the a-priori estimates.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "plaplab/flux.hpp"
#include "plaplab/grid.hpp"

namespace plaplab {

// ---------------------------------------------------------------------------
// Cutoff

/// Quintic smoothstep S(s) = 6s^5 - 15s^4 + 10s^3 and its derivative.
inline double smoothstep(double s) { return s * s * s * (s * (6.0 * s - 15.0) + 10.0); }
inline double smoothstep_slope(double s) { return 30.0 * s * s * (1.0 - s) * (1.0 - s); }

/// One-dimensional plateau [lo, hi] with smoothstep ramps of the given width
/// on both sides. A zero width means the factor is identically 1.
struct Ramp {
  double lo = 0.0;
  double hi = 0.0;
  double width = 0.0;

  bool unbounded() const { return width == 0.0; }
  double support_lo() const { return lo - width; }
  double support_hi() const { return hi + width; }

  double value(double x) const {
    if (unbounded()) return 1.0;
    if (x <= lo - width || x >= hi + width) return 0.0;
    if (x < lo) return smoothstep((x - (lo - width)) / width);
    if (x > hi) return smoothstep(((hi + width) - x) / width);
    return 1.0;
  }
  double slope(double x) const {
    if (unbounded()) return 0.0;
    if (x <= lo - width || x >= hi + width) return 0.0;
    if (x < lo) return smoothstep_slope((x - (lo - width)) / width) / width;
    if (x > hi) return -smoothstep_slope(((hi + width) - x) / width) / width;
    return 0.0;
  }
};

struct CutoffSpec {
  std::array<std::array<double, 2>, 2> plateau{};  // per spatial axis [lo, hi]
  std::array<double, 2> ramp{0.0, 0.0};            // per spatial axis
  std::array<double, 2> time_plateau{0.0, 0.0};
  double time_ramp = 0.0;  // 0: time-independent cutoff
};

/// Tensor product of smoothstep ramps; values in [0, 1], plateau exactly 1.
class Cutoff {
 public:
  Cutoff() = default;
  Cutoff(int dim, std::array<Ramp, 2> space, Ramp time) : dim_(dim), space_(space), time_(time) {}

  int dim() const { return dim_; }
  const Ramp& axis(int a) const { return space_[a]; }
  const Ramp& time() const { return time_; }
  bool time_compact() const { return !time_.unbounded(); }

  double spatial(const Point& x) const {
    double z = 1.0;
    for (int a = 0; a < dim_; ++a) z *= space_[a].value(x[a]);
    return z;
  }
  Vec spatial_gradient(const Point& x) const {
    Vec g{0.0, 0.0};
    for (int a = 0; a < dim_; ++a) {
      double c = space_[a].slope(x[a]);
      for (int b = 0; b < dim_; ++b)
        if (b != a) c *= space_[b].value(x[b]);
      g[a] = c;
    }
    return g;
  }

  double value(const Point& x, double t) const { return spatial(x) * time_.value(t); }
  Vec gradient(const Point& x, double t) const {
    const Vec g = spatial_gradient(x);
    const double tv = time_.value(t);
    return {g[0] * tv, g[1] * tv};
  }
  double time_derivative(const Point& x, double t) const { return spatial(x) * time_.slope(t); }
  /// grad(zeta zeta_t) = 2 Z grad Z T T' for zeta = Z(x) T(t).
  Vec gradient_of_zeta_zeta_t(const Point& x, double t) const {
    const double z = spatial(x);
    const Vec gz = spatial_gradient(x);
    const double c = 2.0 * z * time_.value(t) * time_.slope(t);
    return {c * gz[0], c * gz[1]};
  }

  bool in_support(const Point& x, double t) const {
    for (int a = 0; a < dim_; ++a)
      if (x[a] <= space_[a].support_lo() || x[a] >= space_[a].support_hi()) return false;
    if (!time_.unbounded() && (t <= time_.support_lo() || t >= time_.support_hi())) return false;
    return true;
  }

 private:
  int dim_ = 1;
  std::array<Ramp, 2> space_{};
  Ramp time_{};
};

/// Builds the cutoff; the support (plateau plus ramps) must lie strictly
/// inside the cylinder.
inline Cutoff make_cutoff(const Grid& g, const CutoffSpec& spec) {
  std::array<Ramp, 2> space{};
  for (int a = 0; a < g.dim(); ++a) {
    const Ramp r{spec.plateau[a][0], spec.plateau[a][1], spec.ramp[a]};
    require(r.width > 0.0, ErrorKind::invalid_support, "spatial ramp width must be positive");
    require(r.lo <= r.hi, ErrorKind::invalid_support, "empty plateau");
    require(r.support_lo() > g.axis(a).lo && r.support_hi() < g.axis(a).hi,
            ErrorKind::invalid_support, "cutoff support touches the lateral boundary");
    space[a] = r;
  }
  const Ramp tr{spec.time_plateau[0], spec.time_plateau[1], spec.time_ramp};
  require(tr.width >= 0.0, ErrorKind::invalid_support, "time ramp width must be nonnegative");
  if (!tr.unbounded()) {
    require(tr.lo <= tr.hi, ErrorKind::invalid_support, "empty time plateau");
    require(tr.support_lo() > g.time().lo && tr.support_hi() < g.time().hi,
            ErrorKind::invalid_support, "cutoff support touches the initial or final time");
  }
  return Cutoff(g.dim(), space, tr);
}

// ---------------------------------------------------------------------------
// Estimate parameters

struct EstimateParams {
  double alpha = -0.25;  // exponent of V in the test function, 1-p < 2 alpha < 0
  double theta = 2.0;    // weight exponent
  double sigma = 0.1;    // Young absorption parameter
  double kappa = 0.05;   // energy-lemma absorption parameter
  double delta = 0.1;    // gradient splitting threshold

  static double conjugate(double p) { return p / (p - 1.0); }

  /// alpha = (p-2)/2, sigma = (p-1+2 alpha)/2.
  static EstimateParams defaults(double p) {
    EstimateParams e;
    e.alpha = 0.5 * (p - 2.0);
    e.theta = 2.0;
    e.sigma = 0.5 * (p - 1.0 + 2.0 * e.alpha);
    return e;
  }
  /// Small-p regime: 2 alpha = (theta - 1)(p - 2).
  static EstimateParams for_theta(double p, double theta) {
    EstimateParams e;
    e.theta = theta;
    e.alpha = 0.5 * (theta - 1.0) * (p - 2.0);
    e.sigma = 0.5 * (p - 1.0 + 2.0 * e.alpha);
    return e;
  }
};

/// p - 1 + 2 alpha > 0 and 1 - p < 2 alpha < 0.
inline void require_alpha_restriction(double p, double alpha) {
  require(2.0 * alpha < 0.0 && 2.0 * alpha > 1.0 - p, ErrorKind::invalid_parameter,
          "alpha must satisfy 1 - p < 2 alpha < 0");
}

// ---------------------------------------------------------------------------
// Local derivatives

/// Difference-stencil quantities at one node; needs a two-cell margin.
struct LocalJet {
  double u = 0.0;
  Vec grad{0.0, 0.0};
  double v = 0.0;          // |grad u|^2
  double V = 0.0;          // v + eps^2
  Vec grad_v{0.0, 0.0};    // central differences of the nodal v field
  double hess_sq = 0.0;    // |D^2 u|^2
  std::array<double, 3> hess{0.0, 0.0, 0.0};
};

inline LocalJet local_jet(const SpaceTimeField& f, int level, const Node& n, double eps) {
  const Grid& g = f.grid;
  const auto slice = f.slice(level);
  LocalJet j;
  j.u = slice[g.spatial_index(n)];
  j.grad = detail::central_gradient(slice, g, n);
  j.v = norm_sq(j.grad);
  j.V = j.v + eps * eps;
  for (int a = 0; a < g.dim(); ++a) {
    Node up = n, dn = n;
    up[a] += 1;
    dn[a] -= 1;
    const double vu = norm_sq(detail::central_gradient(slice, g, up));
    const double vd = norm_sq(detail::central_gradient(slice, g, dn));
    j.grad_v[a] = (vu - vd) / (2.0 * g.h(a));
  }
  j.hess = detail::central_hessian(slice, g, n);
  j.hess_sq = detail::frobenius_sq(j.hess);
  return j;
}

/// Values of the cutoff and its derivatives at a node.
struct CutoffSample {
  double z = 0.0;
  Vec grad{0.0, 0.0};
  double zt = 0.0;
  Vec grad_zzt{0.0, 0.0};
};

/// Support of the cutoff must keep a two-cell distance from the lateral sides.
inline void require_cutoff_fits(const Grid& g, const Cutoff& c) {
  require(c.dim() == g.dim(), ErrorKind::invalid_support, "cutoff and grid dimension differ");
  for (int a = 0; a < g.dim(); ++a) {
    const double margin = 2.0 * g.h(a) * (1.0 - 1e-12);
    require(c.axis(a).support_lo() >= g.axis(a).lo + margin &&
                c.axis(a).support_hi() <= g.axis(a).hi - margin,
            ErrorKind::invalid_support, "cutoff support needs a two-cell margin for the stencils");
  }
  if (c.time_compact())
    require(c.time().support_lo() >= g.time().lo && c.time().support_hi() <= g.time().hi,
            ErrorKind::invalid_support, "cutoff time support leaves the grid");
}

/// Region enclosing the cutoff support with one zero node on every side.
inline Region cutoff_region(const Grid& g, const Cutoff& c) {
  require_cutoff_fits(g, c);
  std::array<std::array<double, 2>, 2> box{};
  for (int a = 0; a < g.dim(); ++a)
    box[a] = {c.axis(a).support_lo() - g.h(a), c.axis(a).support_hi() + g.h(a)};
  std::array<double, 2> tb{g.time().lo, g.time().hi};
  if (c.time_compact()) tb = {c.time().support_lo() - g.tau(), c.time().support_hi() + g.tau()};
  Region r = region_from_box(g, box, tb);
  for (int a = 0; a < g.dim(); ++a) {
    r.space[a].lo = std::max(r.space[a].lo, 2);
    r.space[a].hi = std::min(r.space[a].hi, g.axis(a).cells - 2);
  }
  return r;
}

/// Integral over the cutoff support of integrand(jet, cutoff sample).
template <class F>
double cutoff_integral(const SpaceTimeField& f, const Cutoff& c, double eps, F&& integrand) {
  const Grid& g = f.grid;
  const Region r = cutoff_region(g, c);
  return integrate(g, r, [&](int l, const Node& n) {
    const Point x = g.point(n);
    const double t = g.t(l);
    if (!c.in_support(x, t)) return 0.0;
    CutoffSample cs;
    cs.z = c.value(x, t);
    cs.grad = c.gradient(x, t);
    cs.zt = c.time_derivative(x, t);
    cs.grad_zzt = c.gradient_of_zeta_zeta_t(x, t);
    return integrand(local_jet(f, l, n, eps), cs);
  });
}

/// Spatial integral of integrand(jet, cutoff sample) at one level.
template <class F>
double cutoff_slice_integral(const SpaceTimeField& f, const Cutoff& c, double eps, int level,
                             F&& integrand) {
  const Grid& g = f.grid;
  const Region r = cutoff_region(g, c);
  return integrate_space(g, r, level, [&](int l, const Node& n) {
    const Point x = g.point(n);
    const double t = g.t(l);
    CutoffSample cs;
    cs.z = c.value(x, t);
    if (cs.z == 0.0) return 0.0;
    return integrand(local_jet(f, l, n, eps), cs);
  });
}

// ---------------------------------------------------------------------------
// Convergence functionals

/// J = integral (|grad u|^2 + eps^2)^((p-2)/2) |grad u|^2.
inline double j_eps(const SpaceTimeField& f, double p, double eps,
                    std::optional<Region> region = std::nullopt) {
  const Grid& g = f.grid;
  const Region r = region.value_or(full_region(g));
  validate(g, r);
  const auto grad = gradient_field(f);
  return integrate(g, r, [&](int l, const Node& n) {
    const Vec& gr = grad[g.index(l, n)];
    return dot(regularized_flux(gr, p, eps), gr);
  });
}

/// W = integral <F_eps(grad u_eps) - F(grad u), grad u_eps - grad u>.
inline double w_eps(const SpaceTimeField& u_eps, const SpaceTimeField& u, double p, double eps) {
  require_same_grid(u_eps, u);
  const Grid& g = u.grid;
  const auto ge = gradient_field(u_eps);
  const auto gu = gradient_field(u);
  return integrate(g, full_region(g), [&](int l, const Node& n) {
    const std::size_t k = g.index(l, n);
    const Vec a = regularized_flux(ge[k], p, eps);
    const Vec b = plaplace_flux(gu[k], p);
    const Vec d{ge[k][0] - gu[k][0], ge[k][1] - gu[k][1]};
    return (a[0] - b[0]) * d[0] + (a[1] - b[1]) * d[1];
  });
}

struct MOResult {
  double m = 0.0;        // monotonicity integral of the unregularized flux
  double o = 0.0;        // regularization defect paired with grad(u_eps - u)
  double o_bound = 0.0;  // delta-split majorant of |O|
};

inline MOResult m_eps_and_o_eps(const SpaceTimeField& u_eps, const SpaceTimeField& u, double p,
                                double eps, double delta) {
  require(delta > 0.0, ErrorKind::invalid_parameter, "delta must be positive");
  require_same_grid(u_eps, u);
  const Grid& g = u.grid;
  const auto ge = gradient_field(u_eps);
  const auto gu = gradient_field(u);
  const Region all = full_region(g);
  MOResult r;
  r.m = integrate(g, all, [&](int l, const Node& n) {
    const std::size_t k = g.index(l, n);
    const Vec a = plaplace_flux(ge[k], p);
    const Vec b = plaplace_flux(gu[k], p);
    return (a[0] - b[0]) * (ge[k][0] - gu[k][0]) + (a[1] - b[1]) * (ge[k][1] - gu[k][1]);
  });
  r.o = integrate(g, all, [&](int l, const Node& n) {
    const std::size_t k = g.index(l, n);
    const Vec a = plaplace_flux(ge[k], p);
    const Vec b = regularized_flux(ge[k], p, eps);
    return (a[0] - b[0]) * (ge[k][0] - gu[k][0]) + (a[1] - b[1]) * (ge[k][1] - gu[k][1]);
  });
  r.o_bound = integrate(g, all, [&](int l, const Node& n) {
    const std::size_t k = g.index(l, n);
    const double m = norm(ge[k]);
    const Vec d{ge[k][0] - gu[k][0], ge[k][1] - gu[k][1]};
    if (m < kZeroGradient) return 0.0;
    const double w = std::pow(m, p - 1.0) * norm(d);
    return m >= delta ? 0.5 * (2.0 - p) * eps * eps / (delta * delta) * w : 2.0 * w;
  });
  return r;
}

/// integral (p-1) |grad u_eps - grad u|^2 (1 + |grad u|^2 + |grad u_eps|^2)^((p-2)/2).
inline double weighted_gradient_distance(const SpaceTimeField& u_eps, const SpaceTimeField& u,
                                         double p) {
  require_same_grid(u_eps, u);
  const Grid& g = u.grid;
  const auto ge = gradient_field(u_eps);
  const auto gu = gradient_field(u);
  return integrate(g, full_region(g), [&](int l, const Node& n) {
    const std::size_t k = g.index(l, n);
    const Vec d{ge[k][0] - gu[k][0], ge[k][1] - gu[k][1]};
    return (p - 1.0) * norm_sq(d) *
           std::pow(1.0 + norm_sq(gu[k]) + norm_sq(ge[k]), 0.5 * (p - 2.0));
  });
}

/// integral |grad u|^p over the whole cylinder.
inline double gradient_p_mass(const SpaceTimeField& f, double p) {
  const double n = gradient_lp_norm(f, p, full_region(f.grid));
  return std::pow(n, p);
}

// ---------------------------------------------------------------------------
// The identity of the differentiated equation

enum class TermVIForm { gradient_v, gradient_u };

inline std::string to_string(TermVIForm f) {
  return f == TermVIForm::gradient_v ? "<grad zeta, grad v>" : "<grad zeta, grad u>";
}

/// Terms I..VII. `raw` are the bare integrals, `coefficient` the factors in
/// front of them; value(k) = coefficient[k] * raw[k].
struct FundamentalTerms {
  std::array<double, 7> raw{};
  std::array<double, 7> coefficient{};
  double vi_raw_gradient_u = 0.0;  // term VI integral with grad u in place of grad v
  TermVIForm vi_form = TermVIForm::gradient_v;

  double value(int k) const {
    if (k == 5 && vi_form == TermVIForm::gradient_u) return coefficient[5] * vi_raw_gradient_u;
    return coefficient[static_cast<std::size_t>(k)] * raw[static_cast<std::size_t>(k)];
  }
  double lhs() const { return value(0) + value(1) + value(2) + value(3); }
  double rhs() const { return value(4) + value(5) + value(6); }
  double residual() const { return lhs() - rhs(); }
  double scale() const {
    double s = 0.0;
    for (int k = 0; k < 7; ++k) s += std::abs(value(k));
    return s;
  }
  double relative_residual() const {
    const double s = scale();
    return s > 0.0 ? std::abs(residual()) / s : 0.0;
  }
  FundamentalTerms with_vi(TermVIForm f) const {
    FundamentalTerms t = *this;
    t.vi_form = f;
    return t;
  }
};

/// Evaluates the seven terms with v = |grad u|^2 and V = v + eps^2; grad v
/// comes from differencing the nodal v field.
inline FundamentalTerms fundamental_terms(const SpaceTimeField& f, const Cutoff& c, double p,
                                          double eps, double alpha) {
  require(eps > 0.0, ErrorKind::invalid_parameter, "identity terms need eps > 0");
  require(p - 1.0 + 2.0 * alpha > 0.0, ErrorKind::invalid_parameter,
          "restriction p - 1 + 2 alpha > 0 violated");
  require(alpha > -1.0, ErrorKind::invalid_parameter, "alpha must exceed -1");
  const double gamma = 0.5 * (p - 2.0 + 2.0 * alpha);
  FundamentalTerms t;
  t.coefficient = {1.0,
                   0.25 * (p - 2.0 + 2.0 * alpha),
                   0.5 * alpha * (p - 2.0),
                   1.0 / (2.0 * (alpha + 1.0)),
                   2.0 - p,
                   -1.0,
                   1.0 / (alpha + 1.0)};

  // One pass for the volume terms.
  std::array<double, 6> acc{};
  const Grid& g = f.grid;
  const Region r = cutoff_region(g, c);
  std::array<std::vector<double>, 6> parts;
  for (auto& v : parts) v.reserve(r.size());
  auto add = [&](int which, double w, double val) { parts[which].push_back(w * val); };
  for (int l = r.time.lo; l <= r.time.hi; ++l) {
    const double wt = detail::trapezoid_weight(r.time, l, g.tau());
    for (int i = r.space[0].lo; i <= r.space[0].hi; ++i) {
      const double w0 = detail::trapezoid_weight(r.space[0], i, g.h(0));
      for (int jj = r.space[1].lo; jj <= r.space[1].hi; ++jj) {
        const double w1 = g.dim() == 2 ? detail::trapezoid_weight(r.space[1], jj, g.h(1)) : 1.0;
        const Node n{i, jj};
        const Point x = g.point(n);
        const double tt = g.t(l);
        if (!c.in_support(x, tt)) continue;
        const double w = wt * w0 * w1;
        const LocalJet j = local_jet(f, l, n, eps);
        const double z = c.value(x, tt);
        const Vec gz = c.gradient(x, tt);
        const double Vg = std::pow(j.V, gamma);
        const double gu_gv = dot(j.grad, j.grad_v);
        add(0, w, z * z * Vg * j.hess_sq);
        add(1, w, z * z * Vg / j.V * norm_sq(j.grad_v));
        add(2, w, z * z * Vg / (j.V * j.V) * gu_gv * gu_gv);
        add(3, w, z * Vg / j.V * gu_gv * dot(gz, j.grad));
        add(4, w, z * Vg * dot(gz, j.grad_v));
        add(5, w, z * Vg * dot(gz, j.grad));
      }
    }
  }
  for (int k = 0; k < 6; ++k) acc[static_cast<std::size_t>(k)] = pairwise_sum(parts[k]);
  t.raw[0] = acc[0];
  t.raw[1] = acc[1];
  t.raw[2] = acc[2];
  t.raw[4] = acc[3];
  t.raw[5] = acc[4];
  t.vi_raw_gradient_u = acc[5];
  t.raw[6] = cutoff_integral(f, c, eps, [&](const LocalJet& j, const CutoffSample& cs) {
    return std::pow(j.V, alpha + 1.0) * cs.z * cs.zt;
  });
  auto slice_mass = [&](int level) {
    return cutoff_slice_integral(f, c, eps, level, [&](const LocalJet& j, const CutoffSample& cs) {
      return cs.z * cs.z * std::pow(j.V, alpha + 1.0);
    });
  };
  t.raw[3] = c.time_compact() ? 0.0 : slice_mass(g.levels() - 1) - slice_mass(0);
  return t;
}

/// Picks the term VI form whose identity residual shrinks under refinement;
/// `coarse` and `fine` are evaluations of the same configuration at h and h/2.
inline TermVIForm calibrate_term_vi(const FundamentalTerms& coarse, const FundamentalTerms& fine) {
  auto shrink = [&](TermVIForm f) {
    const double a = std::abs(coarse.with_vi(f).residual());
    const double b = std::abs(fine.with_vi(f).residual());
    return b > 0.0 ? a / b : std::numeric_limits<double>::infinity();
  };
  const double rv = shrink(TermVIForm::gradient_v);
  const double ru = shrink(TermVIForm::gradient_u);
  const double fv = fine.with_vi(TermVIForm::gradient_v).relative_residual();
  const double fu = fine.with_vi(TermVIForm::gradient_u).relative_residual();
  if (rv >= ru && fv <= fu) return TermVIForm::gradient_v;
  if (ru > rv && fu < fv) return TermVIForm::gradient_u;
  return fv <= fu ? TermVIForm::gradient_v : TermVIForm::gradient_u;
}

/// ((p-1) u'^2 + eps^2)^2 / (u'^2 + eps^2)^2 at an interior node (n = 1).
inline double onedim_braces_factor(const SpaceTimeField& f, double eps, double p, const Node& node,
                                   int level) {
  require(f.grid.dim() == 1, ErrorKind::invalid_parameter, "braces factor is one-dimensional");
  const double d = gradient(f, node, level)[0];
  const double d2 = d * d;
  const double num = (p - 1.0) * d2 + eps * eps;
  const double den = d2 + eps * eps;
  if (den == 0.0) return 1.0;
  return (num * num) / (den * den);
}

// ---------------------------------------------------------------------------
// Time derivative and weighted Hessian integrals

/// integral over the region of |u_t|^theta.
inline double ut_theta_mass(const SpaceTimeField& f, double theta, const Region& region) {
  require(theta > 1.0, ErrorKind::invalid_exponent, "theta must exceed 1");
  validate(f.grid, region);
  const SpaceTimeField ut = time_derivative_field(f);
  return integrate(f.grid, region,
                   [&](int l, const Node& n) { return std::pow(std::abs(ut(l, n)), theta); });
}

/// Nodal envelope 2 V^((p-2)/2) |D^2 u| of the flux derivatives; lateral
/// boundary nodes carry 0.
inline SpaceTimeField flux_derivative_bound_field(const SpaceTimeField& f, double p, double eps) {
  require(eps > 0.0, ErrorKind::invalid_parameter, "envelope needs eps > 0");
  const Grid& g = f.grid;
  SpaceTimeField out(g);
  for (int l = 0; l < g.levels(); ++l) {
    const auto slice = f.slice(l);
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
      const Node n = g.node_of(s);
      if (!g.interior(n, 1)) continue;
      const double V = norm_sq(detail::central_gradient(slice, g, n)) + eps * eps;
      const double h = std::sqrt(detail::frobenius_sq(detail::central_hessian(slice, g, n)));
      out(l, n) = 2.0 * std::pow(V, 0.5 * (p - 2.0)) * h;
    }
  }
  return out;
}

/// integral over the region of (2 V^((p-2)/2) |D^2 u|)^theta.
inline double envelope_theta_mass(const SpaceTimeField& f, double p, double eps, double theta,
                                  const Region& region) {
  validate(f.grid, region, true);
  const SpaceTimeField env = flux_derivative_bound_field(f, p, eps);
  return integrate(f.grid, region,
                   [&](int l, const Node& n) { return std::pow(env(l, n), theta); });
}

/// integral zeta^2 V^exponent |D^2 u|^2.
inline double weighted_hessian(const SpaceTimeField& f, const Cutoff& c, double eps,
                               double exponent) {
  return cutoff_integral(f, c, eps, [&](const LocalJet& j, const CutoffSample& cs) {
    return cs.z * cs.z * std::pow(j.V, exponent) * j.hess_sq;
  });
}

/// integral V^beta |grad zeta|^2.
inline double cutoff_gradient_mass(const SpaceTimeField& f, const Cutoff& c, double eps,
                                   double beta) {
  return cutoff_integral(f, c, eps, [&](const LocalJet& j, const CutoffSample& cs) {
    return std::pow(j.V, beta) * norm_sq(cs.grad);
  });
}

/// integral V^beta zeta zeta_t.
inline double cutoff_time_mass(const SpaceTimeField& f, const Cutoff& c, double eps, double beta) {
  return cutoff_integral(f, c, eps, [&](const LocalJet& j, const CutoffSample& cs) {
    return std::pow(j.V, beta) * cs.z * cs.zt;
  });
}

// ---------------------------------------------------------------------------
// Reports

struct ConvergenceEntry {
  double eps = 0.0;
  double j = 0.0;
  double w = 0.0;
  double m = 0.0;
  double o = 0.0;
  double o_bound = 0.0;
  double grad_p_mass = 0.0;
  double l2_dist = 0.0;
  double grad_lp_dist = 0.0;
  double l2_rel = 0.0;
  double grad_lp_rel = 0.0;
  double weighted_distance = 0.0;
  double certificate = 0.0;  // 3 C_p (integral |grad u|^p + eps^p mes)
  double w_tol = 0.0;        // discretization slack for W
  bool floored = false;
};

struct ConvergenceReport {
  std::vector<ConvergenceEntry> entries;
  double reference_grad_p_mass = 0.0;
  double c_p = 0.0;  // max_eps J / (integral |grad u|^p + eps^p mes)
  double k = 0.0;    // certificate at eps = 1
  std::string reference;  // "analytic" or "smallest-eps stand-in"
  std::vector<double> w_tol_by_level;  // sweep-level W slack per refinement level
  std::vector<std::vector<double>> w_by_level;  // [level][eps]
};

}  // namespace plaplab
