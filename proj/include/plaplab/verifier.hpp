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

// Executable versions of the estimates: pointwise inequality checks and
// random campaigns, the local a-priori bounds evaluated on discrete fields,
// eps-sweeps and the comparison principle checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "plaplab/exact_solutions.hpp"
#include "plaplab/functionals.hpp"
#include "plaplab/solver.hpp"

namespace plaplab {

/// Outcome of one inequality: pass iff left <= right + slack.
struct Verdict {
  std::string name;
  double left = 0.0;
  double right = 0.0;
  double slack = 0.0;
  bool pass = false;
  std::map<std::string, double> params;    // p, eps, alpha, ...
  std::map<std::string, double> measured;  // auxiliary integrals and constants
  std::string grid;

  static Verdict make(std::string name, double left, double right, double slack) {
    Verdict v;
    v.name = std::move(name);
    v.left = left;
    v.right = right;
    v.slack = slack;
    v.pass = left <= right + slack;
    return v;
  }
};

inline std::string describe(const Grid& g) {
  std::ostringstream os;
  os << g.dim() << "d";
  for (int a = 0; a < g.dim(); ++a)
    os << " [" << g.axis(a).lo << "," << g.axis(a).hi << "]x" << g.axis(a).cells;
  os << " t[" << g.time().lo << "," << g.time().hi << "]x" << g.time().cells;
  return os.str();
}

// ---------------------------------------------------------------------------
// Pointwise inequalities

inline constexpr double kPointwiseSlack = 1e-12;

/// 0 <= |a|^(p-2) - (|a|^2+eps^2)^((p-2)/2) <= ((2-p)/2) eps^2 |a|^(p-2) / delta^2
/// for |a| >= delta.
inline Verdict check_scalar_perturbation_inequality(double a, double eps, double delta, double p) {
  const double m = std::abs(a);
  require(delta > 0.0 && m >= delta, ErrorKind::precondition, "needs |a| >= delta > 0");
  require(p > 1.0 && p <= 2.0, ErrorKind::precondition, "needs 1 < p <= 2");
  const double base = std::pow(m, p - 2.0);
  // base * (1 - (1 + eps^2/a^2)^((p-2)/2)) without cancellation.
  const double lhs = -base * std::expm1(0.5 * (p - 2.0) * std::log1p((eps * eps) / (m * m)));
  const double rhs = 0.5 * (2.0 - p) * eps * eps * base / (delta * delta);
  Verdict v = Verdict::make("scalar-perturbation", lhs, rhs, kPointwiseSlack);
  v.pass = v.pass && lhs >= -kPointwiseSlack;
  v.params = {{"a", a}, {"eps", eps}, {"delta", delta}, {"p", p}};
  return v;
}

/// (p-1)|b-a|^2 (1+|a|^2+|b|^2)^((p-2)/2) <= <|b|^(p-2) b - |a|^(p-2) a, b - a>.
inline Verdict check_vector_monotonicity(const Vec& a, const Vec& b, double p) {
  require(p > 1.0 && p <= 2.0, ErrorKind::precondition, "needs 1 < p <= 2");
  const Vec fa = plaplace_flux(a, p);
  const Vec fb = plaplace_flux(b, p);
  const Vec d{b[0] - a[0], b[1] - a[1]};
  const double right = (fb[0] - fa[0]) * d[0] + (fb[1] - fa[1]) * d[1];
  const double left =
      (p - 1.0) * norm_sq(d) * std::pow(1.0 + norm_sq(a) + norm_sq(b), 0.5 * (p - 2.0));
  Verdict v = Verdict::make("vector-monotonicity", left, right, kPointwiseSlack);
  v.params = {{"a0", a[0]}, {"a1", a[1]}, {"b0", b[0]}, {"b1", b[1]}, {"p", p}};
  return v;
}

/// ((p-1) d^2 + eps^2)^2 / (d^2 + eps^2)^2 for a slope d.
inline double braces_factor(double d, double eps, double p) {
  const double num = (p - 1.0) * d * d + eps * eps;
  const double den = d * d + eps * eps;
  if (den == 0.0) return 1.0;
  return (num * num) / (den * den);
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct CampaignResult {
  std::string name;
  double p = 0.0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();  // max of left - right
  std::vector<std::string> counterexamples;                        // inputs, verbatim
};

namespace detail {

inline std::string format_inputs(const std::map<std::string, double>& params) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [k, v] : params) {
    os << (first ? "" : " ") << k << "=" << v;
    first = false;
  }
  return os.str();
}

inline void record(CampaignResult& r, const Verdict& v, std::size_t max_kept) {
  ++r.samples;
  r.worst_margin = std::max(r.worst_margin, v.left - v.right);
  if (v.pass) return;
  ++r.violations;
  if (r.counterexamples.size() < max_kept) r.counterexamples.push_back(format_inputs(v.params));
}

}  // namespace detail

/// Random |a| in [delta, 10], eps in [0, 1], delta in [1e-2, 1].
inline CampaignResult scalar_inequality_campaign(double p, std::size_t samples, std::uint64_t seed,
                                                 std::size_t max_kept = 20) {
  CampaignResult r;
  r.name = "scalar-perturbation";
  r.p = p;
  r.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < samples; ++k) {
    const double delta = 1e-2 + (1.0 - 1e-2) * unit_uniform(rng);
    const double a = delta + (10.0 - delta) * unit_uniform(rng);
    const double eps = unit_uniform(rng);
    const double sign = unit_uniform(rng) < 0.5 ? -1.0 : 1.0;
    detail::record(r, check_scalar_perturbation_inequality(sign * a, eps, delta, p), max_kept);
  }
  return r;
}

/// Random pairs uniform in the disc of radius 10 (dim 2) or in [-10, 10].
inline CampaignResult vector_inequality_campaign(double p, std::size_t samples, std::uint64_t seed,
                                                 int dim = 2, std::size_t max_kept = 20) {
  CampaignResult r;
  r.name = "vector-monotonicity";
  r.p = p;
  r.seed = seed;
  std::mt19937_64 rng(seed);
  auto draw = [&]() -> Vec {
    if (dim == 1) return {20.0 * unit_uniform(rng) - 10.0, 0.0};
    const double rad = 10.0 * std::sqrt(unit_uniform(rng));
    const double ang = 2.0 * std::numbers::pi * unit_uniform(rng);
    return {rad * std::cos(ang), rad * std::sin(ang)};
  };
  for (std::size_t k = 0; k < samples; ++k) {
    const Vec a = draw();
    const Vec b = draw();
    detail::record(r, check_vector_monotonicity(a, b, p), max_kept);
  }
  return r;
}

/// (p-1)^2 <= braces factor for random slopes in [-1e3, 1e3] and eps in [0, 1].
inline CampaignResult braces_campaign(double p, std::size_t samples, std::uint64_t seed,
                                      std::size_t max_kept = 20) {
  CampaignResult r;
  r.name = "braces-lower-bound";
  r.p = p;
  r.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < samples; ++k) {
    const double d = std::ldexp(2.0 * unit_uniform(rng) - 1.0, static_cast<int>(rng() % 20) - 10);
    const double eps = unit_uniform(rng);
    Verdict v = Verdict::make("braces-lower-bound", (p - 1.0) * (p - 1.0), braces_factor(d, eps, p),
                              kPointwiseSlack);
    v.params = {{"d", d}, {"eps", eps}, {"p", p}};
    detail::record(r, v, max_kept);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Local estimates on discrete fields

/// Discretization slack of the cutoff estimates: five times the identity
/// residual of the same field and cutoff.
inline double identity_slack(const FundamentalTerms& t) { return 5.0 * std::abs(t.residual()); }

namespace detail {

inline void annotate(Verdict& v, const Grid& g, std::map<std::string, double> params) {
  v.grid = describe(g);
  v.params = std::move(params);
}

/// Terms with eps = 0 replaced by the diffusivity floor, as the solver does.
inline double effective_eps(double eps) { return eps > 0.0 ? eps : 1e-8; }

}  // namespace detail

/// (p-1+2a-s) I <= (1/s + (2-p)/|a|) int V^((p+2a)/2)|grad z|^2
///                 + (1/(a+1)) int V^(a+1) z z_t  [- IV if z is not time-compact].
inline Verdict verify_general_estimate(const SpaceTimeField& f, const Cutoff& c, double p,
                                       double eps, double alpha, double sigma) {
  require_alpha_restriction(p, alpha);
  require(sigma > 0.0 && p - 1.0 + 2.0 * alpha - sigma > 0.0, ErrorKind::invalid_parameter,
          "sigma must satisfy 0 < sigma < p - 1 + 2 alpha");
  const double e = detail::effective_eps(eps);
  const FundamentalTerms t = fundamental_terms(f, c, p, e, alpha);
  const double b = cutoff_gradient_mass(f, c, e, 0.5 * (p + 2.0 * alpha));
  const double time_part = t.raw[6] / (alpha + 1.0);
  const double left = (p - 1.0 + 2.0 * alpha - sigma) * t.value(0);
  const double right = (1.0 / sigma + (2.0 - p) / std::abs(alpha)) * b + time_part - t.value(3);
  Verdict v = Verdict::make("general-estimate", left, right, identity_slack(t));
  detail::annotate(v, f.grid, {{"p", p}, {"eps", eps}, {"alpha", alpha}, {"sigma", sigma}});
  v.measured = {{"term_I", t.value(0)}, {"cutoff_gradient_mass", b}, {"time_part", time_part},
                {"identity_residual", t.residual()}};
  return v;
}

/// Absorption of terms V and VI: |V| <= (2-p) s I + (2-p) B / s and
/// |VI| <= s I + B / s with B = int V^((p+2a)/2) |grad z|^2.
inline std::pair<Verdict, Verdict> verify_absorption(const SpaceTimeField& f, const Cutoff& c,
                                                     double p, double eps, double alpha,
                                                     double sigma) {
  require_alpha_restriction(p, alpha);
  require(sigma > 0.0, ErrorKind::invalid_parameter, "sigma must be positive");
  const FundamentalTerms t = fundamental_terms(f, c, p, eps, alpha);
  const double b = cutoff_gradient_mass(f, c, eps, 0.5 * (p + 2.0 * alpha));
  const double slack = identity_slack(t);
  Verdict v5 = Verdict::make("absorb-term-V", std::abs(t.value(4)),
                             (2.0 - p) * (sigma * t.value(0) + b / sigma), slack);
  Verdict v6 = Verdict::make("absorb-term-VI", std::abs(t.value(5)), sigma * t.value(0) + b / sigma,
                             slack);
  for (Verdict* v : {&v5, &v6})
    detail::annotate(*v, f.grid, {{"p", p}, {"eps", eps}, {"alpha", alpha}, {"sigma", sigma}});
  return {v5, v6};
}

/// One-dimensional weighted Hessian int z^2 V^(p-2) u''^2 against
/// int |u'|^p + 1; the measured ratio is reported as C.
struct OneDimMeasurement {
  double weighted_hessian = 0.0;
  double grad_p_mass = 0.0;
  double ratio = 0.0;
};

inline OneDimMeasurement measure_onedim_estimate(const SpaceTimeField& f, const Cutoff& c, double p,
                                                 double eps) {
  require(f.grid.dim() == 1, ErrorKind::invalid_parameter, "one-dimensional estimate needs n = 1");
  OneDimMeasurement m;
  const double e = detail::effective_eps(eps);
  m.weighted_hessian = weighted_hessian(f, c, e, p - 2.0);
  m.grad_p_mass = gradient_p_mass(f, p);
  m.ratio = m.weighted_hessian / (m.grad_p_mass + 1.0);
  return m;
}

/// Single-field form: left = weighted Hessian, right = C (int |u'|^p + 1)
/// with the supplied constant; `measured.C` carries the observed ratio.
inline Verdict verify_onedim_estimate(const SpaceTimeField& f, const Cutoff& c, double p,
                                      double eps, double constant) {
  const OneDimMeasurement m = measure_onedim_estimate(f, c, p, eps);
  Verdict v = Verdict::make("onedim-estimate", m.weighted_hessian,
                            constant * (m.grad_p_mass + 1.0), 0.0);
  detail::annotate(v, f.grid, {{"p", p}, {"eps", eps}, {"C", constant}});
  v.measured = {{"C", m.ratio}, {"grad_p_mass", m.grad_p_mass}};
  return v;
}

/// Sweep form: the ratios stay within a factor 4 of each other.
inline Verdict onedim_sweep_verdict(const std::vector<OneDimMeasurement>& sweep) {
  require(sweep.size() >= 2, ErrorKind::invalid_plan, "sweep needs at least two entries");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& m : sweep) {
    lo = std::min(lo, m.ratio);
    hi = std::max(hi, m.ratio);
  }
  Verdict v = Verdict::make("onedim-ratio-spread", hi, 4.0 * lo, 0.0);
  v.measured = {{"C_max", hi}, {"C_min", lo}};
  return v;
}

/// With 2 alpha = p - 2:
/// (2p-3-s) int z^2 V^(p-2)|D^2u|^2 <= (1/s + 2) int V^(p-1)|grad z|^2
///                                    + (2/p) int V^(p/2) z z_t.
inline Verdict verify_case_p_above_threshold(const SpaceTimeField& f, const Cutoff& c, double p,
                                             double eps, double sigma) {
  require(p > 1.5, ErrorKind::wrong_regime, "this estimate needs p > 3/2");
  require(sigma > 0.0 && 2.0 * p - 3.0 - sigma > 0.0, ErrorKind::invalid_parameter,
          "sigma must satisfy 0 < sigma < 2p - 3");
  const double alpha = 0.5 * (p - 2.0);
  const double e = detail::effective_eps(eps);
  const FundamentalTerms t = fundamental_terms(f, c, p, e, alpha);
  const double hess = t.value(0);  // gamma = p - 2 for this alpha
  const double b = cutoff_gradient_mass(f, c, e, p - 1.0);
  const double tm = t.raw[6];
  const double left = (2.0 * p - 3.0 - sigma) * hess;
  const double right = (1.0 / sigma + 2.0) * b + (2.0 / p) * tm - t.value(3);
  Verdict v = Verdict::make("case-p-above-three-halves", left, right, identity_slack(t));
  detail::annotate(v, f.grid, {{"p", p}, {"eps", eps}, {"alpha", alpha}, {"sigma", sigma}});
  v.measured = {{"weighted_hessian", hess},
                {"cutoff_gradient_mass", b},
                {"time_mass", tm},
                {"right_with_factor_1_over_p_minus_1", (1.0 / sigma + 2.0) * b + tm / (p - 1.0)}};
  return v;
}

struct EnergyLemmaParts {
  double lhs = 0.0;          // int z z_t V^(a+1)
  double abs_zzt = 0.0;      // int |z z_t|
  double grad_zzt = 0.0;     // int |grad(z z_t)| V^((2a+1)/2)
  double term_i = 0.0;       // int z^2 V^((p-2+2a)/2) |D^2u|^2
  double zt_sq = 0.0;        // int z_t^2 V^((2-p+2a)/2)
  double sup_norm = 0.0;
  double rhs(double eps, double alpha, double kappa, int dim) const {
    const double cn = 0.5 * (std::sqrt(static_cast<double>(dim)) + 2.0 * std::abs(alpha));
    return std::pow(eps, 2.0 * (alpha + 1.0)) * abs_zzt + 2.0 * sup_norm * grad_zzt +
           cn * sup_norm * (kappa * term_i + zt_sq / kappa);
  }
};

inline EnergyLemmaParts energy_lemma_parts(const SpaceTimeField& f, const Cutoff& c, double p,
                                           double eps, double alpha) {
  require(c.time_compact(), ErrorKind::invalid_cutoff,
          "the energy lemma needs a cutoff with compact time support");
  EnergyLemmaParts e;
  e.lhs = cutoff_time_mass(f, c, eps, alpha + 1.0);
  e.abs_zzt = cutoff_integral(f, c, eps, [](const LocalJet&, const CutoffSample& s) {
    return std::abs(s.z * s.zt);
  });
  e.grad_zzt = cutoff_integral(f, c, eps, [&](const LocalJet& j, const CutoffSample& s) {
    return norm(s.grad_zzt) * std::pow(j.V, alpha + 0.5);
  });
  e.term_i = weighted_hessian(f, c, eps, 0.5 * (p - 2.0 + 2.0 * alpha));
  e.zt_sq = cutoff_integral(f, c, eps, [&](const LocalJet& j, const CutoffSample& s) {
    return s.zt * s.zt * std::pow(j.V, 0.5 * (2.0 - p + 2.0 * alpha));
  });
  e.sup_norm = f.max_abs();
  return e;
}

/// int z z_t V^(a+1) <= eps^(2(a+1)) int|z z_t| + 2|u|_inf int |grad(z z_t)| V^((2a+1)/2)
///   + ((sqrt(n) + 2|a|)/2) |u|_inf {kappa I + int z_t^2 V^((2-p+2a)/2) / kappa}.
inline Verdict verify_energy_lemma(const SpaceTimeField& f, const Cutoff& c, double p, double eps,
                                   double alpha, double kappa) {
  require(p < 1.5, ErrorKind::wrong_regime, "the energy lemma route is for p < 3/2");
  require_alpha_restriction(p, alpha);
  require(kappa > 0.0, ErrorKind::invalid_parameter, "kappa must be positive");
  const double e = detail::effective_eps(eps);
  const EnergyLemmaParts parts = energy_lemma_parts(f, c, p, e, alpha);
  const FundamentalTerms t = fundamental_terms(f, c, p, e, alpha);
  Verdict v = Verdict::make("energy-lemma", parts.lhs, parts.rhs(e, alpha, kappa, f.grid.dim()),
                            identity_slack(t));
  detail::annotate(v, f.grid, {{"p", p}, {"eps", eps}, {"alpha", alpha}, {"kappa", kappa}});
  v.measured = {{"abs_zzt", parts.abs_zzt}, {"grad_zzt", parts.grad_zzt},
                {"term_I", parts.term_i},   {"zt_sq", parts.zt_sq},
                {"sup_norm", parts.sup_norm}};
  return v;
}

/// Checks 1 < theta < 1/(2-p) and the exponent ranges of the small-p route.
inline void require_theta_range(double p, double theta) {
  require(p > 1.0 && p < 2.0, ErrorKind::invalid_parameter, "needs 1 < p < 2");
  require(theta > 1.0 && theta < 1.0 / (2.0 - p), ErrorKind::invalid_parameter,
          "theta must satisfy 1 < theta < 1/(2-p)");
  const double a2 = (theta - 1.0) * (p - 2.0);
  for (double e : {0.5 * (a2 + 1.0), 0.5 * (p + a2), 0.5 * (2.0 - p + a2)})
    require(e > 0.0 && e < 0.5 * p, ErrorKind::invalid_parameter,
            "a power of V leaves the range (0, p/2)");
}

/// Combined small-p estimate with 2 alpha = (theta-1)(p-2):
/// (p-1+2a - s - c_n kappa |u| / (a+1)) I <= (1/s + (2-p)/|a|) B
///     + (eps^(2(a+1)) A1 + 2|u| A2 + c_n |u| A3 / kappa) / (a+1).
/// `measured.weighted_hessian` is int z^2 V^(theta(p-2)) |D^2u|^2.
inline Verdict verify_theta_bound(const SpaceTimeField& f, const Cutoff& c, double p, double eps,
                                  double theta, std::optional<double> sigma = std::nullopt,
                                  std::optional<double> kappa = std::nullopt) {
  require(p < 1.5, ErrorKind::wrong_regime, "the theta route is for p < 3/2");
  require_theta_range(p, theta);
  const double alpha = 0.5 * (theta - 1.0) * (p - 2.0);
  const double e = detail::effective_eps(eps);
  const double lead = p - 1.0 + 2.0 * alpha;
  const double s = sigma.value_or(0.5 * lead);
  const double sup = f.max_abs();
  const double k = kappa.value_or(sup > 0.0 ? lead * (2.0 - p) / (8.0 * sup) : 1.0);
  require(s > 0.0 && k > 0.0, ErrorKind::invalid_parameter, "sigma and kappa must be positive");
  const double cn = 0.5 * (std::sqrt(static_cast<double>(f.grid.dim())) + 2.0 * std::abs(alpha));
  const EnergyLemmaParts parts = energy_lemma_parts(f, c, p, e, alpha);
  const FundamentalTerms t = fundamental_terms(f, c, p, e, alpha);
  const double b = cutoff_gradient_mass(f, c, e, 0.5 * (p + 2.0 * alpha));
  const double coef = lead - s - cn * k * sup / (alpha + 1.0);
  require(coef > 0.0, ErrorKind::invalid_parameter, "sigma and kappa leave no absorbable term I");
  const double left = coef * parts.term_i;
  const double right = (1.0 / s + (2.0 - p) / std::abs(alpha)) * b +
                       (std::pow(e, 2.0 * (alpha + 1.0)) * parts.abs_zzt +
                        2.0 * sup * parts.grad_zzt + cn * sup * parts.zt_sq / k) /
                           (alpha + 1.0);
  Verdict v = Verdict::make("theta-bound", left, right, identity_slack(t));
  detail::annotate(v, f.grid,
                   {{"p", p}, {"eps", eps}, {"theta", theta}, {"alpha", alpha}, {"sigma", s},
                    {"kappa", k}});
  v.measured = {{"weighted_hessian", weighted_hessian(f, c, e, theta * (p - 2.0))},
                {"term_I", parts.term_i},
                {"L_theta", right / coef}};
  return v;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepPlan {
  std::vector<double> eps{1.0, 0.3, 0.1, 0.03, 0.01};
  std::vector<int> refinements{1};
  double p = 1.5;
  EstimateParams estimates{};

  void validate() const {
    require(eps.size() >= 3, ErrorKind::invalid_plan, "a sweep needs at least three eps values");
    for (std::size_t k = 0; k < eps.size(); ++k) {
      require(eps[k] >= 0.0, ErrorKind::invalid_plan, "eps values must be nonnegative");
      if (k > 0)
        require(eps[k] < eps[k - 1], ErrorKind::invalid_plan,
                "eps values must be strictly decreasing");
    }
    require(!refinements.empty(), ErrorKind::invalid_plan, "no refinement levels");
    for (std::size_t k = 0; k < refinements.size(); ++k) {
      require(refinements[k] >= 1, ErrorKind::invalid_plan, "refinement factors must be >= 1");
      if (k > 0)
        require(refinements[k] > refinements[k - 1], ErrorKind::invalid_plan,
                "refinement factors must increase");
    }
    require(p > 1.0 && p <= 2.0, ErrorKind::invalid_plan, "p must lie in (1, 2]");
  }
};

/// Consecutive-ratio boundedness: every next/previous <= limit.
inline Verdict bounded_sequence_verdict(std::string name, const std::vector<double>& values,
                                        double limit = 1.5) {
  double worst = 0.0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double prev = values[k - 1];
    const double r = prev > 0.0 ? values[k] / prev
                                : (values[k] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    worst = std::max(worst, r);
  }
  Verdict v = Verdict::make(std::move(name), worst, limit, 0.0);
  v.measured["max_consecutive_ratio"] = worst;
  return v;
}

/// Runs `work(k)` for k in [0, count) on up to `threads` workers; results
/// keep the index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, int threads, F&& work) {
  std::vector<T> out(count);
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) out[k] = work(k);
    return out;
  }
  for (std::size_t start = 0; start < count; start += static_cast<std::size_t>(threads)) {
    std::vector<std::future<T>> batch;
    const std::size_t stop = std::min(count, start + static_cast<std::size_t>(threads));
    for (std::size_t k = start; k < stop; ++k)
      batch.push_back(std::async(std::launch::async, [&work, k] { return work(k); }));
    for (std::size_t k = start; k < stop; ++k) out[k] = batch[k - start].get();
  }
  return out;
}

/// Solves every eps of the plan on one grid; a failing eps aborts with its value.
inline std::vector<SolveResult> solve_sweep(const Grid& g, const SweepPlan& plan,
                                            const BoundaryData& boundary,
                                            const SolverParams& base = {}, int threads = 1) {
  plan.validate();
  return parallel_map<SolveResult>(plan.eps.size(), threads, [&](std::size_t k) {
    SolverParams sp = base;
    sp.p = plan.p;
    sp.eps = plan.eps[k];
    try {
      return solve_regularized(g, sp, boundary);
    } catch (const SolverError& e) {
      std::ostringstream os;
      os << "eps = " << plan.eps[k] << ": " << e.what();
      throw SolverError(os.str(), e.log());
    }
  });
}

struct ConvergenceStudy {
  ConvergenceReport report;
  std::vector<Verdict> verdicts;
  std::vector<SpaceTimeField> fields;  // solved fields at the base resolution
};

namespace detail {

inline ConvergenceEntry convergence_entry(const SpaceTimeField& ue, const SpaceTimeField& u,
                                          double p, double eps, double delta) {
  ConvergenceEntry e;
  e.eps = eps;
  e.j = j_eps(ue, p, eps);
  e.w = w_eps(ue, u, p, eps);
  const MOResult mo = m_eps_and_o_eps(ue, u, p, eps, delta);
  e.m = mo.m;
  e.o = mo.o;
  e.o_bound = mo.o_bound;
  e.grad_p_mass = gradient_p_mass(ue, p);
  const Grid& g = u.grid;
  const Region all = full_region(g);
  const auto gu = gradient_field(u);
  const auto ge = gradient_field(ue);
  e.l2_dist = lp_norm_of(g, all, 2.0, [&](int l, const Node& n) { return ue(l, n) - u(l, n); });
  e.grad_lp_dist = lp_norm_of(g, all, p, [&](int l, const Node& n) {
    const std::size_t k = g.index(l, n);
    return norm(Vec{ge[k][0] - gu[k][0], ge[k][1] - gu[k][1]});
  });
  const double ul2 = lp_norm(u, 2.0, all);
  const double glp = gradient_lp_norm(u, p, all);
  e.l2_rel = ul2 > 0.0 ? e.l2_dist / ul2 : e.l2_dist;
  e.grad_lp_rel = glp > 0.0 ? e.grad_lp_dist / glp : e.grad_lp_dist;
  e.weighted_distance = weighted_gradient_distance(ue, u, p);
  return e;
}

/// Decreasing within a relative slack: next <= (1 + slack) prev.
inline Verdict decreasing_verdict(std::string name, const std::vector<double>& v, double slack) {
  double worst = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) worst = std::max(worst, v[k] - (1.0 + slack) * v[k - 1]);
  Verdict out = Verdict::make(std::move(name), worst, 0.0, 0.0);
  return out;
}

}  // namespace detail

/// eps-sweep against a reference: the analytic solution when given,
/// otherwise the smallest-eps solve. W's slack comes from the change of W
/// between consecutive refinement levels (five times the largest change
/// over the sweep), so at least two refinement levels are needed for it.
inline ConvergenceStudy convergence_study(const Grid& base, const SweepPlan& plan,
                                          const BoundaryData& boundary,
                                          const std::optional<AnalyticSolution>& reference,
                                          const SolverParams& solver = {}, int threads = 1) {
  plan.validate();
  ConvergenceStudy out;
  ConvergenceReport& rep = out.report;
  rep.reference = reference ? "analytic" : "smallest-eps stand-in";
  const double delta = plan.estimates.delta;
  const double p = plan.p;

  std::vector<std::vector<ConvergenceEntry>> per_level;
  for (std::size_t lev = 0; lev < plan.refinements.size(); ++lev) {
    const Grid g = base.refined(plan.refinements[lev]);
    std::vector<SolveResult> solves = solve_sweep(g, plan, boundary, solver, threads);
    const SpaceTimeField u = reference ? sample(g, *reference) : solves.back().field;
    std::vector<ConvergenceEntry> entries = parallel_map<ConvergenceEntry>(
        solves.size(), threads, [&](std::size_t k) {
          ConvergenceEntry e = detail::convergence_entry(solves[k].field, u, p, plan.eps[k], delta);
          e.floored = solves[k].log.floored;
          return e;
        });
    if (lev == 0) {
      rep.reference_grad_p_mass = gradient_p_mass(u, p);
      for (auto& s : solves) out.fields.push_back(std::move(s.field));
    }
    std::vector<double> ws;
    for (const auto& e : entries) ws.push_back(e.w);
    rep.w_by_level.push_back(ws);
    per_level.push_back(std::move(entries));
  }
  rep.entries = per_level.front();

  // W slack per level from the change to the next level.
  for (std::size_t lev = 0; lev + 1 < per_level.size(); ++lev) {
    double change = 0.0;
    for (std::size_t k = 0; k < plan.eps.size(); ++k)
      change = std::max(change, std::abs(per_level[lev][k].w - per_level[lev + 1][k].w));
    rep.w_tol_by_level.push_back(5.0 * change);
  }
  const double w_tol = rep.w_tol_by_level.empty() ? 0.0 : rep.w_tol_by_level.front();
  for (auto& e : rep.entries) e.w_tol = w_tol;

  // Uniform gradient bound certificate.
  const double mes = base.measure();
  for (const auto& e : rep.entries)
    rep.c_p = std::max(rep.c_p, e.j / (rep.reference_grad_p_mass + std::pow(e.eps, p) * mes));
  for (auto& e : rep.entries)
    e.certificate = 3.0 * rep.c_p * (rep.reference_grad_p_mass + std::pow(e.eps, p) * mes);
  rep.k = 0.0;
  for (const auto& e : rep.entries) rep.k = std::max(rep.k, e.certificate);

  // Verdicts.
  for (std::size_t lev = 0; lev < rep.w_tol_by_level.size(); ++lev) {
    double worst = -std::numeric_limits<double>::infinity();
    for (double w : rep.w_by_level[lev]) worst = std::max(worst, w);
    Verdict v = Verdict::make("W-nonpositive", worst, 0.0, rep.w_tol_by_level[lev]);
    v.measured["refinement"] = plan.refinements[lev];
    out.verdicts.push_back(v);
  }
  if (rep.w_tol_by_level.size() >= 2) {
    Verdict v = Verdict::make("W-slack-shrinks", 1.5 * rep.w_tol_by_level[1],
                              rep.w_tol_by_level[0], 0.0);
    out.verdicts.push_back(v);
  }
  double max_mass = 0.0;
  for (const auto& e : rep.entries) max_mass = std::max(max_mass, e.grad_p_mass);
  out.verdicts.push_back(Verdict::make("gradient-mass-below-K", max_mass, rep.k, 0.0));
  std::vector<double> l2, glp;
  for (const auto& e : rep.entries) {
    l2.push_back(e.l2_dist);
    glp.push_back(e.grad_lp_dist);
  }
  out.verdicts.push_back(detail::decreasing_verdict("L2-distance-decreasing", l2, 0.05));
  out.verdicts.push_back(detail::decreasing_verdict("gradient-distance-decreasing", glp, 0.05));
  for (Verdict& v : out.verdicts) {
    v.grid = describe(base);
    v.params["p"] = p;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pointwise checks on whole fields

/// u_t <= u / ((2-p)(t + t_offset)) for nonnegative solutions; analytic form.
inline Verdict benilan_crandall_check(const AnalyticSolution& sol, const Grid& g, double p,
                                      double t_offset, double slack = 1e-9) {
  require(p < 2.0, ErrorKind::precondition, "the bound needs p < 2");
  require_valid_on(sol, g);
  double worst = -std::numeric_limits<double>::infinity();
  for (int l = 0; l < g.levels(); ++l) {
    const double t = g.t(l) + t_offset;
    require(t > 0.0, ErrorKind::precondition, "the bound needs t + offset > 0");
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
      const Node n = g.node_of(s);
      const Point x = g.point(n);
      const double u = sol.value(x, g.t(l));
      require(u >= 0.0, ErrorKind::precondition, "the bound needs a nonnegative solution");
      worst = std::max(worst, sol.time_derivative(x, g.t(l)) - u / ((2.0 - p) * t));
    }
  }
  Verdict v = Verdict::make("benilan-crandall", worst, 0.0, slack);
  detail::annotate(v, g, {{"p", p}, {"t_offset", t_offset}});
  return v;
}

/// Discrete form at interior nodes and levels with the centered u_t.
inline Verdict benilan_crandall_check(const SpaceTimeField& f, double p, double t_offset,
                                      double slack) {
  require(p < 2.0, ErrorKind::precondition, "the bound needs p < 2");
  const Grid& g = f.grid;
  for (double v : f.values)
    require(v >= 0.0, ErrorKind::precondition, "the bound needs a nonnegative field");
  const SpaceTimeField ut = time_derivative_field(f);
  double worst = -std::numeric_limits<double>::infinity();
  for (int l = 1; l + 1 < g.levels(); ++l) {
    const double t = g.t(l) + t_offset;
    require(t > 0.0, ErrorKind::precondition, "the bound needs t + offset > 0");
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
      const Node n = g.node_of(s);
      if (!g.interior(n, 1)) continue;
      worst = std::max(worst, ut(l, n) - f(l, n) / ((2.0 - p) * t));
    }
  }
  Verdict v = Verdict::make("benilan-crandall", worst, 0.0, slack);
  detail::annotate(v, g, {{"p", p}, {"t_offset", t_offset}});
  return v;
}

/// Largest |u_t - div flux| over interior nodes and levels.
inline double max_pde_residual(const SpaceTimeField& f, double p, double eps) {
  const SpaceTimeField r = pde_residual(f, p, eps);
  double m = 0.0;
  for (int l = 1; l + 1 < f.grid.levels(); ++l)
    for (double v : r.slice(l)) m = std::max(m, std::abs(v));
  return m;
}

/// min and max over the parabolic boundary bound the field everywhere.
inline Verdict max_principle_check(const SpaceTimeField& f, double slack = 1e-9) {
  const Grid& g = f.grid;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int l = 0; l < g.levels(); ++l)
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
      const Node n = g.node_of(s);
      if (l > 0 && !g.on_lateral_boundary(n)) continue;
      lo = std::min(lo, f(l, n));
      hi = std::max(hi, f(l, n));
    }
  double excess = -std::numeric_limits<double>::infinity();
  for (double v : f.values) excess = std::max(excess, std::max(v - hi, lo - v));
  Verdict v = Verdict::make("maximum-principle", excess, 0.0, slack);
  v.grid = describe(g);
  v.measured = {{"boundary_min", lo}, {"boundary_max", hi}};
  return v;
}

// ---------------------------------------------------------------------------
// Time-derivative summability

struct SummabilityStudy {
  std::vector<double> eps;
  std::vector<double> ut_mass;
  std::vector<double> envelope_mass;
  std::vector<Verdict> verdicts;
};

/// theta = 2 for p >= 3/2 or n = 1; 1 < theta < 1/(2-p) otherwise.
inline void require_summability_regime(double p, int dim, double theta) {
  if (p >= 1.5 || dim == 1)
    require(theta == 2.0, ErrorKind::invalid_parameter,
            "theta = 2 is the exponent for p >= 3/2 or n = 1");
  else
    require(theta > 1.0 && theta < 1.0 / (2.0 - p), ErrorKind::invalid_parameter,
            "theta must satisfy 1 < theta < 1/(2-p)");
}

/// Masses of |u_t|^theta and of the flux-derivative envelope on an interior
/// region, from already solved sweep fields.
inline SummabilityStudy ut_summability_study(const std::vector<SpaceTimeField>& fields,
                                             const SweepPlan& plan, double theta,
                                             const Region& region) {
  plan.validate();
  require(fields.size() == plan.eps.size(), ErrorKind::shape_mismatch,
          "one field per eps value is needed");
  SummabilityStudy s;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    require_summability_regime(plan.p, fields[k].grid.dim(), theta);
    validate(fields[k].grid, region, true);
    s.eps.push_back(plan.eps[k]);
    s.ut_mass.push_back(ut_theta_mass(fields[k], theta, region));
    s.envelope_mass.push_back(envelope_theta_mass(fields[k], plan.p,
                                                  detail::effective_eps(plan.eps[k]), theta,
                                                  region));
  }
  s.verdicts.push_back(bounded_sequence_verdict("ut-theta-mass-bounded", s.ut_mass));
  s.verdicts.push_back(bounded_sequence_verdict("envelope-mass-bounded", s.envelope_mass));
  return s;
}

/// Solving form: runs the sweep first.
inline SummabilityStudy ut_summability_study(const Grid& g, const SweepPlan& plan,
                                             const BoundaryData& boundary, double theta,
                                             const Region& region, int threads = 1) {
  require_summability_regime(plan.p, g.dim(), theta);
  std::vector<SolveResult> solves = solve_sweep(g, plan, boundary, {}, threads);
  std::vector<SpaceTimeField> fields;
  for (auto& r : solves) fields.push_back(std::move(r.field));
  return ut_summability_study(fields, plan, theta, region);
}

}  // namespace plaplab
