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


#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "plaplab/functionals.hpp"
#include "plaplab/verifier.hpp"

namespace plaplab {
namespace {

SpaceTimeField on(const Grid& g, auto f) { return sample(g, f); }

CutoffSpec box_cutoff(double lo, double hi, double ramp, double t_lo, double t_hi,
                      double t_ramp) {
  CutoffSpec c;
  c.plateau[0] = {lo, hi};
  c.plateau[1] = {lo, hi};
  c.ramp = {ramp, ramp};
  c.time_plateau = {t_lo, t_hi};
  c.time_ramp = t_ramp;
  return c;
}

TEST(Cutoff, PlateauOutsideAndRampMidpoint) {
  const Grid g = Grid::line(-2.0, 2.0, 40, 0.0, 1.0, 20);
  const double w = 0.4;
  const Cutoff c = make_cutoff(g, box_cutoff(-0.5, 0.5, w, 0.4, 0.6, 0.2));

  EXPECT_EQ(c.value({0.1, 0.0}, 0.5), 1.0);
  EXPECT_EQ(c.gradient({0.1, 0.0}, 0.5)[0], 0.0);
  EXPECT_EQ(c.time_derivative({0.1, 0.0}, 0.5), 0.0);

  for (const auto& [x, t] : {std::pair{1.5, 0.5}, std::pair{0.0, 0.1}, std::pair{-0.95, 0.5}}) {
    EXPECT_EQ(c.value({x, 0.0}, t), 0.0);
    EXPECT_EQ(c.gradient({x, 0.0}, t)[0], 0.0);
    EXPECT_EQ(c.time_derivative({x, 0.0}, t), 0.0);
  }

  const double mid = 0.5 + 0.5 * w;
  EXPECT_NEAR(c.value({mid, 0.0}, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(c.gradient({mid, 0.0}, 0.5)[0]), 15.0 / (8.0 * w), 1e-12);
  EXPECT_NEAR(c.time_derivative({0.0, 0.0}, 0.3), 15.0 / (8.0 * 0.2), 1e-12);
}

TEST(Cutoff, ValuesStayInUnitInterval) {
  const Grid g = Grid::square(-1.0, 1.0, 20, -1.0, 1.0, 20, 0.0, 1.0, 10);
  const Cutoff c = make_cutoff(g, box_cutoff(-0.3, 0.2, 0.5, 0.3, 0.6, 0.2));
  std::mt19937_64 rng(5);
  for (int k = 0; k < 2000; ++k) {
    const Point x{2.0 * unit_uniform(rng) - 1.0, 2.0 * unit_uniform(rng) - 1.0};
    const double z = c.value(x, unit_uniform(rng));
    EXPECT_GE(z, 0.0);
    EXPECT_LE(z, 1.0);
  }
}

TEST(Cutoff, SupportTouchingTheBoundaryIsRejected) {
  const Grid g = Grid::line(-1.0, 1.0, 20, 0.0, 1.0, 10);
  try {
    make_cutoff(g, box_cutoff(-0.5, 0.5, 0.5, 0.4, 0.6, 0.1));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_support);
  }
  EXPECT_THROW(make_cutoff(g, box_cutoff(-0.5, 0.5, 0.2, 0.4, 0.6, 0.5)), Error);
}

TEST(Functionals, JEpsOnAffineFields) {
  const Grid g = Grid::line(0.0, 1.0, 10, 0.0, 1.0, 10);
  const auto x = on(g, [](const Point& p, double) { return p[0]; });
  EXPECT_NEAR(j_eps(x, 1.5, 0.0), 1.0, 1e-13);
  for (double p : {1.1, 1.5, 1.9}) EXPECT_NEAR(j_eps(x, p, 1.0), std::pow(2.0, 0.5 * (p - 2.0)), 1e-13);
  EXPECT_EQ(j_eps(SpaceTimeField(g, 0.0), 1.5, 0.3), 0.0);
}

TEST(Functionals, WEpsVanishesOnIdenticalFields) {
  const Grid g = Grid::line(-1.0, 1.0, 20, 0.0, 1.0, 10);
  const auto u = on(g, [](const Point& p, double t) { return std::sin(p[0]) * (1.0 + t); });
  EXPECT_EQ(w_eps(u, u, 1.5, 0.0), 0.0);
  const auto x = on(g, [](const Point& p, double) { return p[0]; });
  EXPECT_EQ(w_eps(x, x, 1.5, 1.0), 0.0);
}

TEST(Functionals, WEpsSignOnSolvedBarenblatt) {
  const double p = 1.5, eps = 0.1;
  const AnalyticSolution b = barenblatt_fast_diffusion(p, 1, 1.0, 1.0);
  std::vector<double> w;
  for (int f : {1, 2}) {
    const Grid g = Grid::line(-4.0, 4.0, 100 * f, 0.0, 1.0, 100 * f);
    SolverParams sp;
    sp.p = p;
    sp.eps = eps;
    const SolveResult r = solve_regularized(g, sp, BoundaryData::trace(b, 0.0));
    w.push_back(w_eps(r.field, sample(g, b), p, eps));
  }
  const double tol = 5.0 * std::abs(w[0] - w[1]);
  EXPECT_LE(w[0], tol);
  EXPECT_LE(w[1], tol);
}

TEST(Functionals, MAndOOnDegenerateInputs) {
  const Grid g = Grid::line(-1.0, 1.0, 20, 0.0, 1.0, 10);
  const auto u = on(g, [](const Point& p, double t) { return p[0] * p[0] - t; });
  const MOResult same = m_eps_and_o_eps(u, u, 1.5, 0.2, 0.1);
  EXPECT_EQ(same.m, 0.0);
  EXPECT_EQ(same.o, 0.0);
  const auto v = on(g, [](const Point& p, double) { return std::cos(p[0]); });
  const MOResult unreg = m_eps_and_o_eps(v, u, 1.5, 0.0, 0.1);
  EXPECT_EQ(unreg.o, 0.0);
  EXPECT_GT(unreg.m, 0.0);
  EXPECT_THROW(m_eps_and_o_eps(v, u, 1.5, 0.1, 0.0), Error);
}

TEST(Functionals, WeightedDistanceIsBelowM) {
  // (p-1)|b-a|^2 (1+|a|^2+|b|^2)^((p-2)/2) <= <F(b)-F(a), b-a> pointwise.
  const Grid g = Grid::square(-1.0, 1.0, 16, -1.0, 1.0, 16, 0.0, 1.0, 8);
  const auto u = on(g, [](const Point& p, double t) { return std::sin(2.0 * p[0]) * p[1] + t; });
  const auto v = on(g, [](const Point& p, double) { return p[0] * p[1] * p[1]; });
  for (double p : {1.1, 1.5, 1.9})
    EXPECT_LE(weighted_gradient_distance(v, u, p), m_eps_and_o_eps(v, u, p, 0.1, 0.1).m);
}

TEST(Functionals, FundamentalTermsVanishOnAffineAndConstantFields) {
  const Grid g = Grid::square(-1.0, 1.0, 20, -1.0, 1.0, 20, 0.0, 1.0, 20);
  const Cutoff c = make_cutoff(g, box_cutoff(-0.3, 0.3, 0.4, 0.4, 0.6, 0.2));
  const auto lin = on(g, [](const Point& p, double) { return 2.0 * p[0] - p[1]; });
  const auto con = SpaceTimeField(g, 4.0);
  for (const auto* f : {&lin, &con}) {
    const FundamentalTerms t = fundamental_terms(*f, c, 1.6, 0.1, -0.2);
    for (int k = 0; k < 6; ++k) EXPECT_NEAR(t.value(k), 0.0, 1e-12) << "term " << k + 1;
    // VII is a time integral of d/dt(zeta^2)/2 with a constant weight.
    EXPECT_NEAR(t.value(6), 0.0, 1e-6);
  }
}

TEST(Functionals, FundamentalTermsRejectBadExponents) {
  const Grid g = Grid::line(-1.0, 1.0, 20, 0.0, 1.0, 20);
  const Cutoff c = make_cutoff(g, box_cutoff(-0.3, 0.3, 0.4, 0.4, 0.6, 0.2));
  const SpaceTimeField f(g, 1.0);
  try {
    fundamental_terms(f, c, 1.3, 0.1, -0.3);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_parameter);
  }
  EXPECT_THROW(fundamental_terms(f, c, 1.5, 0.0, -0.1), Error);
}

TEST(Functionals, IdentityHoldsOnSolvedFieldUnderRefinement) {
  const double p = 1.6, eps = 0.2, alpha = 0.5 * (p - 2.0);
  const AnalyticSolution b = barenblatt_fast_diffusion(p, 1, 1.0, 1.0);
  std::vector<double> rel;
  for (int f : {1, 2}) {
    const Grid g = Grid::line(-4.0, 4.0, 100 * f, 0.0, 1.0, 100 * f);
    SolverParams sp;
    sp.p = p;
    sp.eps = eps;
    const SolveResult r = solve_regularized(g, sp, BoundaryData::trace(b, 0.0));
    CutoffSpec cs = box_cutoff(-1.5, 1.5, 1.0, 0.3, 0.7, 0.2);
    rel.push_back(fundamental_terms(r.field, make_cutoff(g, cs), p, eps, alpha).relative_residual());
  }
  EXPECT_LE(rel[1], 0.05);
  EXPECT_GE(rel[0] / rel[1], 1.5);
}

// Discrete form of |grad v|^2 <= 4 V |D^2 u|^2: the defect is a stencil
// error that shrinks under refinement.
TEST(Functionals, GradientOfVIsControlledByTheHessian) {
  auto worst_excess = [](int cells) {
    const Grid g = Grid::square(-1.0, 1.0, cells, -1.0, 1.0, cells, 0.0, 1.0, 8);
    const auto u = on(g, [](const Point& p, double) {
      return std::sin(2.0 * p[0]) * std::cos(p[1]) + 0.3 * p[0] * p[1];
    });
    double worst = 0.0;
    for (int i = 2; i <= cells - 2; ++i)
      for (int j = 2; j <= cells - 2; ++j) {
        const LocalJet jet = local_jet(u, 3, {i, j}, 0.1);
        worst = std::max(worst, norm_sq(jet.grad_v) - 4.0 * jet.V * jet.hess_sq);
      }
    return worst;
  };
  const double coarse = worst_excess(20), fine = worst_excess(40);
  EXPECT_LE(fine, 0.05);
  EXPECT_TRUE(fine <= 0.0 || fine <= coarse / 3.0) << coarse << " " << fine;
}

TEST(Functionals, BracesFactor) {
  const Grid g = Grid::line(-1.0, 1.0, 20, 0.0, 1.0, 8);
  const SpaceTimeField flat(g, 2.0);
  EXPECT_DOUBLE_EQ(onedim_braces_factor(flat, 0.3, 1.4, {5, 0}, 2), 1.0);
  const auto steep = on(g, [](const Point& p, double) { return 1e8 * p[0]; });
  EXPECT_NEAR(onedim_braces_factor(steep, 0.3, 1.4, {5, 0}, 2), 0.16, 1e-12);
  for (double p : {1.1, 1.5, 1.9}) {
    const CampaignResult r = braces_campaign(p, 100000, 11);
    EXPECT_EQ(r.violations, 0u) << (r.counterexamples.empty() ? "" : r.counterexamples.front());
  }
}

TEST(Functionals, TimeDerivativeIsSecondOrderInTau) {
  const AnalyticSolution b = barenblatt_fast_diffusion(1.5, 1, 1.0, 1.0);
  auto err = [&](int nt) {
    const Grid g = Grid::line(-2.0, 2.0, 8, 0.0, 1.0, nt);
    const SpaceTimeField ut = time_derivative_field(sample(g, b));
    double m = 0.0;
    for (int l = 0; l < g.levels(); ++l)
      for (int i = 0; i <= 8; ++i)
        m = std::max(m, std::abs(ut(l, {i, 0}) - b.time_derivative(g.point({i, 0}), g.t(l))));
    return m;
  };
  EXPECT_GE(err(20) / err(40), 3.0);
}

TEST(Functionals, UtThetaMass) {
  const Grid g = Grid::line(0.0, 1.0, 10, 0.0, 1.0, 10);
  const Region all = full_region(g);
  const auto still = on(g, [](const Point& p, double) { return std::exp(p[0]); });
  EXPECT_EQ(ut_theta_mass(still, 2.0, all), 0.0);
  const auto t = on(g, [](const Point&, double s) { return s; });
  EXPECT_NEAR(ut_theta_mass(t, 2.0, all), 1.0, 1e-12);
  try {
    ut_theta_mass(t, 1.0, all);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_exponent);
  }
}

TEST(Functionals, FluxDerivativeEnvelope) {
  const Grid g = Grid::line(-1.0, 1.0, 20, 0.0, 1.0, 8);
  const auto lin = on(g, [](const Point& p, double) { return 3.0 * p[0]; });
  EXPECT_LE(flux_derivative_bound_field(lin, 1.5, 0.1).max_abs(), 1e-10);
  const double p = 1.4;
  const auto quad = on(g, [](const Point& x, double) { return 0.5 * x[0] * x[0]; });
  const SpaceTimeField env = flux_derivative_bound_field(quad, p, 1.0);
  for (int i = 1; i < 20; ++i) {
    const double x = g.point({i, 0})[0];
    EXPECT_NEAR(env(3, {i, 0}), 2.0 * std::pow(x * x + 1.0, 0.5 * (p - 2.0)), 1e-10);
  }
}

}  // namespace
}  // namespace plaplab
