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


// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
// below. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "plaplab/verifier.hpp"

using namespace plaplab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Every solve of the suite goes through here so that criterion 11 can
// check all of them.
std::vector<Verdict> g_max_principle;

SolveResult solve(const Grid& g, double p, double eps, const BoundaryData& b) {
  SolverParams sp;
  sp.p = p;
  sp.eps = eps;
  SolveResult r = solve_regularized(g, sp, b);
  g_max_principle.push_back(max_principle_check(r.field, 1e-9));
  return r;
}

std::vector<SpaceTimeField> solve_all(const Grid& g, const SweepPlan& plan, const BoundaryData& b) {
  std::vector<SpaceTimeField> out;
  for (double eps : plan.eps) out.push_back(solve(g, plan.p, eps, b).field);
  return out;
}

double relative_l2(const SpaceTimeField& f, const SpaceTimeField& ref) {
  const Region all = full_region(f.grid);
  return lp_norm_of(f.grid, all, 2.0, [&](int l, const Node& n) { return f(l, n) - ref(l, n); }) /
         lp_norm(ref, 2.0, all);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string join(const std::vector<double>& v, const char* f = "%.4g") {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + fmt(f, v[k]);
  return s;
}

double max_ratio(const std::vector<double>& v) {
  return bounded_sequence_verdict("", v).left;
}

int g_failed = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %02d %-28s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failed;
}

void info(const std::string& detail) {
  std::printf("     .. %s\n", detail.c_str());
  std::fflush(stdout);
}

void guarded(int id, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

// Standard one-dimensional configuration: source-type profile with C = 1,
// t0 = 1 on x in (-4, 4), t in (0, 1).
Grid standard_grid(int factor = 1) { return Grid::line(-4.0, 4.0, 200 * factor, 0.0, 1.0, 200 * factor); }

CutoffSpec standard_cutoff() {
  CutoffSpec c;
  c.plateau[0] = {-1.5, 1.5};
  c.ramp[0] = 1.0;
  c.time_plateau = {0.3, 0.7};
  c.time_ramp = 0.2;
  return c;
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const SweepPlan default_plan;
  std::printf("acceptance: eps sweep %s\n", join(default_plan.eps).c_str());

  // 1. Oracle accuracy --------------------------------------------------
  SpaceTimeField oracle_solve;
  guarded(1, "oracle-accuracy", [&] {
    const auto t0 = Clock::now();
    const AnalyticSolution b = barenblatt_fast_diffusion(1.5, 1, 1.0, 1.0);
    std::vector<double> err;
    for (int f : {1, 2}) {
      const Grid g = standard_grid(f);
      SolveResult r = solve(g, 1.5, 1e-3, BoundaryData::trace(b, 0.0));
      err.push_back(relative_l2(r.field, sample(g, b)));
      if (f == 1) oracle_solve = std::move(r.field);
    }
    const double secs = seconds_since(t0);
    const double shrink = err[0] / err[1];
    report(1, "oracle-accuracy", err[0] <= 2e-2 && shrink >= 1.5 && secs <= 60.0,
           fmt("rel L2 %.3e (<= 2e-2), halving ratio %.2f (>= 1.5), %.1f s (<= 60)", err[0],
               shrink, secs));
  });

  // 2. Affine exactness -------------------------------------------------
  guarded(2, "affine-exactness", [&] {
    double worst = 0.0;
    const std::vector<double> s1{1.0}, s2{2.0, -1.0};
    const AnalyticSolution l1 = linear_solution(s1, 0.3);
    const AnalyticSolution l2 = linear_solution(s2, 0.5);
    const Grid g1 = Grid::line(-1.0, 2.0, 40, 0.0, 1.0, 20);
    const Grid g2 = Grid::square(-1.0, 1.0, 16, 0.0, 1.5, 12, 0.0, 1.0, 10);
    for (double p : {1.1, 1.5, 1.9})
      for (double eps : {0.0, 0.5, 1.0})
        for (const auto& [g, sol] : {std::pair{g1, l1}, std::pair{g2, l2}}) {
          const SolveResult r = solve(g, p, eps, BoundaryData::trace(sol, 0.0));
          const SpaceTimeField ex = sample(g, sol);
          for (std::size_t k = 0; k < ex.values.size(); ++k)
            worst = std::max(worst, std::abs(r.field.values[k] - ex.values[k]));
        }
    report(2, "affine-exactness", worst <= 1e-9,
           fmt("max nodal deviation %.2e (<= 1e-9) over p {1.1,1.5,1.9} x eps {0,0.5,1}, n = 1, 2",
               worst));
  });

  // 3-5. Standard sweep ---------------------------------------------------
  ConvergenceStudy study;
  bool have_study = false;
  guarded(3, "sign-of-W", [&] {
    const AnalyticSolution b = barenblatt_fast_diffusion(1.5, 1, 1.0, 1.0);
    SweepPlan plan;
    plan.p = 1.5;
    plan.refinements = {1, 2, 4};
    study = convergence_study(standard_grid(), plan, BoundaryData::trace(b, 0.0), b);
    have_study = true;
    for (const auto& f : study.fields) g_max_principle.push_back(max_principle_check(f, 1e-9));
    const auto& rep = study.report;
    bool ok = true;
    std::string per_level;
    for (std::size_t lev = 0; lev < rep.w_tol_by_level.size(); ++lev) {
      double worst = -1e300;
      for (double w : rep.w_by_level[lev]) worst = std::max(worst, w);
      ok = ok && worst <= rep.w_tol_by_level[lev];
      per_level += fmt("x%d: max W %.2e <= tol %.2e; ", plan.refinements[lev], worst,
                       rep.w_tol_by_level[lev]);
    }
    const double shrink = rep.w_tol_by_level[0] / rep.w_tol_by_level[1];
    ok = ok && shrink >= 1.5;
    report(3, "sign-of-W", ok, per_level + fmt("tol shrink %.2f (>= 1.5)", shrink));
    info("W at base grid: " + join(rep.w_by_level[0], "%.3e"));
  });

  guarded(4, "uniform-gradient-bound", [&] {
    require(have_study, ErrorKind::precondition, "sweep unavailable");
    const auto& e = study.report.entries;
    const double a = e[e.size() - 2].grad_p_mass, b = e.back().grad_p_mass;
    const double change = std::abs(a - b) / b;
    double worst = 0.0;
    for (const auto& x : e) worst = std::max(worst, x.grad_p_mass);
    report(4, "uniform-gradient-bound", change <= 0.2 && worst <= study.report.k,
           fmt("last-two change %.2f%% (<= 20%%), max mass %.4f <= K %.4f (C_p %.4f)",
               100.0 * change, worst, study.report.k, study.report.c_p));
    std::vector<double> masses;
    for (const auto& x : e) masses.push_back(x.grad_p_mass);
    info("gradient p-mass: " + join(masses));
  });

  guarded(5, "convergence", [&] {
    require(have_study, ErrorKind::precondition, "sweep unavailable");
    const auto& e = study.report.entries;
    bool mono = true;
    for (std::size_t k = 1; k < e.size(); ++k) {
      mono = mono && e[k].l2_dist <= 1.05 * e[k - 1].l2_dist;
      mono = mono && e[k].grad_lp_dist <= 1.05 * e[k - 1].grad_lp_dist;
      mono = mono && e[k].o <= 1.05 * e[k - 1].o;
    }
    const double l2 = e.back().l2_rel, gl = e.back().grad_lp_rel;
    const double o_drop = e.back().o / e.front().o;
    report(5, "convergence", mono && l2 <= 0.05 && gl <= 0.05 && o_drop <= 1e-2,
           fmt("monotone (5%% slack) %s, final rel L2 %.2e, rel grad L^p %.2e (<= 0.05), "
               "O_last/O_first %.1e (<= 1e-2)",
               mono ? "yes" : "no", l2, gl, o_drop));
    std::vector<double> a, b, o;
    for (const auto& x : e) {
      a.push_back(x.l2_rel);
      b.push_back(x.grad_lp_rel);
      o.push_back(x.o);
    }
    info("rel L2: " + join(a, "%.3e") + " | rel grad L^p: " + join(b, "%.3e") +
         " | O_eps: " + join(o, "%.3e"));
  });

  // 6. Identity ---------------------------------------------------------------
  guarded(6, "fundamental-identity", [&] {
    const double p = 1.6, eps = 0.1, alpha = 0.5 * (p - 2.0);
    const AnalyticSolution b = barenblatt_fast_diffusion(p, 1, 1.0, 1.0);
    std::vector<FundamentalTerms> terms;
    for (int f : {1, 2}) {
      const Grid g = standard_grid(f);
      const SolveResult r = solve(g, p, eps, BoundaryData::trace(b, 0.0));
      terms.push_back(fundamental_terms(r.field, make_cutoff(g, standard_cutoff()), p, eps, alpha));
    }
    const TermVIForm form = calibrate_term_vi(terms[0], terms[1]);
    const double r0 = terms[0].with_vi(form).relative_residual();
    const double r1 = terms[1].with_vi(form).relative_residual();
    report(6, "fundamental-identity", r0 <= 0.05 && r0 / r1 >= 1.5,
           fmt("relative residual %.2e (<= 0.05) -> %.2e, ratio %.2f (>= 1.5); term VI form %s",
               r0, r1, r0 / r1, to_string(form).c_str()));
    const TermVIForm other =
        form == TermVIForm::gradient_v ? TermVIForm::gradient_u : TermVIForm::gradient_v;
    info(fmt("other term VI form %s: relative residual %.2e -> %.2e", to_string(other).c_str(),
             terms[0].with_vi(other).relative_residual(),
             terms[1].with_vi(other).relative_residual()));
  });

  // 7-8. Regime bounds and time-derivative masses -------------------------------
  std::vector<SpaceTimeField> steep16, bump12;
  SweepPlan plan16, plan12;
  guarded(7, "regime-bounds", [&] {
    // (a) p = 1.6, source-type profile with C = 0.3 (gradients up to ~5).
    plan16.p = 1.6;
    const Grid ga = standard_grid();
    const AnalyticSolution ba = barenblatt_fast_diffusion(1.6, 1, 0.3, 1.0);
    steep16 = solve_all(ga, plan16, BoundaryData::trace(ba, 0.0));
    const Cutoff ca = make_cutoff(ga, standard_cutoff());
    std::vector<double> wa;
    bool thr = true;
    for (std::size_t k = 0; k < steep16.size(); ++k) {
      const Verdict v = verify_case_p_above_threshold(steep16[k], ca, 1.6, plan16.eps[k], 0.05);
      thr = thr && v.pass;
      wa.push_back(v.measured.at("weighted_hessian"));
    }

    // (b) n = 1, p = 1.3, C = 1e-3 on (-2, 2) (gradients up to ~80).
    SweepPlan plan13;
    plan13.p = 1.3;
    const Grid gb = Grid::line(-2.0, 2.0, 200, 0.0, 1.0, 200);
    const AnalyticSolution bb = barenblatt_fast_diffusion(1.3, 1, 1e-3, 1.0);
    const auto fb = solve_all(gb, plan13, BoundaryData::trace(bb, 0.0));
    CutoffSpec cb;
    cb.plateau[0] = {-0.3, 0.3};
    cb.ramp[0] = 0.3;
    cb.time_plateau = {0.3, 0.7};
    cb.time_ramp = 0.2;
    const Cutoff cutb = make_cutoff(gb, cb);
    std::vector<OneDimMeasurement> mb;
    std::vector<double> wb;
    for (std::size_t k = 0; k < fb.size(); ++k) {
      mb.push_back(measure_onedim_estimate(fb[k], cutb, 1.3, plan13.eps[k]));
      wb.push_back(mb.back().weighted_hessian);
    }
    const Verdict spread = onedim_sweep_verdict(mb);

    // (c) n = 2, p = 1.2, theta = 1.2: u0 = 1 + 100 cos(pi x/2) cos(pi y/2), lateral 1.
    plan12.p = 1.2;
    const double T = 3.0;
    const Grid gc = Grid::square(-1.0, 1.0, 48, -1.0, 1.0, 48, 0.0, T, 48);
    BoundaryData bc;
    bc.lateral = [](const Point&, double) { return 1.0; };
    bc.initial = [](const Point& x) {
      return 1.0 + 100.0 * std::cos(0.5 * std::numbers::pi * x[0]) *
                       std::cos(0.5 * std::numbers::pi * x[1]);
    };
    bump12 = solve_all(gc, plan12, bc);
    CutoffSpec ccs;
    ccs.plateau[0] = {-0.4, 0.4};
    ccs.plateau[1] = {-0.4, 0.4};
    ccs.ramp = {0.4, 0.4};
    ccs.time_plateau = {0.3 * T, 0.7 * T};
    ccs.time_ramp = 0.2 * T;
    const Cutoff cc = make_cutoff(gc, ccs);
    std::vector<double> wc;
    bool theta_ok = true;
    for (std::size_t k = 0; k < bump12.size(); ++k) {
      const Verdict v = verify_theta_bound(bump12[k], cc, 1.2, plan12.eps[k], 1.2);
      theta_ok = theta_ok && v.pass;
      wc.push_back(v.measured.at("weighted_hessian"));
    }

    const double ra = max_ratio(wa), rb = max_ratio(wb), rc = max_ratio(wc);
    report(7, "regime-bounds", ra <= 1.5 && rb <= 1.5 && rc <= 1.5,
           fmt("max consecutive ratio (<= 1.5): (a) %.3f (b) %.3f (c) %.3f", ra, rb, rc));
    info("(a) p=1.6 weighted Hessian: " + join(wa) +
         fmt("; estimate inequality holds at every eps: %s", thr ? "yes" : "no"));
    {
      // Same measurement on the C = 1 profile, where gradients stay O(1) and
      // the sweep has not reached eps << |grad u| at its coarse end.
      const AnalyticSolution b1 = barenblatt_fast_diffusion(1.6, 1, 1.0, 1.0);
      const auto f1 = solve_all(ga, plan16, BoundaryData::trace(b1, 0.0));
      std::vector<double> w1;
      for (std::size_t k = 0; k < f1.size(); ++k)
        w1.push_back(verify_case_p_above_threshold(f1[k], ca, 1.6, plan16.eps[k], 0.05)
                         .measured.at("weighted_hessian"));
      info("(a') C=1 profile, not gated: " + join(w1) + fmt(" (max ratio %.3f)", max_ratio(w1)));
    }
    info("(b) p=1.3 weighted Hessian: " + join(wb) +
         fmt("; C(p) spread max/min %.2f (<= 4): %s", spread.left / spread.measured.at("C_min"),
             spread.pass ? "yes" : "no"));
    info("(c) p=1.2 theta=1.2 weighted Hessian: " + join(wc) +
         fmt("; combined estimate holds at every eps: %s", theta_ok ? "yes" : "no"));
  });

  guarded(8, "time-derivative-summability", [&] {
    require(!steep16.empty() && !bump12.empty(), ErrorKind::precondition, "sweeps unavailable");
    const Region ra = region_from_box(steep16[0].grid, {{{-2.5, 2.5}, {0.0, 0.0}}}, {0.2, 0.8});
    const SummabilityStudy a = ut_summability_study(steep16, plan16, 2.0, ra);
    const Region rc = region_from_box(bump12[0].grid, {{{-0.8, 0.8}, {-0.8, 0.8}}}, {0.3, 2.7});
    const SummabilityStudy c = ut_summability_study(bump12, plan12, 1.2, rc);
    double worst = 0.0;
    bool ok = true;
    for (const auto* s : {&a, &c})
      for (const Verdict& v : s->verdicts) {
        ok = ok && v.pass;
        worst = std::max(worst, v.left);
      }
    report(8, "time-derivative-summability", ok,
           fmt("max consecutive ratio %.3f (<= 1.5) over u_t and envelope masses", worst));
    info("p=1.6 theta=2: u_t mass " + join(a.ut_mass) + " | envelope " + join(a.envelope_mass));
    info("p=1.2 theta=1.2: u_t mass " + join(c.ut_mass) + " | envelope " +
         join(c.envelope_mass));
  });

  // 9. Inequality campaigns -----------------------------------------------------
  guarded(9, "inequality-campaigns", [&] {
    const auto t0 = Clock::now();
    std::size_t violations = 0, samples = 0;
    std::uint64_t seed = 97;
    std::vector<CampaignResult> all;
    for (double p : {1.1, 1.5, 1.9}) {
      all.push_back(scalar_inequality_campaign(p, 100000, seed++));
      all.push_back(vector_inequality_campaign(p, 100000, seed++));
    }
    for (const auto& r : all) {
      violations += r.violations;
      samples += r.samples;
      for (const auto& ce : r.counterexamples) info(r.name + " counterexample: " + ce);
    }
    const double secs = seconds_since(t0);
    report(9, "inequality-campaigns", violations == 0 && secs <= 10.0,
           fmt("%zu violations in %zu samples (6 campaigns of 1e5), %.2f s (<= 10)", violations,
               samples, secs));
  });

  // 10. Benilan-Crandall ----------------------------------------------------------
  guarded(10, "benilan-crandall", [&] {
    const AnalyticSolution b = barenblatt_fast_diffusion(1.5, 1, 1.0, 1.0);
    const Verdict va = benilan_crandall_check(b, standard_grid(), 1.5, 1.0, 1e-9);
    require(oracle_solve.values.size() > 0, ErrorKind::precondition, "solved field unavailable");
    const double slack = 5.0 * max_pde_residual(oracle_solve, 1.5, 1e-3);
    const Verdict vs = benilan_crandall_check(oracle_solve, 1.5, 1.0, slack);
    report(10, "benilan-crandall", va.pass && vs.pass,
           fmt("analytic max excess %.2e (slack 1e-9); solved max excess %.2e (slack %.2e)",
               va.left, vs.left, vs.slack));
  });

  // 11. Maximum principle -----------------------------------------------------------
  guarded(11, "maximum-principle", [&] {
    double worst = -1e300;
    bool ok = true;
    for (const Verdict& v : g_max_principle) {
      ok = ok && v.pass;
      worst = std::max(worst, v.left);
    }
    report(11, "maximum-principle", ok && !g_max_principle.empty(),
           fmt("%zu solves, worst excess over parabolic-boundary bounds %.2e (<= 1e-9)",
               g_max_principle.size(), worst));
  });

  std::printf("acceptance: %d failed, %.1f s total\n", g_failed, seconds_since(start));
  return g_failed == 0 ? 0 : 1;
}
