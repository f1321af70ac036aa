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

// Experiment runner behind the command line tool: builds a validated
// experiment from a Config, runs one pipeline and returns the report
// document plus the files to write.

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "plaplab/config.hpp"
#include "plaplab/field_io.hpp"
#include "plaplab/verifier.hpp"

namespace plaplab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "plaplab-report/1";

enum class ExperimentKind { solve, sweep, verify_estimates, refine_study, property_tests };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::solve: return "solve";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::verify_estimates: return "verify-estimates";
    case ExperimentKind::refine_study: return "refine-study";
    case ExperimentKind::property_tests: return "property-tests";
  }
  return "unknown";
}

inline ExperimentKind parse_kind(const std::string& s) {
  if (s == "solve") return ExperimentKind::solve;
  if (s == "sweep") return ExperimentKind::sweep;
  if (s == "verify" || s == "verify-estimates") return ExperimentKind::verify_estimates;
  if (s == "refine" || s == "refine-study") return ExperimentKind::refine_study;
  if (s == "proptest" || s == "property-tests") return ExperimentKind::property_tests;
  throw Error(ErrorKind::config, "kind: unknown experiment kind '" + s + "'");
}

/// Initial/boundary data family.
struct DataSpec {
  std::string kind = "barenblatt";  // barenblatt | linear | constant | cosine-bump
  double mass = 1.0;                // Barenblatt C
  double t0 = 1.0;                  // Barenblatt time shift
  std::vector<double> slope{1.0};
  double offset = 0.0;
  double value = 0.0;
  double base = 1.0;       // cosine-bump lateral value
  double amplitude = 0.5;  // cosine-bump height
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::solve;
  Grid grid = Grid::line(-4.0, 4.0, 200, 0.0, 1.0, 200);
  SolverParams solver{};
  DataSpec data{};
  EstimateParams estimates{};
  SweepPlan plan{};
  CutoffSpec cutoff{};
  std::array<std::array<double, 2>, 2> region_box{};
  std::array<double, 2> region_time{};
  std::string reference = "analytic";  // analytic | smallest-eps
  std::uint64_t seed = 20260101;
  std::size_t proptest_samples = 100000;
  std::vector<double> proptest_p{1.1, 1.5, 1.9};
  std::map<std::string, std::string> echo;  // the parsed key/value pairs
};

/// Default alpha: (p-2)/2 above p = 3/2, the middle of (1-p, 0)/2 below.
inline double default_alpha(double p) { return p > 1.5 ? 0.5 * (p - 2.0) : -0.25 * (p - 1.0); }

/// Reads and validates everything before any computation starts.
inline ExperimentConfig make_experiment(const Config& c, std::optional<ExperimentKind> kind = {}) {
  ExperimentConfig e;
  e.echo = c.entries();
  if (c.has("kind")) {
    const ExperimentKind k = parse_kind(c.str("kind"));
    require(!kind || *kind == k, ErrorKind::config,
            "kind: config says '" + to_string(k) + "' but the subcommand is '" +
                to_string(*kind) + "'");
    e.kind = k;
  } else {
    require(kind.has_value(), ErrorKind::config, "kind: required key missing");
    e.kind = *kind;
  }

  // grid
  const int n = static_cast<int>(c.integer("grid.n", 1));
  require(n == 1 || n == 2, ErrorKind::config, "grid.n: must be 1 or 2");
  auto cells = [&](const std::string& key, long long fallback) {
    const long long v = c.integer(key, fallback);
    require(v >= 8 && v <= 1 << 20, ErrorKind::config, key + ": needs at least 8 cells");
    return static_cast<int>(v);
  };
  const double x_lo = c.num("grid.x_lo", -4.0), x_hi = c.num("grid.x_hi", 4.0);
  const double t_lo = c.num("grid.t_lo", 0.0), t_hi = c.num("grid.t_hi", 1.0);
  require(x_hi > x_lo, ErrorKind::config, "grid.x_hi: must exceed grid.x_lo");
  require(t_hi > t_lo, ErrorKind::config, "grid.t_hi: must exceed grid.t_lo");
  const int nx = cells("grid.nx", 200), nt = cells("grid.nt", 200);
  if (n == 1) {
    e.grid = Grid::line(x_lo, x_hi, nx, t_lo, t_hi, nt);
  } else {
    const double y_lo = c.num("grid.y_lo", x_lo), y_hi = c.num("grid.y_hi", x_hi);
    require(y_hi > y_lo, ErrorKind::config, "grid.y_hi: must exceed grid.y_lo");
    e.grid = Grid::square(x_lo, x_hi, nx, y_lo, y_hi, cells("grid.ny", nx), t_lo, t_hi, nt);
  }

  // solver
  e.solver.p = c.num("solver.p", 1.5);
  e.solver.eps = c.num("solver.eps", 0.01);
  e.solver.picard_tol = c.num("solver.picard_tol", e.solver.picard_tol);
  e.solver.picard_max_iters =
      static_cast<int>(c.integer("solver.picard_max_iters", e.solver.picard_max_iters));
  e.solver.linear_tol = c.num("solver.linear_tol", e.solver.linear_tol);
  const double p = e.solver.p;
  require(p > 1.0 && p <= 2.0, ErrorKind::config, "solver.p: must lie in (1, 2]");
  require(e.solver.eps >= 0.0, ErrorKind::config, "solver.eps: must be nonnegative");
  require(e.solver.picard_tol > 0.0, ErrorKind::config, "solver.picard_tol: must be positive");
  require(e.solver.picard_max_iters > 0, ErrorKind::config,
          "solver.picard_max_iters: must be positive");
  require(e.solver.linear_tol > 0.0, ErrorKind::config, "solver.linear_tol: must be positive");

  // data
  e.data.kind = c.str("data.kind", "barenblatt");
  e.data.mass = c.num("data.mass", 1.0);
  e.data.t0 = c.num("data.t0", 1.0);
  e.data.slope = c.list("data.slope", std::vector<double>(static_cast<std::size_t>(n), 1.0));
  e.data.offset = c.num("data.offset", 0.0);
  e.data.value = c.num("data.value", 0.0);
  e.data.base = c.num("data.base", 1.0);
  e.data.amplitude = c.num("data.amplitude", 0.5);
  if (e.data.kind == "barenblatt") {
    require(p < 2.0, ErrorKind::config, "data.kind: Barenblatt data needs p < 2");
    require(e.data.mass > 0.0, ErrorKind::config, "data.mass: must be positive");
    require(e.data.t0 > 0.0, ErrorKind::config, "data.t0: must be positive");
    require(n * (p - 2.0) + p > 0.0, ErrorKind::config,
            "data.kind: Barenblatt profile needs n(p-2)+p > 0");
  } else if (e.data.kind == "linear") {
    require(e.data.slope.size() == static_cast<std::size_t>(n), ErrorKind::config,
            "data.slope: needs one entry per spatial axis");
  } else {
    require(e.data.kind == "constant" || e.data.kind == "cosine-bump", ErrorKind::config,
            "data.kind: expected barenblatt, linear, constant or cosine-bump");
  }

  // estimates
  e.estimates.alpha = c.num("estimate.alpha", default_alpha(p));
  e.estimates.sigma = c.num("estimate.sigma", 0.5 * (p - 1.0 + 2.0 * e.estimates.alpha));
  e.estimates.delta = c.num("estimate.delta", 0.1);
  const bool small_p_route = p < 1.5 && n >= 2;
  e.estimates.theta = c.num("estimate.theta", small_p_route ? 0.5 * (1.0 + 1.0 / (2.0 - p)) : 2.0);
  e.estimates.kappa = c.num("estimate.kappa", 0.05);
  if (p < 2.0) {
    require(2.0 * e.estimates.alpha < 0.0 && 2.0 * e.estimates.alpha > 1.0 - p, ErrorKind::config,
            "estimate.alpha: must satisfy 1 - p < 2 alpha < 0");
    require(e.estimates.sigma > 0.0 && e.estimates.sigma < p - 1.0 + 2.0 * e.estimates.alpha,
            ErrorKind::config, "estimate.sigma: must satisfy 0 < sigma < p - 1 + 2 alpha");
  }
  require(e.estimates.delta > 0.0, ErrorKind::config, "estimate.delta: must be positive");
  require(e.estimates.kappa > 0.0, ErrorKind::config, "estimate.kappa: must be positive");
  if (small_p_route)
    require(e.estimates.theta > 1.0 && e.estimates.theta < 1.0 / (2.0 - p), ErrorKind::config,
            "estimate.theta: must satisfy 1 < theta < 1/(2-p) for p < 3/2 and n >= 2");
  else
    require(e.estimates.theta == 2.0, ErrorKind::config,
            "estimate.theta: must be 2 for p >= 3/2 or n = 1");

  // sweep plan
  e.plan.p = p;
  e.plan.eps = c.list("sweep.eps_list", e.plan.eps);
  std::vector<double> refs = c.list("sweep.refinements", {1.0});
  e.plan.refinements.clear();
  for (double r : refs) {
    require(r >= 1.0 && r == std::floor(r), ErrorKind::config,
            "sweep.refinements: factors must be positive integers");
    e.plan.refinements.push_back(static_cast<int>(r));
  }
  e.plan.estimates = e.estimates;
  try {
    e.plan.validate();
  } catch (const Error& err) {
    throw Error(ErrorKind::config, std::string("sweep.eps_list: ") + err.what());
  }

  // cutoff: middle third plateau with one-sixth ramps unless given
  const Grid& g = e.grid;
  for (int a = 0; a < n; ++a) {
    const std::string ax = a == 0 ? "x" : "y";
    const double lo = g.axis(a).lo, len = g.axis(a).length();
    const auto pl = c.list("cutoff.plateau_" + ax, {lo + len / 3.0, lo + 2.0 * len / 3.0});
    require(pl.size() == 2, ErrorKind::config, "cutoff.plateau_" + ax + ": expected lo, hi");
    e.cutoff.plateau[a] = {pl[0], pl[1]};
    e.cutoff.ramp[a] = c.num("cutoff.ramp_" + ax, len / 6.0 - 1e-9 * len);
  }
  const double tl = g.time().lo, tlen = g.time().length();
  const auto tp = c.list("cutoff.time_plateau", {tl + tlen / 3.0, tl + 2.0 * tlen / 3.0});
  require(tp.size() == 2, ErrorKind::config, "cutoff.time_plateau: expected lo, hi");
  e.cutoff.time_plateau = {tp[0], tp[1]};
  e.cutoff.time_ramp = c.num("cutoff.time_ramp", tlen / 6.0 - 1e-9 * tlen);
  try {
    require_cutoff_fits(g, make_cutoff(g, e.cutoff));
  } catch (const Error& err) {
    throw Error(ErrorKind::config, std::string("cutoff: ") + err.what());
  }

  // interior region for the time-derivative masses
  for (int a = 0; a < n; ++a) {
    const std::string ax = a == 0 ? "x" : "y";
    const double lo = g.axis(a).lo, len = g.axis(a).length();
    const auto r = c.list("region." + ax, {lo + len / 8.0, lo + 7.0 * len / 8.0});
    require(r.size() == 2, ErrorKind::config, "region." + ax + ": expected lo, hi");
    e.region_box[a] = {r[0], r[1]};
  }
  const auto rt = c.list("region.t", {tl + tlen / 8.0, tl + 7.0 * tlen / 8.0});
  require(rt.size() == 2, ErrorKind::config, "region.t: expected lo, hi");
  e.region_time = {rt[0], rt[1]};
  try {
    validate(g, region_from_box(g, e.region_box, e.region_time), true);
  } catch (const Error& err) {
    throw Error(ErrorKind::config, std::string("region: ") + err.what());
  }

  e.reference = c.str("reference", "analytic");
  require(e.reference == "analytic" || e.reference == "smallest-eps", ErrorKind::config,
          "reference: expected analytic or smallest-eps");
  if (e.reference == "analytic")
    require(e.data.kind != "cosine-bump", ErrorKind::config,
            "reference: cosine-bump data has no analytic solution; use smallest-eps");

  e.seed = static_cast<std::uint64_t>(c.integer("seed", static_cast<long long>(e.seed)));
  e.proptest_samples =
      static_cast<std::size_t>(c.integer("proptest.samples", static_cast<long long>(100000)));
  require(e.proptest_samples > 0, ErrorKind::config, "proptest.samples: must be positive");
  e.proptest_p = c.list("proptest.p_list", e.proptest_p);
  for (double q : e.proptest_p)
    require(q > 1.0 && q <= 2.0, ErrorKind::config, "proptest.p_list: entries must lie in (1, 2]");
  c.str("output.dir", "");

  const auto extra = c.unused();
  require(extra.empty(), ErrorKind::config,
          (extra.empty() ? std::string() : extra.front()) + ": unknown key");
  return e;
}

inline std::optional<AnalyticSolution> analytic_solution(const ExperimentConfig& e) {
  const int n = e.grid.dim();
  if (e.data.kind == "barenblatt")
    return barenblatt_fast_diffusion(e.solver.p, n, e.data.mass, e.data.t0);
  if (e.data.kind == "linear") return linear_solution(e.data.slope, e.data.offset);
  if (e.data.kind == "constant") return constant_solution(n, e.data.value);
  return std::nullopt;
}

/// Analytic families are evaluated in the grid's absolute time coordinate.
inline BoundaryData boundary_data(const ExperimentConfig& e) {
  if (auto sol = analytic_solution(e)) return BoundaryData::trace(*sol, e.grid.time().lo);
  const Grid g = e.grid;
  const double base = e.data.base, amp = e.data.amplitude;
  BoundaryData b;
  b.lateral = [base](const Point&, double) { return base; };
  b.initial = [g, base, amp](const Point& x) {
    double v = amp;
    for (int a = 0; a < g.dim(); ++a)
      v *= std::sin(std::numbers::pi * (x[a] - g.axis(a).lo) / g.axis(a).length());
    return base + v;
  };
  return b;
}

// ---------------------------------------------------------------------------
// JSON helpers

inline Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const Verdict& v) {
  Json j;
  j["name"] = v.name;
  j["left"] = json_number(v.left);
  j["right"] = json_number(v.right);
  j["slack"] = json_number(v.slack);
  j["pass"] = v.pass;
  if (!v.grid.empty()) j["grid"] = v.grid;
  Json params = Json::object();
  for (const auto& [k, x] : v.params) params[k] = json_number(x);
  j["params"] = params;
  Json measured = Json::object();
  for (const auto& [k, x] : v.measured) measured[k] = json_number(x);
  j["measured"] = measured;
  return j;
}

inline Json to_json(const SolveLog& log) {
  Json j;
  j["steps"] = log.picard_iterations.size();
  j["picard_iterations_total"] = log.total_picard();
  int worst = 0;
  for (int k : log.picard_iterations) worst = std::max(worst, k);
  j["picard_iterations_max"] = worst;
  long long lin = 0;
  for (int k : log.linear_iterations) lin += k;
  j["linear_iterations_total"] = lin;
  j["failed"] = log.failed;
  j["failed_step"] = log.failed_step;
  j["floored"] = log.floored;
  return j;
}

inline Json to_json(const FundamentalTerms& t) {
  static const char* names[] = {"term_I", "term_II", "term_III", "term_IV",
                                "term_V", "term_VI", "term_VII"};
  Json j;
  for (int k = 0; k < 7; ++k) j[names[k]] = json_number(t.value(k));
  j["term_VI_form"] = to_string(t.vi_form);
  j["term_VI_gradient_u_variant"] = json_number(t.coefficient[5] * t.vi_raw_gradient_u);
  j["residual"] = json_number(t.residual());
  j["relative_residual"] = json_number(t.relative_residual());
  return j;
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string render() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k];
    os << "\n";
    for (const auto& r : rows) {
      for (std::size_t k = 0; k < r.size(); ++k) {
        if (k) os << ",";
        if (std::isfinite(r[k])) os << r[k];
        else os << "nan";
      }
      os << "\n";
    }
    return os.str();
  }
};

// ---------------------------------------------------------------------------
// Pipelines

struct RunOutput {
  Json report;
  std::map<std::string, std::string> files;  // relative name -> bytes (excluding report.json)
  int status = 0;                            // 0 ok, 3 some verdict failed
};

namespace detail {

inline Json header(const ExperimentConfig& e) {
  Json j;
  j["schema"] = kReportSchema;
  j["kind"] = to_string(e.kind);
  Json cfg = Json::object();
  for (const auto& [k, v] : e.echo) cfg[k] = v;
  j["config"] = cfg;
  return j;
}

inline Region experiment_region(const ExperimentConfig& e) {
  return region_from_box(e.grid, e.region_box, e.region_time);
}

inline int status_of(const Json& verdicts) {
  for (const auto& v : verdicts)
    if (!v.value("pass", false)) return 3;
  return 0;
}

inline double relative_l2_error(const SpaceTimeField& f, const SpaceTimeField& ref) {
  const Region all = full_region(f.grid);
  const double num =
      lp_norm_of(f.grid, all, 2.0, [&](int l, const Node& n) { return f(l, n) - ref(l, n); });
  const double den = lp_norm(ref, 2.0, all);
  return den > 0.0 ? num / den : num;
}

inline double max_abs_difference(const SpaceTimeField& a, const SpaceTimeField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

}  // namespace detail

inline RunOutput run_solve(const ExperimentConfig& e) {
  RunOutput out;
  out.report = detail::header(e);
  const SolveResult r = solve_regularized(e.grid, e.solver, boundary_data(e));
  const double p = e.solver.p, eps = e.solver.eps;
  Json q;
  q["solve_regularized"] = to_json(r.log);
  q["max_pde_residual"] = max_pde_residual(r.field, p, std::max(eps, e.solver.floor));
  q["j_eps"] = j_eps(r.field, p, eps);
  q["gradient_p_mass"] = gradient_p_mass(r.field, p);
  if (auto sol = analytic_solution(e)) {
    const SpaceTimeField ref = sample(e.grid, *sol);
    q["analytic_max_abs_error"] = detail::max_abs_difference(r.field, ref);
    q["analytic_relative_l2_error"] = detail::relative_l2_error(r.field, ref);
  }
  out.report["quantities"] = q;
  Json verdicts = Json::array();
  verdicts.push_back(to_json(max_principle_check(r.field)));
  out.report["verdicts"] = verdicts;
  out.report["floored"] = r.log.floored;
  out.report["runtime"] = {{"solve_seconds", r.log.wall_seconds}};
  out.files["field.plapf"] = encode_field(r.field, p, eps);
  out.status = detail::status_of(verdicts);
  return out;
}

inline RunOutput run_sweep(const ExperimentConfig& e, int threads) {
  RunOutput out;
  out.report = detail::header(e);
  const double p = e.solver.p;
  std::optional<AnalyticSolution> ref;
  if (e.reference == "analytic") ref = analytic_solution(e);
  const ConvergenceStudy st =
      convergence_study(e.grid, e.plan, boundary_data(e), ref, e.solver, threads);
  const Cutoff c = make_cutoff(e.grid, e.cutoff);
  const Region reg = detail::experiment_region(e);

  CsvTable csv;
  csv.columns = {"eps",     "J_eps",    "W_eps",    "M_eps",    "O_eps",   "grad_Lp",
                 "term_I",  "term_II",  "term_III", "term_IV",  "term_V",  "term_VI",
                 "term_VII", "ut_theta_mass", "L2_dist", "gradLp_dist"};
  Json entries = Json::array();
  bool floored = false;
  for (std::size_t k = 0; k < st.report.entries.size(); ++k) {
    const ConvergenceEntry& en = st.report.entries[k];
    const SpaceTimeField& f = st.fields[k];
    const FundamentalTerms t =
        fundamental_terms(f, c, p, detail::effective_eps(en.eps), e.estimates.alpha);
    const double utm = ut_theta_mass(f, e.estimates.theta, reg);
    std::vector<double> row{en.eps, en.j, en.w, en.m, en.o, en.grad_p_mass};
    for (int i = 0; i < 7; ++i) row.push_back(t.value(i));
    row.insert(row.end(), {utm, en.l2_dist, en.grad_lp_dist});
    csv.rows.push_back(row);
    floored = floored || en.floored;
    Json j;
    j["eps"] = en.eps;
    j["j_eps"] = json_number(en.j);
    j["w_eps"] = json_number(en.w);
    j["m_eps"] = json_number(en.m);
    j["o_eps"] = json_number(en.o);
    j["o_eps_bound"] = json_number(en.o_bound);
    j["gradient_p_mass"] = json_number(en.grad_p_mass);
    j["l2_distance"] = json_number(en.l2_dist);
    j["gradient_lp_distance"] = json_number(en.grad_lp_dist);
    j["l2_distance_relative"] = json_number(en.l2_rel);
    j["gradient_lp_distance_relative"] = json_number(en.grad_lp_rel);
    j["weighted_gradient_distance"] = json_number(en.weighted_distance);
    j["uniform_bound_certificate"] = json_number(en.certificate);
    j["fundamental_terms"] = to_json(t);
    j["ut_theta_mass"] = json_number(utm);
    j["floored"] = en.floored;
    entries.push_back(j);
  }
  Json q;
  q["reference"] = st.report.reference;
  q["entries"] = entries;
  q["w_slack_by_refinement"] = st.report.w_tol_by_level;
  out.report["quantities"] = q;
  out.report["constants"] = {{"C_p", st.report.c_p}, {"K", st.report.k}};
  Json verdicts = Json::array();
  for (const Verdict& v : st.verdicts) verdicts.push_back(to_json(v));
  out.report["verdicts"] = verdicts;
  out.report["floored"] = floored;
  out.files["sweep.csv"] = csv.render();
  out.status = detail::status_of(verdicts);
  return out;
}

inline RunOutput run_verify(const ExperimentConfig& e) {
  RunOutput out;
  out.report = detail::header(e);
  const double p = e.solver.p, eps = e.solver.eps;
  const SolveResult r = solve_regularized(e.grid, e.solver, boundary_data(e));
  const SpaceTimeField& f = r.field;
  const Cutoff c = make_cutoff(e.grid, e.cutoff);
  const EstimateParams& est = e.estimates;
  const double ee = detail::effective_eps(eps);
  Json verdicts = Json::array();
  Json q;
  const FundamentalTerms t = fundamental_terms(f, c, p, ee, est.alpha);
  q["fundamental_terms"] = to_json(t);
  q["solve_regularized"] = to_json(r.log);
  if (p < 2.0) {
    verdicts.push_back(to_json(verify_general_estimate(f, c, p, eps, est.alpha, est.sigma)));
    const auto [v5, v6] = verify_absorption(f, c, p, ee, est.alpha, est.sigma);
    verdicts.push_back(to_json(v5));
    verdicts.push_back(to_json(v6));
  }
  if (p > 1.5) {
    const double s = 0.5 * (2.0 * p - 3.0);
    verdicts.push_back(to_json(verify_case_p_above_threshold(f, c, p, eps, s)));
  }
  if (p < 1.5 && e.grid.dim() == 2) {
    const double alpha = 0.5 * (est.theta - 1.0) * (p - 2.0);
    verdicts.push_back(to_json(verify_energy_lemma(f, c, p, eps, alpha, est.kappa)));
    verdicts.push_back(to_json(verify_theta_bound(f, c, p, eps, est.theta)));
  }
  if (e.grid.dim() == 1) {
    const OneDimMeasurement m = measure_onedim_estimate(f, c, p, eps);
    q["onedim_estimate"] = {{"weighted_hessian", m.weighted_hessian},
                            {"gradient_p_mass", m.grad_p_mass},
                            {"C", m.ratio}};
  }
  const double res = max_pde_residual(f, p, ee);
  q["max_pde_residual"] = res;
  if (e.data.kind == "barenblatt" && p < 2.0)
    verdicts.push_back(to_json(benilan_crandall_check(f, p, e.data.t0, 5.0 * res)));
  verdicts.push_back(to_json(max_principle_check(f)));
  out.report["quantities"] = q;
  out.report["verdicts"] = verdicts;
  out.report["floored"] = r.log.floored;
  out.report["runtime"] = {{"solve_seconds", r.log.wall_seconds}};
  out.status = detail::status_of(verdicts);
  return out;
}

inline RunOutput run_refine(const ExperimentConfig& e) {
  RunOutput out;
  out.report = detail::header(e);
  const double p = e.solver.p, eps = e.solver.eps;
  const double ee = detail::effective_eps(eps);
  const auto sol = analytic_solution(e);
  CsvTable csv;
  csv.columns = {"refinement", "h", "tau", "L2_error", "identity_residual", "term_I", "term_II",
                 "term_III", "term_IV", "term_V", "term_VI", "term_VII"};
  std::vector<FundamentalTerms> terms;
  Json levels = Json::array();
  bool floored = false;
  for (int factor : e.plan.refinements) {
    const Grid g = e.grid.refined(factor);
    const SolveResult r = solve_regularized(g, e.solver, boundary_data(e));
    floored = floored || r.log.floored;
    const FundamentalTerms t = fundamental_terms(r.field, make_cutoff(g, e.cutoff), p, ee,
                                                 e.estimates.alpha);
    terms.push_back(t);
    const double err = sol ? detail::relative_l2_error(r.field, sample(g, *sol))
                           : std::numeric_limits<double>::quiet_NaN();
    std::vector<double> row{static_cast<double>(factor), g.h(0), g.tau(), err, t.residual()};
    for (int k = 0; k < 7; ++k) row.push_back(t.value(k));
    csv.rows.push_back(row);
    Json j;
    j["refinement"] = factor;
    j["grid"] = describe(g);
    j["relative_l2_error"] = json_number(err);
    j["fundamental_terms"] = to_json(t);
    j["solve_regularized"] = to_json(r.log);
    levels.push_back(j);
  }
  Json q;
  q["levels"] = levels;
  if (terms.size() >= 2) {
    const TermVIForm form = calibrate_term_vi(terms[0], terms[1]);
    q["term_VI_form"] = to_string(form);
    Json rr = Json::array();
    for (const auto& t : terms) rr.push_back(json_number(t.with_vi(form).relative_residual()));
    q["identity_relative_residual"] = rr;
  }
  out.report["quantities"] = q;
  out.report["verdicts"] = Json::array();
  out.report["floored"] = floored;
  out.files["refine.csv"] = csv.render();
  return out;
}

/// Deterministic under a fixed seed; the report carries no timings.
inline RunOutput run_proptest(const ExperimentConfig& e) {
  RunOutput out;
  out.report = detail::header(e);
  out.report["seed"] = e.seed;
  CsvTable csv;
  csv.columns = {"campaign_index", "p", "samples", "violations", "worst_margin"};
  Json campaigns = Json::array();
  Json verdicts = Json::array();
  std::uint64_t stream = 0;
  for (double p : e.proptest_p) {
    const std::vector<CampaignResult> rs{
        scalar_inequality_campaign(p, e.proptest_samples, e.seed + stream++),
        vector_inequality_campaign(p, e.proptest_samples, e.seed + stream++),
        braces_campaign(p, e.proptest_samples, e.seed + stream++)};
    for (const auto& r : rs) {
      Json j;
      j["name"] = r.name;
      j["p"] = r.p;
      j["seed"] = r.seed;
      j["samples"] = r.samples;
      j["violations"] = r.violations;
      j["worst_margin"] = json_number(r.worst_margin);
      j["counterexamples"] = r.counterexamples;
      campaigns.push_back(j);
      csv.rows.push_back({static_cast<double>(campaigns.size() - 1), r.p,
                          static_cast<double>(r.samples), static_cast<double>(r.violations),
                          r.worst_margin});
      Verdict v = Verdict::make(r.name, static_cast<double>(r.violations), 0.0, 0.0);
      v.params = {{"p", p}, {"samples", static_cast<double>(r.samples)}};
      verdicts.push_back(to_json(v));
    }
  }
  out.report["quantities"] = {{"campaigns", campaigns}};
  out.report["verdicts"] = verdicts;
  out.files["proptest.csv"] = csv.render();
  out.status = detail::status_of(verdicts);
  return out;
}

inline RunOutput run(const ExperimentConfig& e, int threads = 1) {
  switch (e.kind) {
    case ExperimentKind::solve: return run_solve(e);
    case ExperimentKind::sweep: return run_sweep(e, threads);
    case ExperimentKind::verify_estimates: return run_verify(e);
    case ExperimentKind::refine_study: return run_refine(e);
    case ExperimentKind::property_tests: return run_proptest(e);
  }
  throw Error(ErrorKind::config, "kind: unsupported");
}

}  // namespace plaplab
