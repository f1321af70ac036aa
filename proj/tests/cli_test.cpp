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


#include <sys/wait.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "plaplab/config.hpp"
#include "plaplab/experiment.hpp"
#include "plaplab/field_io.hpp"

namespace plaplab {
namespace {

namespace fs = std::filesystem;

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  ADD_FAILURE() << "no error raised";
  return {};
}

ExperimentConfig experiment(const std::string& text, ExperimentKind kind) {
  return make_experiment(Config::parse(text), kind);
}

TEST(Config, ParsesKeysCommentsAndLists) {
  const Config c = Config::parse(
      "# header\n"
      "grid.nx = 40   # trailing comment\n"
      "\n"
      "sweep.eps_list = 1, 0.5 ,0.25\n"
      "data.kind = linear\n");
  EXPECT_EQ(c.integer("grid.nx", 0), 40);
  EXPECT_EQ(c.list("sweep.eps_list", {}), (std::vector<double>{1.0, 0.5, 0.25}));
  EXPECT_EQ(c.str("data.kind"), "linear");
  EXPECT_EQ(c.num("solver.p", 1.7), 1.7);
}

TEST(Config, ReportsMalformedInput) {
  EXPECT_NE(error_of([] { Config::parse("a = 1\na = 2\n", "x.cfg"); }).find("x.cfg:2"),
            std::string::npos);
  EXPECT_NE(error_of([] { Config::parse("just words\n"); }).find("key = value"),
            std::string::npos);
  const Config c = Config::parse("solver.p = one\n");
  EXPECT_NE(error_of([&] { c.num("solver.p", 0.0); }).find("solver.p"), std::string::npos);
}

TEST(Experiment, ValidatesBeforeComputing) {
  EXPECT_NE(error_of([] { experiment("solver.p = 2.5\n", ExperimentKind::solve); })
                .find("solver.p"),
            std::string::npos);
  EXPECT_NE(error_of([] { experiment("grid.nx = 4\n", ExperimentKind::solve); })
                .find("grid.nx"),
            std::string::npos);
  EXPECT_NE(error_of([] { experiment("estimate.alpha = 0.3\n", ExperimentKind::verify_estimates); })
                .find("estimate.alpha"),
            std::string::npos);
  EXPECT_NE(error_of([] {
              experiment("grid.n = 2\ngrid.nx = 16\nsolver.p = 1.2\ndata.kind = constant\n"
                         "reference = smallest-eps\nestimate.theta = 1.3\n",
                         ExperimentKind::verify_estimates);
            }).find("estimate.theta"),
            std::string::npos);
  EXPECT_NE(error_of([] { experiment("sweep.eps_list = 0.1\n", ExperimentKind::sweep); })
                .find("sweep.eps_list"),
            std::string::npos);
  EXPECT_NE(error_of([] { experiment("solver.pp = 1.5\n", ExperimentKind::solve); })
                .find("solver.pp: unknown key"),
            std::string::npos);
  EXPECT_NE(error_of([] { experiment("kind = sweep\n", ExperimentKind::solve); }).find("kind"),
            std::string::npos);
  EXPECT_NE(error_of([] { experiment("data.kind = cosine-bump\n", ExperimentKind::sweep); })
                .find("reference"),
            std::string::npos);
}

TEST(Experiment, KindNamesAndAliases) {
  EXPECT_EQ(parse_kind("verify"), ExperimentKind::verify_estimates);
  EXPECT_EQ(parse_kind("verify-estimates"), ExperimentKind::verify_estimates);
  EXPECT_EQ(parse_kind("refine-study"), ExperimentKind::refine_study);
  EXPECT_EQ(parse_kind("property-tests"), ExperimentKind::property_tests);
  EXPECT_THROW(parse_kind("plot"), Error);
}

TEST(FieldIO, RoundTripIsBitExact) {
  const Grid g = Grid::square(-1.0, 2.0, 9, 0.5, 1.5, 10, 0.0, 0.3, 8);
  const SpaceTimeField f =
      sample(g, [](const Point& x, double t) { return std::sin(x[0] * 7.1) / 3.0 + x[1] * t; });
  const FieldFile back = decode_field(encode_field(f, 1.37, 1e-3));
  EXPECT_EQ(back.p, 1.37);
  EXPECT_EQ(back.eps, 1e-3);
  EXPECT_TRUE(back.warnings.empty());
  EXPECT_TRUE(back.field.grid.same_shape(g));
  ASSERT_EQ(back.field.values.size(), f.values.size());
  EXPECT_EQ(std::memcmp(back.field.values.data(), f.values.data(), 8 * f.values.size()), 0);

  const fs::path path = fs::temp_directory_path() / "plaplab_roundtrip.plapf";
  export_field(f, 1.37, 1e-3, path.string());
  EXPECT_EQ(import_field(path.string()).field.values, f.values);
  fs::remove(path);
}

TEST(FieldIO, LayoutIsLittleEndian) {
  const Grid g = Grid::line(0.0, 1.0, 8, 0.0, 1.0, 8);
  const std::string bytes = encode_field(SpaceTimeField(g, 0.0), 1.5, 0.0);
  EXPECT_EQ(bytes.substr(0, 6), "PLAPF1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 1u);  // dimension, low byte first
  EXPECT_EQ(bytes.size(), 6u + 8u * (1 + 2 + 2 + 2 + 2) + 8u * g.size());
}

TEST(FieldIO, TruncationNamesTheMissingSection) {
  const Grid g = Grid::line(0.0, 1.0, 8, 0.0, 1.0, 8);
  const std::string bytes = encode_field(SpaceTimeField(g, 1.0), 1.5, 0.1);
  const std::size_t header = 6 + 8 * 9;
  struct Case {
    std::size_t keep;
    const char* section;
  };
  for (const Case& c : {Case{3, "magic"}, Case{10, "dimension"}, Case{20, "axis extents"},
                        Case{50, "counts"}, Case{header - 12, "p"}, Case{header - 4, "eps"},
                        Case{header + 16, "data"}}) {
    try {
      decode_field(bytes.substr(0, c.keep));
      ADD_FAILURE() << "no error for " << c.section;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::parse);
      EXPECT_NE(std::string(e.what()).find(std::string("missing ") + c.section), std::string::npos)
          << e.what();
    }
  }
}

TEST(FieldIO, OutOfRangeExponentOnlyWarns) {
  const Grid g = Grid::line(0.0, 1.0, 8, 0.0, 1.0, 8);
  const FieldFile f = decode_field(encode_field(SpaceTimeField(g, 1.0), 2.5, 0.1));
  ASSERT_EQ(f.warnings.size(), 1u);
  EXPECT_NE(f.warnings.front().find("outside (1, 2]"), std::string::npos);
  EXPECT_EQ(f.field.values.size(), g.size());
}

TEST(Pipelines, SolveWithLinearData) {
  const ExperimentConfig e = experiment(
      "data.kind = linear\ndata.slope = 2\ndata.offset = 1\ngrid.nx = 32\ngrid.nt = 16\n"
      "solver.p = 1.3\nsolver.eps = 0\n",
      ExperimentKind::solve);
  const RunOutput out = run(e);
  EXPECT_EQ(out.status, 0);
  EXPECT_EQ(out.report["schema"], "plaplab-report/1");
  EXPECT_LE(out.report["quantities"]["max_pde_residual"].get<double>(), 1e-9);
  EXPECT_LE(out.report["quantities"]["analytic_max_abs_error"].get<double>(), 1e-9);
  EXPECT_TRUE(out.report["floored"].get<bool>());
  EXPECT_EQ(out.report["config"]["data.kind"], "linear");
  ASSERT_TRUE(out.files.count("field.plapf"));
  EXPECT_EQ(decode_field(out.files.at("field.plapf")).field.values.size(), e.grid.size());
}

TEST(Pipelines, SweepProducesOneRowPerEps) {
  const ExperimentConfig e =
      experiment("grid.nx = 100\ngrid.nt = 100\nsolver.p = 1.5\n", ExperimentKind::sweep);
  const RunOutput out = run(e, 2);
  std::istringstream csv(out.files.at("sweep.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line,
            "eps,J_eps,W_eps,M_eps,O_eps,grad_Lp,term_I,term_II,term_III,term_IV,term_V,term_VI,"
            "term_VII,ut_theta_mass,L2_dist,gradLp_dist");
  std::vector<double> l2, gl;
  while (std::getline(csv, line)) {
    std::vector<double> cells;
    std::istringstream is(line);
    std::string cell;
    while (std::getline(is, cell, ',')) cells.push_back(std::stod(cell));
    ASSERT_EQ(cells.size(), 16u);
    l2.push_back(cells[14]);
    gl.push_back(cells[15]);
  }
  ASSERT_EQ(l2.size(), 5u);
  for (std::size_t k = 1; k < l2.size(); ++k) {
    EXPECT_LE(l2[k], 1.05 * l2[k - 1]);
    EXPECT_LE(gl[k], 1.05 * gl[k - 1]);
  }
  EXPECT_EQ(out.status, 0) << out.report["verdicts"].dump(1);
}

TEST(Pipelines, ProptestIsDeterministic) {
  const std::string text = "seed = 77\nproptest.samples = 3000\n";
  const RunOutput a = run(experiment(text, ExperimentKind::property_tests));
  const RunOutput b = run(experiment(text, ExperimentKind::property_tests));
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_EQ(a.files, b.files);
  EXPECT_EQ(a.status, 0);
  const RunOutput c = run(experiment("seed = 78\nproptest.samples = 3000\n",
                                     ExperimentKind::property_tests));
  EXPECT_NE(a.report.dump(), c.report.dump());
}

TEST(Pipelines, RefineRecordsTheTermVIForm) {
  const ExperimentConfig e = experiment(
      "grid.nx = 80\ngrid.nt = 80\nsolver.p = 1.6\nsolver.eps = 0.1\nsweep.refinements = 1, 2\n"
      "cutoff.plateau_x = -1.5, 1.5\ncutoff.ramp_x = 1\ncutoff.time_plateau = 0.3, 0.7\n"
      "cutoff.time_ramp = 0.2\n",
      ExperimentKind::refine_study);
  const RunOutput out = run(e);
  EXPECT_EQ(out.report["quantities"]["term_VI_form"], "<grad zeta, grad v>");
  const auto rr = out.report["quantities"]["identity_relative_residual"];
  EXPECT_LT(rr[1].get<double>(), rr[0].get<double>());
}

// ---------------------------------------------------------------------------
// The command-line binary

struct Cli {
  fs::path dir;
  Cli() {
    dir = fs::temp_directory_path() /
          ("plaplab_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
           "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Cli() { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
  std::string read(const fs::path& p) const {
    std::ifstream is(p);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
  }
  int run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = env + " \"" PLAPLAB_CLI "\" " + args + " > \"" +
                            (dir / "stdout").string() + "\" 2> \"" + (dir / "stderr").string() +
                            "\"";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }
};

TEST(Binary, ProptestWritesReportAndCsv) {
  Cli cli;
  const fs::path cfg = cli.write("p.cfg", "proptest.samples = 2000\n");
  const fs::path out = cli.dir / "out";
  ASSERT_EQ(cli.run("proptest --config \"" + cfg.string() + "\" --seed 5 --out \"" +
                    out.string() + "\""),
            0)
      << cli.read(cli.dir / "stderr");
  const Json report = Json::parse(cli.read(out / "report.json"));
  EXPECT_EQ(report["schema"], "plaplab-report/1");
  EXPECT_EQ(report["seed"], 5);
  EXPECT_TRUE(fs::exists(out / "proptest.csv"));
}

TEST(Binary, OutputDirectoryFallsBackToEnvironment) {
  Cli cli;
  const fs::path cfg = cli.write("p.cfg", "proptest.samples = 100\n");
  const fs::path out = cli.dir / "from_env";
  ASSERT_EQ(cli.run("proptest --config \"" + cfg.string() + "\"",
                    "PLAPLAB_OUT=\"" + out.string() + "\""),
            0);
  EXPECT_TRUE(fs::exists(out / "report.json"));
}

TEST(Binary, ConfigErrorsExitWithTheFieldPath) {
  Cli cli;
  const fs::path cfg = cli.write("bad.cfg", "solver.p = 3\n");
  EXPECT_EQ(cli.run("solve --config \"" + cfg.string() + "\" --out \"" +
                    (cli.dir / "o").string() + "\""),
            2);
  EXPECT_NE(cli.read(cli.dir / "stderr").find("solver.p"), std::string::npos);
  EXPECT_NE(cli.run("frobnicate"), 0);
}

TEST(Binary, SolverFailureAttachesTheLog) {
  Cli cli;
  const fs::path cfg = cli.write(
      "fail.cfg", "grid.nx = 40\ngrid.nt = 10\nsolver.eps = 0.001\nsolver.picard_max_iters = 1\n");
  EXPECT_EQ(cli.run("solve --config \"" + cfg.string() + "\" --out \"" +
                    (cli.dir / "o").string() + "\""),
            4);
  const std::string err = cli.read(cli.dir / "stderr");
  EXPECT_NE(err.find("\"failed_step\": 1"), std::string::npos) << err;
}

TEST(Binary, SolveWritesAReadableField) {
  Cli cli;
  const fs::path cfg =
      cli.write("s.cfg", "data.kind = constant\ndata.value = 2\nreference = smallest-eps\n"
                         "grid.nx = 16\ngrid.nt = 8\n");
  const fs::path out = cli.dir / "o";
  ASSERT_EQ(cli.run("solve --config \"" + cfg.string() + "\" --out \"" + out.string() + "\""), 0);
  const FieldFile f = import_field((out / "field.plapf").string());
  for (double v : f.field.values) EXPECT_NEAR(v, 2.0, 1e-12);
}

}  // namespace
}  // namespace plaplab
