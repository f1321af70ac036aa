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


// plaplab: batch runner for solves, eps-sweeps, estimate checks,
// refinement studies and inequality campaigns.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "plaplab/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  plaplab::require(static_cast<bool>(is), plaplab::ErrorKind::io, "cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary);
  plaplab::require(static_cast<bool>(os), plaplab::ErrorKind::io,
                   "cannot write " + path.string());
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
};

int run_command(const std::string& name, const Options& opt) {
  plaplab::Config cfg;
  if (!opt.config.empty()) cfg = plaplab::Config::parse(read_file(opt.config), opt.config);
  if (opt.seed_given) cfg.set("seed", std::to_string(opt.seed));
  const plaplab::ExperimentConfig exp =
      plaplab::make_experiment(cfg, plaplab::parse_kind(name));

  std::string dir = opt.out;
  if (dir.empty()) {
    if (const char* env = std::getenv("PLAPLAB_OUT")) dir = env;
  }
  if (dir.empty()) dir = cfg.str("output.dir", "plaplab-out");
  std::filesystem::create_directories(dir);

  const plaplab::RunOutput out = plaplab::run(exp, opt.threads);
  for (const auto& [file, bytes] : out.files) write_file(std::filesystem::path(dir) / file, bytes);
  write_file(std::filesystem::path(dir) / "report.json", out.report.dump(2) + "\n");
  std::cout << name << ": wrote " << (std::filesystem::path(dir) / "report.json").string();
  if (out.status != 0) std::cout << " (some verdicts failed)";
  std::cout << "\n";
  return out.status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plaplab: regularized singular p-Laplace evolution laboratory"};
  app.require_subcommand(1);
  Options opt;
  for (const char* name : {"solve", "sweep", "verify", "refine", "proptest"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config, "key = value experiment file");
    sub->add_option("--out", opt.out, "output directory (default: $PLAPLAB_OUT)");
    sub->add_option("--seed", opt.seed, "random seed for property campaigns")
        ->each([&](const std::string&) { opt.seed_given = true; });
    sub->add_option("--threads", opt.threads, "workers for independent sweep entries")
        ->check(CLI::PositiveNumber);
  }
  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return run_command(name, opt);
  } catch (const plaplab::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n" << plaplab::to_json(e.log()).dump(2) << "\n";
    return 4;
  } catch (const plaplab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
