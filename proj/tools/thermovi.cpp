// Command-line runner: simulate, compare, regularity, verify-structure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "thermovi/thermovi.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string preset_name;
  std::optional<int> scheme;
  std::optional<double> lambda;
  std::optional<long> steps;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
};

thermovi::RunConfig resolve(const CommonOptions& o) {
  thermovi::RunConfig cfg = o.config_path.empty() ? thermovi::preset(o.preset_name.empty() ? "case1" : o.preset_name)
                                                  : thermovi::load_config(o.config_path);
  if (o.scheme) cfg.scheme = thermovi::scheme_from_number(*o.scheme);
  if (o.lambda) cfg.mass_spring.lambda = *o.lambda;
  if (o.steps) cfg.steps = *o.steps;
  if (o.out) cfg.output = *o.out;
  if (o.seed) cfg.seed = *o.seed;
  thermovi::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational integrators for a mass-spring system coupled to an ideal gas"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions o;
  auto* config_opt = app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--preset", o.preset_name, "Bundled parameter set")
      ->check(CLI::IsMember({"case1", "case2"}))
      ->excludes(config_opt);
  app.add_option("--scheme", o.scheme, "Scheme number")->check(CLI::IsMember({1, 2, 3}));
  app.add_option("--lambda", o.lambda, "Friction coefficient [N s/m]");
  app.add_option("--steps", o.steps, "Number of time steps (CSV rows)");
  app.add_option("--out", o.out, "Output CSV path ('-' for stdout)");
  app.add_option("--seed", o.seed, "Seed for randomized checks");

  auto* simulate = app.add_subcommand("simulate", "Run a trajectory and write the CSV");

  auto* compare = app.add_subcommand("compare", "Compare against the exact (or RK4) solution");
  bool no_refine = false;
  std::string start = "exact";
  compare->add_flag("--no-refine", no_refine, "Skip the h/2 rerun and convergence orders");
  compare->add_option("--start", start, "Second point: exact x(h) or config x1")
      ->check(CLI::IsMember({"exact", "config"}));

  auto* regularity = app.add_subcommand("regularity", "Print regularity matrices along the run");

  auto* verify = app.add_subcommand("verify-structure", "Finite-difference check of the flow identity");
  int N = 5;
  int trials = 20;
  bool mechanical = false;
  double tolerance = thermovi::kStructureTolerance;
  verify->add_option("--N", N, "Number of windows")->check(CLI::PositiveNumber);
  verify->add_option("--trials", trials, "Random tangent pairs")->check(CLI::PositiveNumber);
  verify->add_flag("--mechanical", mechanical, "Exclude entropy directions");
  verify->add_option("--tolerance", tolerance, "Bound on residual/scale")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : thermovi::kExitConfig;
  }

  try {
    thermovi::RunConfig cfg = resolve(o);
    if (*simulate) {
      thermovi::cmd_simulate(cfg, std::cout);
    } else if (*compare) {
      const std::string path = o.out ? *o.out : "compare.csv";
      std::optional<std::ofstream> file;
      std::ostream* csv = &std::cout;
      if (path != "-") {
        file.emplace(path, std::ios::binary | std::ios::trunc);
        if (!*file) throw thermovi::IoError("cannot open output file '" + path + "'");
        csv = &*file;
      }
      thermovi::cmd_compare(cfg, path == "-" ? std::cerr : std::cout, csv, !no_refine,
                            start == "exact" ? thermovi::StartMode::Exact : thermovi::StartMode::Config);
    } else if (*regularity) {
      const auto s = thermovi::cmd_regularity(cfg, std::cout);
      if (s.near_singular) std::cout << "warning: near-singular regularity matrix encountered\n";
    } else if (*verify) {
      const auto s = thermovi::cmd_verify_structure(cfg, N, trials, std::cout, mechanical, tolerance);
      if (!s.passed()) return thermovi::kExitVerification;
    }
  } catch (const thermovi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return thermovi::kExitConfig;
  } catch (const thermovi::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return thermovi::kExitConfig;
  } catch (const thermovi::StepFailure& e) {
    std::cerr << "solver failure";
    if (e.step_index()) std::cerr << " at step " << *e.step_index();
    std::cerr << ": " << e.what() << "\n";
    return thermovi::kExitSolver;
  } catch (const thermovi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return thermovi::kExitSolver;
  }
  return thermovi::kExitOk;
}
