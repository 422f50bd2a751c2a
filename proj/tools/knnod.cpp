#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "knnod/commands.hpp"

namespace {

using knnod::cli::json;

void emit(const json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    knnod::io::write_json_file(out, doc);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-nearest-neighbour opinion dynamics: simulation, classification and verification"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out;
  knnod::cli::Overrides overrides;

  auto* simulate = app.add_subcommand("simulate", "Run a scenario; writes <out>.csv, <out>.json and <out>.svg");
  simulate->add_option("--spec", spec_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", out, "Output prefix")->required();
  simulate->add_option("--seed", overrides.seed, "Re-derive all seeds from this one");
  simulate->add_option("--k", overrides.k, "Neighbourhood size (knn)")->check(CLI::PositiveNumber);
  simulate->add_option("--d", overrides.d, "Confidence radius (abc), e.g. 0.25 or 1/4");
  simulate->add_option("--n", overrides.n, "Agent count (uniform initial)")->check(CLI::PositiveNumber);
  simulate->add_option("--tol", overrides.tolerance, "Convergence tolerance")->check(CLI::PositiveNumber);
  simulate->add_option("--max-steps", overrides.max_steps, "Step limit");

  std::string config_path;
  std::size_t k = 0;
  double tolerance = 1e-9;
  auto* classify = app.add_subcommand("classify", "Classify a configuration (equilibrium, clustered, consensus)");
  classify->add_option("--config", config_path, "Configuration JSON")->required()->check(CLI::ExistingFile);
  classify->add_option("--k", k, "Neighbourhood size")->required()->check(CLI::PositiveNumber);
  classify->add_option("--tol", tolerance, "Tolerance for float configurations")->check(CLI::PositiveNumber);
  classify->add_option("--out", out, "Report path (default stdout)");

  std::uint64_t seed = 0;
  std::size_t trials = 200;
  auto* verify = app.add_subcommand("verify-lemmas", "Run the randomized property suite; exit 1 on any failure");
  verify->add_option("--seed", seed, "Base seed");
  verify->add_option("--trials", trials, "Random configurations per check")->check(CLI::PositiveNumber);
  verify->add_option("--out", out, "Report path (default stdout)");

  auto* robustness = app.add_subcommand("robustness", "Agent addition/removal experiments");
  robustness->require_subcommand(1);
  auto* add = robustness->add_subcommand("add", "Add agents to a clustered equilibrium");
  auto* remove = robustness->add_subcommand("remove", "Remove one agent from a clustered equilibrium");
  for (auto* sub : {add, remove}) {
    sub->add_option("--spec", spec_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Report path (default stdout)");
  }

  std::string grid_path;
  std::size_t jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Run a grid of scenarios and aggregate the outcomes");
  sweep->add_option("--grid", grid_path, "Grid JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--jobs", jobs, "Parallel scenarios")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out, "Report path (default stdout)");

  std::string figures_dir;
  auto* figures = app.add_subcommand("figures", "Reproduce the three reference figures as CSV, SVG and JSON");
  figures->add_option("--out", figures_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? knnod::cli::kOk : knnod::cli::kUsageError;
  }

  try {
    if (*simulate) {
      const auto spec = knnod::cli::apply_overrides(knnod::io::parse_scenario(knnod::io::read_json_file(spec_path)), overrides);
      knnod::cli::write_artifacts(knnod::cli::run_scenario(spec, spec_path), out);
    } else if (*classify) {
      emit(knnod::cli::classify_configuration(knnod::io::read_json_file(config_path), k, tolerance), out);
    } else if (*verify) {
      const json report = knnod::cli::verify_lemmas(seed, trials);
      emit(report, out);
      return report.at("all_passed").get<bool>() ? knnod::cli::kOk : knnod::cli::kVerificationFailed;
    } else if (*add) {
      emit(knnod::cli::robustness_add(knnod::io::read_json_file(spec_path)), out);
    } else if (*remove) {
      emit(knnod::cli::robustness_remove(knnod::io::read_json_file(spec_path)), out);
    } else if (*sweep) {
      emit(knnod::cli::sweep(knnod::io::read_json_file(grid_path), jobs), out);
    } else if (*figures) {
      std::cout << knnod::cli::figures(figures_dir).dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return knnod::cli::exit_code_for(e);
  }
  return knnod::cli::kOk;
}
