#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include "knnod/io.hpp"

// Library side of the command-line tool. Each command is a function from
// parsed inputs to JSON/text so the executable only handles arguments and files.
namespace knnod::cli {

using io::json;

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kUsageError = 2, kIoError = 3 };

/// Maps an exception escaping a command to the process exit code.
int exit_code_for(const std::exception& e);

struct Overrides {
  std::optional<std::uint64_t> seed;  // re-derives initial, schedule and event seeds
  std::optional<std::size_t> k;
  std::optional<std::string> d;  // parsed in the scenario's backend
  std::optional<std::size_t> n;  // uniform initial only
  std::optional<double> tolerance;
  std::optional<std::size_t> max_steps;
};

/// Applies the overrides and revalidates. Throws ScenarioError when an
/// override does not fit the scenario (k on an ABC model, n on explicit opinions).
AnyScenario apply_overrides(AnyScenario spec, const Overrides& overrides);

struct RunArtifacts {
  std::string csv;
  json metadata;
  std::string svg;
};

RunArtifacts run_scenario(const AnyScenario& spec, const std::string& title);

/// Writes <prefix>.csv, <prefix>.json and <prefix>.svg.
void write_artifacts(const RunArtifacts& artifacts, const std::filesystem::path& prefix);

json classify_configuration(const json& config, std::size_t k, double tolerance);

json verify_lemmas(std::uint64_t seed, std::size_t trials);

/// {"base": [...], "k": 5, "additions": [{"step": 2, "opinion": 0.7 | {"uniform": [0, 1]}}],
///  "schedule_seed", "event_seed", "abc_d", "max_steps", "tolerance"}
json robustness_add(const json& input);

/// {"base": [...], "k": 5, "remove": <agent id>, "abc_d", "max_steps", "tolerance"}
json robustness_remove(const json& input);

json sweep(const json& grid, std::size_t jobs);

struct FigureOptions {
  std::uint64_t fig1_seed_begin = 0;
  std::uint64_t fig1_seed_end = 1000;
  std::uint64_t fig2_seed_begin = 0;
  std::uint64_t fig2_seed_end = 500;
  std::uint64_t fig3_seed_begin = 0;
  std::uint64_t fig3_seed_end = 1000;
  std::size_t max_snapshots = 1500;
};

/// Scenario specs for the three reference figures: a clustered limit
/// (n=20, k=5), a non-clustered limit (same regime), and four agents added to
/// a ten-agent consensus at 0.4 under k-NN (k=5) and bounded confidence (d=0.25).
json figure_spec(int figure);

/// Runs the three figure scenarios, writing specs, CSV, SVG and metadata into
/// `dir`. Returns the summary also written to <dir>/figures.json.
json figures(const std::filesystem::path& dir, const FigureOptions& options = {});

}  // namespace knnod::cli
