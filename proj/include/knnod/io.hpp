#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "knnod/convergence.hpp"
#include "knnod/equilibria.hpp"
#include "knnod/harness.hpp"

namespace knnod::io {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const json& doc);

// Scalars: floats as JSON numbers, rationals as "p/q" strings.
json to_json(double v);
json to_json(const Rational& v);
template <OpinionScalar S>
S scalar_from_json(const json& j, const std::string& field);

/// A JSON array (or {"opinions": [...]}) of numbers and/or "p/q" strings. Any
/// string entry makes the configuration exact; non-integer numbers are then
/// rejected as mixed backends.
AnyConfiguration parse_configuration(const json& j);

template <OpinionScalar S>
json to_json(const Configuration<S>& config) {
  json arr = json::array();
  for (const S& v : config.opinions()) arr.push_back(to_json(v));
  return arr;
}

json to_json(const AnyConfiguration& config);
json to_json(const EquilibriumReport& report);
template <OpinionScalar S>
json to_json(const ClusterPartition<S>& partition);
json to_json(const LemmaReport& report);
json to_json(const SuiteReport& report);
json to_json(const ConsensusStats& stats);
json to_json(const SweepStats& stats);
json to_json(const AdditionReport& report);
json to_json(const RemovalReport& report);
json to_json(const Quantiles& q);

/// A scalar or {"uniform": [lo, hi]}.
template <OpinionScalar S>
OpinionSpec<S> parse_opinion(const json& j, const std::string& field);

AnyScenario parse_scenario(const json& j);
template <OpinionScalar S>
json to_json(const ScenarioSpec<S>& spec);
json to_json(const AnyScenario& spec);

/// {"scenarios": [spec | {"replicate": {"base": spec, "runs": N, "seed": s}}, ...]}
/// or a bare array of the same items.
std::vector<AnyScenario> parse_grid(const json& j);

/// step,agent_id,opinion; one row per agent per recorded snapshot.
template <OpinionScalar S>
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord<S>& record);

/// Run metadata: stop reason, limit class, cluster sizes, per-step updaters
/// and diameters.
template <OpinionScalar S>
json trajectory_metadata(const SimulationResult<S>& result);

/// Line chart, one polyline per agent, time on x and opinion on y.
template <OpinionScalar S>
std::string trajectory_svg(const TrajectoryRecord<S>& record, const std::string& title);

}  // namespace knnod::io
