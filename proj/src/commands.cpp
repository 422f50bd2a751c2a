#include "knnod/commands.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>

#include "knnod/random.hpp"

namespace knnod::cli {

namespace {

template <OpinionScalar S>
S parse_override_scalar(const std::string& text) {
  const Rational value = Rational::parse(text);
  if constexpr (std::is_same_v<S, Rational>) {
    return value;
  } else {
    return value.to_double();
  }
}

std::size_t optional_size(const json& input, const char* key, std::size_t fallback) {
  const auto it = input.find(key);
  if (it == input.end()) return fallback;
  if (!it->is_number_unsigned()) throw ScenarioError(key, "expected a nonnegative integer");
  return it->get<std::size_t>();
}

double optional_double(const json& input, const char* key, double fallback) {
  const auto it = input.find(key);
  if (it == input.end()) return fallback;
  if (!it->is_number()) throw ScenarioError(key, "expected a number");
  return it->get<double>();
}

Configuration<double> float_base(const json& input) {
  if (!input.is_object() || !input.contains("base")) throw ScenarioError("base", "missing required field");
  AnyConfiguration config = io::parse_configuration(input.at("base"));
  if (const auto* f = std::get_if<Configuration<double>>(&config)) return *f;
  throw BackendError("base: robustness scenarios run on the float backend; give opinions as numbers");
}

RobustnessParams robustness_params(const json& input) {
  RobustnessParams params;
  if (!input.contains("k")) throw ScenarioError("k", "missing required field");
  params.k = optional_size(input, "k", params.k);
  params.schedule_seed = optional_size(input, "schedule_seed", 0);
  params.event_seed = optional_size(input, "event_seed", 0);
  params.max_steps = optional_size(input, "max_steps", params.max_steps);
  params.tolerance = optional_double(input, "tolerance", params.tolerance);
  params.record_every = optional_size(input, "record_every", params.record_every);
  if (input.contains("abc_d")) params.abc_d = optional_double(input, "abc_d", 0.0);
  return params;
}

template <OpinionScalar S>
RunArtifacts artifacts_of(const ScenarioSpec<S>& spec, const SimulationResult<S>& result, const std::string& title) {
  RunArtifacts out;
  std::ostringstream csv;
  io::write_trajectory_csv(csv, result.trajectory);
  out.csv = csv.str();
  out.metadata = io::trajectory_metadata(result);
  out.metadata["spec"] = io::to_json(spec);
  out.svg = io::trajectory_svg(result.trajectory, title);
  return out;
}

/// Reruns with a recording interval that keeps about `max_snapshots` states.
template <OpinionScalar S>
SimulationResult<S> thinned_run(ScenarioSpec<S>& spec, std::size_t steps, std::size_t max_snapshots) {
  spec.record_every = std::max<std::size_t>(1, (steps + max_snapshots - 1) / max_snapshots);
  return simulate(spec);
}

ScenarioSpec<double> fig12_base() {
  ScenarioSpec<double> spec;
  spec.model = KnnModel{5};
  spec.initial = UniformInitial{0.0, 1.0, 20, 0};
  spec.schedule = UniformRandomSchedule{0};
  spec.record_every = 0;
  return spec;
}

ScenarioSpec<double> fig3_base(bool abc) {
  ScenarioSpec<double> spec;
  if (abc) {
    spec.model = AbcModel<double>{0.25};
  } else {
    spec.model = KnnModel{5};
  }
  spec.initial = ClustersInitial<double>{{{0.4, 10}}};
  spec.schedule = UniformRandomSchedule{0};
  for (std::size_t step = 2; step <= 5; ++step) spec.events.push_back(AddAgent<double>{step, UniformOpinion{0.0, 1.0}});
  spec.record_every = 1;
  return spec;
}

ScenarioSpec<double> seeded(ScenarioSpec<double> spec, std::uint64_t seed) {
  AnyScenario any = std::move(spec);
  reseed(any, seed);
  return std::get<ScenarioSpec<double>>(std::move(any));
}

bool originals_moved(const TrajectoryRecord<double>& record, std::size_t originals, double value) {
  for (const auto& snap : record.snapshots) {
    for (std::size_t i = 0; i < snap.ids.size(); ++i) {
      if (snap.ids[i].value <= originals && snap.opinions[i] != value) return true;
    }
  }
  return false;
}

void write_run(const std::filesystem::path& dir, const std::string& name, const json& spec, const RunArtifacts& run) {
  io::write_json_file(dir / (name + ".spec.json"), spec);
  write_artifacts(run, dir / name);
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) != nullptr) return kIoError;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e) != nullptr) return kIoError;
  return kUsageError;
}

namespace {

template <OpinionScalar S>
void apply_to(ScenarioSpec<S>& s, const Overrides& overrides) {
  if (overrides.k) {
    auto* knn = std::get_if<KnnModel>(&s.model);
    if (knn == nullptr) throw ScenarioError("model.k", "--k needs a knn model");
    knn->k = *overrides.k;
  }
  if (overrides.d) {
    auto* abc = std::get_if<AbcModel<S>>(&s.model);
    if (abc == nullptr) throw ScenarioError("model.d", "--d needs an abc model");
    abc->d = parse_override_scalar<S>(*overrides.d);
  }
  if (overrides.n) {
    auto* uniform = std::get_if<UniformInitial>(&s.initial);
    if (uniform == nullptr) throw ScenarioError("initial.n", "--n needs a uniform initial configuration");
    uniform->n = *overrides.n;
  }
  if (overrides.tolerance) s.tolerance = *overrides.tolerance;
  if (overrides.max_steps) s.max_steps = *overrides.max_steps;
  validate(s);
}

}  // namespace

AnyScenario apply_overrides(AnyScenario spec, const Overrides& overrides) {
  if (overrides.seed) reseed(spec, *overrides.seed);
  std::visit([&](auto& s) { apply_to(s, overrides); }, spec);
  return spec;
}

RunArtifacts run_scenario(const AnyScenario& spec, const std::string& title) {
  return std::visit([&](const auto& s) { return artifacts_of(s, simulate(s), title); }, spec);
}

void write_artifacts(const RunArtifacts& artifacts, const std::filesystem::path& prefix) {
  const std::string base = prefix.string();
  io::write_text_file(base + ".csv", artifacts.csv);
  io::write_json_file(base + ".json", artifacts.metadata);
  io::write_text_file(base + ".svg", artifacts.svg);
}

json classify_configuration(const json& config, std::size_t k, double tolerance) {
  return io::to_json(classify(io::parse_configuration(config), k, tolerance));
}

json verify_lemmas(std::uint64_t seed, std::size_t trials) {
  if (trials < 1) throw ParameterError("trials must be at least 1");
  return io::to_json(run_lemma_suite(seed, trials));
}

json robustness_add(const json& input) {
  const Configuration<double> base = float_base(input);
  const RobustnessParams params = robustness_params(input);
  std::vector<AddAgent<double>> additions;
  const json& list = input.contains("additions") ? input.at("additions") : json::array();
  if (!list.is_array()) throw ScenarioError("additions", "expected an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = fmt::format("additions[{}]", i);
    if (!list[i].is_object() || !list[i].contains("step") || !list[i].contains("opinion")) {
      throw ScenarioError(path, "expected {\"step\": ..., \"opinion\": ...}");
    }
    if (!list[i].at("step").is_number_unsigned()) throw ScenarioError(path + ".step", "expected a nonnegative integer");
    additions.push_back(
        {list[i].at("step").get<std::size_t>(), io::parse_opinion<double>(list[i].at("opinion"), path + ".opinion")});
  }
  return io::to_json(robustness_addition(base, additions, params));
}

json robustness_remove(const json& input) {
  const Configuration<double> base = float_base(input);
  const RobustnessParams params = robustness_params(input);
  if (!input.contains("remove") || !input.at("remove").is_number_unsigned()) {
    throw ScenarioError("remove", "expected the 1-based id of the agent to remove");
  }
  const auto id = input.at("remove").get<std::size_t>();
  if (id < 1 || id > base.size()) throw ScenarioError("remove", fmt::format("agent {} is not in 1..{}", id, base.size()));
  return io::to_json(robustness_removal(base, AgentId{id}, params));
}

json sweep(const json& grid, std::size_t jobs) { return io::to_json(batch_sweep(io::parse_grid(grid), jobs)); }

json figure_spec(int figure) {
  switch (figure) {
    case 1:
    case 2:
      return io::to_json(fig12_base());
    case 3:
      return io::to_json(fig3_base(false));
    default:
      throw ParameterError(fmt::format("no figure {}", figure));
  }
}

json figures(const std::filesystem::path& dir, const FigureOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  json summary;

  // Clustered limit with at least two groups.
  {
    json meta = {{"seed_range", {options.fig1_seed_begin, options.fig1_seed_end}}, {"found", false}};
    for (std::uint64_t seed = options.fig1_seed_begin; seed < options.fig1_seed_end; ++seed) {
      ScenarioSpec<double> spec = seeded(fig12_base(), seed);
      const auto probe = simulate(spec);
      if (probe.limit != LimitClass::clustered || probe.cluster_sizes.size() < 2) continue;
      const auto result = thinned_run(spec, probe.trajectory.steps, options.max_snapshots);
      write_run(dir, "fig1", io::to_json(spec), artifacts_of(spec, result, "k-NN dynamics, n=20, k=5: clustered limit"));
      meta = {{"seed_range", {options.fig1_seed_begin, options.fig1_seed_end}},
              {"found", true},
              {"seed", seed},
              {"limit", std::string(to_string(result.limit))},
              {"cluster_sizes", result.cluster_sizes},
              {"steps", result.trajectory.steps}};
      break;
    }
    summary["fig1"] = meta;
  }

  // Non-clustered limit; falls back to the exact construction.
  {
    json meta = {{"seed_range", {options.fig2_seed_begin, options.fig2_seed_end}}, {"found", false}};
    for (std::uint64_t seed = options.fig2_seed_begin; seed < options.fig2_seed_end; ++seed) {
      ScenarioSpec<double> spec = seeded(fig12_base(), seed);
      const auto probe = simulate(spec);
      if (probe.limit != LimitClass::non_clustered) continue;
      const auto result = thinned_run(spec, probe.trajectory.steps, options.max_snapshots);
      write_run(dir, "fig2", io::to_json(spec),
                artifacts_of(spec, result, "k-NN dynamics, n=20, k=5: non-clustered limit"));
      meta["found"] = true;
      meta["seed"] = seed;
      meta["limit"] = std::string(to_string(result.limit));
      meta["cluster_sizes"] = result.cluster_sizes;
      meta["steps"] = result.trajectory.steps;
      break;
    }
    if (!meta["found"].get<bool>()) {
      ScenarioSpec<Rational> spec;
      spec.model = KnnModel{5};
      const auto config = build_example1(Rational(0), Rational(1));
      spec.initial = ExplicitInitial<Rational>{{config.opinions().begin(), config.opinions().end()}};
      spec.schedule = UniformRandomSchedule{0};
      spec.max_steps = 1000;
      const auto result = simulate(spec);
      write_run(dir, "fig2", io::to_json(spec),
                artifacts_of(spec, result, "k-NN dynamics, n=20, k=5: non-clustered equilibrium (exact construction)"));
      meta["fallback"] = "no non-clustered limit in the seed range; the exact 11/2/2/5 construction on [0, 1] is shown instead";
      meta["limit"] = std::string(to_string(result.limit));
      meta["cluster_sizes"] = result.cluster_sizes;
    }
    summary["fig2"] = meta;
  }

  // Four agents added to a consensus at 0.4, k-NN against bounded confidence.
  {
    json meta = {{"seed_range", {options.fig3_seed_begin, options.fig3_seed_end}}, {"found", false}};
    std::uint64_t chosen = options.fig3_seed_begin;
    for (std::uint64_t seed = options.fig3_seed_begin; seed < options.fig3_seed_end; ++seed) {
      const auto abc = simulate(seeded(fig3_base(true), seed));
      if (originals_moved(abc.trajectory, 10, 0.4)) {
        chosen = seed;
        meta["found"] = true;
        break;
      }
    }
    meta["seed"] = chosen;
    for (const bool abc : {false, true}) {
      ScenarioSpec<double> spec = seeded(fig3_base(abc), chosen);
      const auto result = simulate(spec);
      const std::string name = abc ? "fig3_abc" : "fig3_knn";
      const std::string title = abc ? "bounded confidence, d=0.25: four agents added" : "k-NN, k=5: four agents added";
      write_run(dir, name, io::to_json(spec), artifacts_of(spec, result, title));
      meta[abc ? "abc" : "knn"] = {{"originals_moved", originals_moved(result.trajectory, 10, 0.4)},
                                   {"limit", std::string(to_string(result.limit))},
                                   {"final", result.trajectory.final_state().opinions}};
    }
    summary["fig3"] = meta;
  }

  io::write_json_file(dir / "figures.json", summary);
  return summary;
}

}  // namespace knnod::cli
