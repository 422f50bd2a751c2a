#include "knnod/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "knnod/random.hpp"

namespace knnod::io {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string join(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ScenarioError(path.empty() ? "<root>" : path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ScenarioError(join(path, key), "missing required field");
  return *it;
}

std::uint64_t as_u64(const json& j, const std::string& field) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0)) {
    throw ScenarioError(field, "expected a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

double as_double(const json& j, const std::string& field) {
  if (!j.is_number()) throw ScenarioError(field, "expected a number");
  return j.get<double>();
}

template <class T>
T optional_field(const json& obj, const std::string& key, T fallback, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if constexpr (std::is_same_v<T, double>) {
    return as_double(*it, join(path, key));
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) throw ScenarioError(join(path, key), "expected a boolean");
    return it->get<bool>();
  } else {
    return static_cast<T>(as_u64(*it, join(path, key)));
  }
}

std::string type_of(const json& obj, const std::string& path) {
  const json& t = require(obj, "type", path);
  if (!t.is_string()) throw ScenarioError(join(path, "type"), "expected a string");
  return t.get<std::string>();
}

template <OpinionScalar S>
OpinionSpec<S> opinion_from_json(const json& j, const std::string& field) {
  if (j.is_object()) {
    const json& range = require(j, "uniform", field);
    if (!range.is_array() || range.size() != 2) throw ScenarioError(join(field, "uniform"), "expected [lo, hi]");
    return UniformOpinion{as_double(range[0], join(field, "uniform")), as_double(range[1], join(field, "uniform"))};
  }
  return scalar_from_json<S>(j, field);
}

template <OpinionScalar S>
ScenarioSpec<S> scenario_from_json(const json& j) {
  ScenarioSpec<S> spec;

  const json& model = require(j, "model", "");
  const std::string model_type = type_of(model, "model");
  if (model_type == "knn") {
    spec.model = KnnModel{static_cast<std::size_t>(as_u64(require(model, "k", "model"), "model.k"))};
  } else if (model_type == "abc") {
    spec.model = AbcModel<S>{scalar_from_json<S>(require(model, "d", "model"), "model.d")};
  } else {
    throw ScenarioError("model.type", "unknown model '" + model_type + "' (knn, abc)");
  }

  const json& initial = require(j, "initial", "");
  const std::string initial_type = type_of(initial, "initial");
  if (initial_type == "uniform") {
    UniformInitial u;
    u.n = static_cast<std::size_t>(as_u64(require(initial, "n", "initial"), "initial.n"));
    u.lo = optional_field(initial, "lo", 0.0, "initial");
    u.hi = optional_field(initial, "hi", 1.0, "initial");
    u.seed = optional_field<std::uint64_t>(initial, "seed", 0, "initial");
    spec.initial = u;
  } else if (initial_type == "explicit") {
    const json& ops = require(initial, "opinions", "initial");
    if (!ops.is_array()) throw ScenarioError("initial.opinions", "expected an array");
    ExplicitInitial<S> e;
    for (std::size_t i = 0; i < ops.size(); ++i) e.opinions.push_back(scalar_from_json<S>(ops[i], join("initial.opinions", i)));
    spec.initial = std::move(e);
  } else if (initial_type == "clusters") {
    const json& blocks = require(initial, "clusters", "initial");
    if (!blocks.is_array()) throw ScenarioError("initial.clusters", "expected an array");
    ClustersInitial<S> c;
    for (std::size_t g = 0; g < blocks.size(); ++g) {
      const std::string path = join("initial.clusters", g);
      c.clusters.push_back({scalar_from_json<S>(require(blocks[g], "opinion", path), join(path, "opinion")),
                            static_cast<std::size_t>(as_u64(require(blocks[g], "count", path), join(path, "count")))});
    }
    spec.initial = std::move(c);
  } else {
    throw ScenarioError("initial.type", "unknown initial '" + initial_type + "' (uniform, explicit, clusters)");
  }

  if (const auto it = j.find("schedule"); it != j.end()) {
    const std::string schedule_type = type_of(*it, "schedule");
    if (schedule_type == "uniform_random") {
      spec.schedule = UniformRandomSchedule{optional_field<std::uint64_t>(*it, "seed", 0, "schedule")};
    } else if (schedule_type == "explicit") {
      const json& agents = require(*it, "agents", "schedule");
      if (!agents.is_array()) throw ScenarioError("schedule.agents", "expected an array");
      ExplicitSchedule e;
      for (std::size_t t = 0; t < agents.size(); ++t) {
        const auto id = as_u64(agents[t], join("schedule.agents", t));
        if (id < 1) throw ScenarioError(join("schedule.agents", t), "agent ids are 1-based");
        e.agents.push_back(AgentId{static_cast<std::size_t>(id)});
      }
      spec.schedule = std::move(e);
    } else if (schedule_type == "shrink") {
      spec.schedule = ShrinkCycleSchedule{};
    } else {
      throw ScenarioError("schedule.type", "unknown schedule '" + schedule_type + "' (uniform_random, explicit, shrink)");
    }
  }

  if (const auto it = j.find("events"); it != j.end()) {
    if (!it->is_array()) throw ScenarioError("events", "expected an array");
    for (std::size_t e = 0; e < it->size(); ++e) {
      const json& ev = (*it)[e];
      const std::string path = join("events", e);
      const std::string ev_type = type_of(ev, path);
      const auto step = static_cast<std::size_t>(as_u64(require(ev, "step", path), join(path, "step")));
      if (ev_type == "add") {
        spec.events.push_back(AddAgent<S>{step, opinion_from_json<S>(require(ev, "opinion", path), join(path, "opinion"))});
      } else if (ev_type == "remove") {
        const auto id = as_u64(require(ev, "agent", path), join(path, "agent"));
        if (id < 1) throw ScenarioError(join(path, "agent"), "agent ids are 1-based");
        spec.events.push_back(RemoveAgent{step, AgentId{static_cast<std::size_t>(id)}});
      } else {
        throw ScenarioError(join(path, "type"), "unknown event '" + ev_type + "' (add, remove)");
      }
    }
  }

  spec.event_seed = optional_field<std::uint64_t>(j, "event_seed", 0, "");
  spec.max_steps = optional_field<std::size_t>(j, "max_steps", spec.max_steps, "");
  spec.tolerance = optional_field(j, "tolerance", spec.tolerance, "");
  spec.record_every = optional_field<std::size_t>(j, "record_every", spec.record_every, "");
  spec.check_interval = optional_field<std::size_t>(j, "check_interval", spec.check_interval, "");
  spec.record_neighbors = optional_field(j, "record_neighbors", false, "");
  validate(spec);
  return spec;
}

std::vector<json> agent_list(const std::vector<AgentId>& ids) {
  std::vector<json> out;
  out.reserve(ids.size());
  for (AgentId id : ids) out.emplace_back(id.value);
  return out;
}

json counterexample_json(const Counterexample& c) {
  json arr = json::array();
  for (const auto& v : c.initial) arr.push_back(to_json(v));
  return {{"initial", arr}, {"k", c.k}, {"step", c.step}, {"message", c.message}};
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const json& doc) { write_text_file(path, doc.dump(2) + "\n"); }

json to_json(double v) { return v; }
json to_json(const Rational& v) { return v.to_string(); }

template <>
double scalar_from_json<double>(const json& j, const std::string& field) {
  if (j.is_string()) throw BackendError(field + ": mixed backends, exact literal '" + j.get<std::string>() + "' in a float context");
  if (!j.is_number()) throw ScenarioError(field, "expected a number");
  return j.get<double>();
}

template <>
Rational scalar_from_json<Rational>(const json& j, const std::string& field) {
  if (j.is_string()) {
    try {
      return Rational::parse(j.get<std::string>());
    } catch (const ParseError& e) {
      throw ParseError(field + ": " + e.what());
    }
  }
  if (j.is_number_integer()) return Rational::parse(j.dump());
  if (j.is_number()) throw BackendError(field + ": mixed backends, float literal " + j.dump() + " in an exact context (write it as a \"p/q\" string)");
  throw ScenarioError(field, "expected a \"p/q\" string or an integer");
}

AnyConfiguration parse_configuration(const json& j) {
  const json& arr = j.is_object() ? require(j, "opinions", "") : j;
  if (!arr.is_array() || arr.empty()) throw ParseError("configuration must be a non-empty array of opinions");
  const bool exact = std::any_of(arr.begin(), arr.end(), [](const json& v) { return v.is_string(); });
  if (exact) {
    std::vector<Rational> values;
    for (std::size_t i = 0; i < arr.size(); ++i) values.push_back(scalar_from_json<Rational>(arr[i], join("opinions", i)));
    return Configuration<Rational>(std::move(values));
  }
  std::vector<double> values;
  for (std::size_t i = 0; i < arr.size(); ++i) values.push_back(scalar_from_json<double>(arr[i], join("opinions", i)));
  return Configuration<double>(std::move(values));
}

json to_json(const AnyConfiguration& config) {
  return std::visit([](const auto& c) { return to_json(c); }, config);
}

json to_json(const EquilibriumReport& report) {
  json witnesses = json::array();
  for (const auto& w : report.witnesses) {
    witnesses.push_back({{"property", w.property}, {"agent", w.agent.value}, {"neighbors", agent_list(w.neighbors)}});
  }
  return {{"equilibrium", report.is_equilibrium},
          {"clustered", report.is_clustered},
          {"consensus", report.is_consensus},
          {"numerical", report.numerical},
          {"witnesses", witnesses}};
}

template <OpinionScalar S>
json to_json(const ClusterPartition<S>& partition) {
  json groups = json::array();
  for (const auto& g : partition.groups) {
    groups.push_back({{"opinion", to_json(g.opinion)}, {"members", agent_list(g.members)}, {"size", g.members.size()}});
  }
  return {{"groups", groups}, {"sizes", partition.sizes()}};
}

template json to_json(const ClusterPartition<double>&);
template json to_json(const ClusterPartition<Rational>&);

json to_json(const LemmaReport& report) {
  json j = {{"name", report.name}, {"passed", report.passed}, {"checked", report.checked}};
  j["counterexample"] = report.counterexample ? counterexample_json(*report.counterexample) : json(nullptr);
  if (report.worst_ratio) {
    j["worst_ratio"] = report.worst_ratio->to_string();
    j["worst_ratio_approx"] = report.worst_ratio->to_double();
  }
  if (!report.note.empty()) j["note"] = report.note;
  return j;
}

json to_json(const SuiteReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks) checks.push_back(to_json(c));
  return {{"seed", report.seed}, {"trials", report.trials}, {"all_passed", report.all_passed()}, {"checks", checks}};
}

json to_json(const Quantiles& q) {
  return {{"min", q.min}, {"p50", q.p50}, {"p90", q.p90}, {"max", q.max}, {"mean", q.mean}};
}

json to_json(const ConsensusStats& stats) {
  json runs = json::array();
  for (const auto& r : stats.runs) {
    runs.push_back({{"seed", r.seed},
                    {"converged", r.converged},
                    {"hitting_time", r.hitting_time ? json(*r.hitting_time) : json(nullptr)},
                    {"steps", r.steps},
                    {"consensus_value", r.consensus_value},
                    {"initial_min", r.initial_min},
                    {"initial_max", r.initial_max},
                    {"in_hull", r.in_hull}});
  }
  return {{"n", stats.n},
          {"k", stats.k},
          {"seed", stats.seed},
          {"max_steps", stats.max_steps},
          {"tolerance", stats.tolerance},
          {"runs", stats.runs.size()},
          {"converged", stats.converged},
          {"converged_fraction", stats.converged_fraction()},
          {"all_in_hull", stats.all_in_hull()},
          {"hitting_time", stats.hitting_time ? to_json(*stats.hitting_time) : json(nullptr)},
          {"per_run", runs}};
}

json to_json(const SweepStats& stats) {
  json outcomes = json::array();
  for (const auto& o : stats.outcomes) {
    json j = {{"index", o.index}, {"ok", o.ok}};
    if (o.ok) {
      j["limit"] = std::string(to_string(o.limit));
      j["cluster_sizes"] = o.cluster_sizes;
      j["hitting_time"] = o.hitting_time ? json(*o.hitting_time) : json(nullptr);
      j["steps"] = o.steps;
      j["stop_reason"] = std::string(to_string(o.stop_reason));
    } else {
      j["error"] = o.error;
    }
    outcomes.push_back(std::move(j));
  }
  json limits = json::object();
  for (LimitClass c : {LimitClass::consensus, LimitClass::clustered, LimitClass::non_clustered, LimitClass::not_converged}) {
    const auto it = stats.limit_counts.find(c);
    limits[std::string(to_string(c))] = it == stats.limit_counts.end() ? 0 : it->second;
  }
  json histogram = json::object();
  for (const auto& [count, runs] : stats.cluster_count_histogram) histogram[std::to_string(count)] = runs;
  return {{"scenarios", stats.outcomes.size()},
          {"errors", stats.errors},
          {"limits", limits},
          {"cluster_count_histogram", histogram},
          {"cluster_size_patterns", stats.cluster_size_patterns},
          {"hitting_time", stats.hitting_time ? to_json(*stats.hitting_time) : json(nullptr)},
          {"stop_step", stats.stop_step ? to_json(*stats.stop_step) : json(nullptr)},
          {"outcomes", outcomes}};
}

namespace {

json run_summary(const SimulationResult<double>& r) {
  return {{"limit", std::string(to_string(r.limit))},
          {"stop_reason", std::string(to_string(r.trajectory.stop_reason))},
          {"steps", r.trajectory.steps},
          {"cluster_sizes", r.cluster_sizes},
          {"final", r.trajectory.final_state().opinions}};
}

}  // namespace

json to_json(const AdditionReport& report) {
  json j = {{"original_agents", report.original_agents},
            {"originals_untouched", report.originals_untouched},
            {"added_final", report.added_final},
            {"knn", run_summary(report.knn)}};
  if (report.abc) {
    j["abc"] = run_summary(*report.abc);
    j["abc_originals_changed"] = *report.abc_originals_changed;
  }
  return j;
}

json to_json(const RemovalReport& report) {
  json j = {{"removed", report.removed.value},
            {"victim_cluster_size", report.victim_cluster_size},
            {"expected_equilibrium", report.expected_equilibrium},
            {"still_equilibrium", report.still_equilibrium}};
  j["knn_after"] = report.knn_after ? run_summary(*report.knn_after) : json(nullptr);
  if (report.abc_remaining_unchanged) j["abc_remaining_unchanged"] = *report.abc_remaining_unchanged;
  return j;
}

template <OpinionScalar S>
OpinionSpec<S> parse_opinion(const json& j, const std::string& field) {
  return opinion_from_json<S>(j, field);
}

template OpinionSpec<double> parse_opinion(const json&, const std::string&);
template OpinionSpec<Rational> parse_opinion(const json&, const std::string&);

AnyScenario parse_scenario(const json& j) {
  if (!j.is_object()) throw ScenarioError("<root>", "scenario must be a JSON object");
  const std::string backend = j.contains("backend") ? j.at("backend").get<std::string>() : "float";
  if (backend == "float") return scenario_from_json<double>(j);
  if (backend == "exact") return scenario_from_json<Rational>(j);
  throw ScenarioError("backend", "unknown backend '" + backend + "' (float, exact)");
}

template <OpinionScalar S>
json to_json(const ScenarioSpec<S>& spec) {
  json j;
  j["backend"] = std::string(ScalarTraits<S>::name);
  j["model"] = std::visit(overloaded{[](const KnnModel& m) { return json{{"type", "knn"}, {"k", m.k}}; },
                                     [](const AbcModel<S>& m) { return json{{"type", "abc"}, {"d", to_json(m.d)}}; }},
                          spec.model);
  j["initial"] = std::visit(
      overloaded{[](const UniformInitial& u) {
                   return json{{"type", "uniform"}, {"n", u.n}, {"lo", u.lo}, {"hi", u.hi}, {"seed", u.seed}};
                 },
                 [](const ExplicitInitial<S>& e) {
                   json ops = json::array();
                   for (const S& v : e.opinions) ops.push_back(to_json(v));
                   return json{{"type", "explicit"}, {"opinions", ops}};
                 },
                 [](const ClustersInitial<S>& c) {
                   json blocks = json::array();
                   for (const auto& b : c.clusters) blocks.push_back({{"opinion", to_json(b.opinion)}, {"count", b.count}});
                   return json{{"type", "clusters"}, {"clusters", blocks}};
                 }},
      spec.initial);
  j["schedule"] = std::visit(overloaded{[](const UniformRandomSchedule& s) { return json{{"type", "uniform_random"}, {"seed", s.seed}}; },
                                        [](const ExplicitSchedule& s) { return json{{"type", "explicit"}, {"agents", agent_list(s.agents)}}; },
                                        [](const ShrinkCycleSchedule&) { return json{{"type", "shrink"}}; }},
                             spec.schedule);
  json events = json::array();
  for (const auto& ev : spec.events) {
    events.push_back(std::visit(
        overloaded{[](const AddAgent<S>& a) {
                     json op = std::visit(overloaded{[](const S& v) { return to_json(v); },
                                                     [](const UniformOpinion& u) { return json{{"uniform", {u.lo, u.hi}}}; }},
                                          a.opinion);
                     return json{{"type", "add"}, {"step", a.step}, {"opinion", op}};
                   },
                   [](const RemoveAgent& r) { return json{{"type", "remove"}, {"step", r.step}, {"agent", r.agent.value}}; }},
        ev));
  }
  j["events"] = events;
  j["event_seed"] = spec.event_seed;
  j["max_steps"] = spec.max_steps;
  j["tolerance"] = spec.tolerance;
  j["record_every"] = spec.record_every;
  j["check_interval"] = spec.check_interval;
  j["record_neighbors"] = spec.record_neighbors;
  return j;
}

template json to_json(const ScenarioSpec<double>&);
template json to_json(const ScenarioSpec<Rational>&);

json to_json(const AnyScenario& spec) {
  return std::visit([](const auto& s) { return to_json(s); }, spec);
}

std::vector<AnyScenario> parse_grid(const json& j) {
  const json& items = j.is_object() ? require(j, "scenarios", "") : j;
  if (!items.is_array()) throw ScenarioError("scenarios", "expected an array");
  std::vector<AnyScenario> grid;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const json& item = items[i];
    const std::string path = join("scenarios", i);
    try {
      if (item.is_object() && item.contains("replicate")) {
        const json& rep = item.at("replicate");
        const AnyScenario base = parse_scenario(require(rep, "base", join(path, "replicate")));
        const auto runs = as_u64(require(rep, "runs", join(path, "replicate")), join(path, "replicate.runs"));
        const auto seed = optional_field<std::uint64_t>(rep, "seed", 0, join(path, "replicate"));
        for (auto& s : replicate(base, static_cast<std::size_t>(runs), seed)) grid.push_back(std::move(s));
      } else {
        grid.push_back(parse_scenario(item));
      }
    } catch (const ScenarioError& e) {
      throw ScenarioError(path + "." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
  }
  return grid;
}

template <OpinionScalar S>
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord<S>& record) {
  os << "step,agent_id,opinion\n";
  for (const auto& snap : record.snapshots) {
    for (std::size_t i = 0; i < snap.ids.size(); ++i) {
      os << snap.step << ',' << snap.ids[i].value << ',' << ScalarTraits<S>::to_text(snap.opinions[i]) << '\n';
    }
  }
}

template void write_trajectory_csv(std::ostream&, const TrajectoryRecord<double>&);
template void write_trajectory_csv(std::ostream&, const TrajectoryRecord<Rational>&);

template <OpinionScalar S>
json trajectory_metadata(const SimulationResult<S>& result) {
  const auto& record = result.trajectory;
  json diameters = json::array();
  for (const S& d : record.diameters) diameters.push_back(to_json(d));
  json neighborhoods = json::array();
  for (const auto& ns : record.neighborhoods) neighborhoods.push_back(agent_list(ns));
  return {{"backend", std::string(ScalarTraits<S>::name)},
          {"rng", std::string(Rng::kName)},
          {"stop_reason", std::string(to_string(record.stop_reason))},
          {"steps", record.steps},
          {"limit", std::string(to_string(result.limit))},
          {"cluster_sizes", result.cluster_sizes},
          {"hitting_time", result.hitting_time ? json(*result.hitting_time) : json(nullptr)},
          {"snapshots", record.snapshots.size()},
          {"updaters", agent_list(record.updaters)},
          {"diameters", diameters},
          {"neighborhoods", neighborhoods},
          {"notes", record.notes}};
}

template json trajectory_metadata(const SimulationResult<double>&);
template json trajectory_metadata(const SimulationResult<Rational>&);

template <OpinionScalar S>
std::string trajectory_svg(const TrajectoryRecord<S>& record, const std::string& title) {
  constexpr double width = 720;
  constexpr double height = 420;
  constexpr double left = 60;
  constexpr double right = 20;
  constexpr double top = 36;
  constexpr double bottom = 44;
  static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  double lo = 0;
  double hi = 1;
  bool first = true;
  std::map<std::size_t, std::vector<std::pair<double, double>>> series;  // agent -> (step, opinion)
  for (const auto& snap : record.snapshots) {
    for (std::size_t i = 0; i < snap.ids.size(); ++i) {
      const double v = ScalarTraits<S>::to_double(snap.opinions[i]);
      if (first) {
        lo = hi = v;
        first = false;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      series[snap.ids[i].value].emplace_back(static_cast<double>(snap.step), v);
    }
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const double t_max = std::max<double>(1.0, static_cast<double>(record.steps));
  const auto sx = [&](double t) { return left + (width - left - right) * t / t_max; };
  const auto sy = [&](double v) { return top + (height - top - bottom) * (hi - v) / (hi - lo); };

  std::ostringstream svg;
  svg << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)", width,
                     height, width, height)
      << "\n";
  svg << fmt::format(R"(<rect width="{}" height="{}" fill="white"/>)", width, height) << "\n";
  svg << fmt::format(R"(<text x="{}" y="22" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>)",
                     width / 2, title)
      << "\n";
  svg << fmt::format(R"(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/>)", left, top, height - bottom) << "\n";
  svg << fmt::format(R"(<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/>)", left, height - bottom, width - right)
      << "\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = lo + (hi - lo) * tick / 4.0;
    const double t = t_max * tick / 4.0;
    svg << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{:.3g}</text>)",
                       left - 6, sy(v) + 3, v)
        << "\n";
    svg << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{:.0f}</text>)",
                       sx(t), height - bottom + 16, t)
        << "\n";
  }
  svg << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">time step</text>)",
                     (left + width - right) / 2, height - 8)
      << "\n";
  svg << fmt::format(
             R"svg(<text x="14" y="{0}" font-family="sans-serif" font-size="11" text-anchor="middle" transform="rotate(-90 14 {0})">opinion</text>)svg",
             (top + height - bottom) / 2)
      << "\n";
  for (const auto& [agent, points] : series) {
    svg << fmt::format(R"(<polyline fill="none" stroke-width="1.2" stroke="{}" points=")", palette[(agent - 1) % 10]);
    for (std::size_t p = 0; p < points.size(); ++p) {
      svg << (p == 0 ? "" : " ") << fmt::format("{:.2f},{:.2f}", sx(points[p].first), sy(points[p].second));
    }
    // Extend a lone point into a visible tick.
    if (points.size() == 1) svg << fmt::format(" {:.2f},{:.2f}", sx(points[0].first) + 1, sy(points[0].second));
    svg << R"("><title>agent )" << agent << "</title></polyline>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

template std::string trajectory_svg(const TrajectoryRecord<double>&, const std::string&);
template std::string trajectory_svg(const TrajectoryRecord<Rational>&, const std::string&);

}  // namespace knnod::io
