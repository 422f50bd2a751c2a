#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "knnod/configuration.hpp"

namespace knnod {

enum class StopReason {
  converged,             // clustered limit reached (exactly, or within tolerance)
  equilibrium_detected,  // non-clustered equilibrium
  max_steps,
  schedule_exhausted,    // explicit or shrink schedule ran out
};

std::string_view to_string(StopReason reason);

/// Opinions of the agents present at `step`, ids ascending.
template <OpinionScalar S>
struct Snapshot {
  std::size_t step = 0;
  std::vector<AgentId> ids;
  std::vector<S> opinions;

  Configuration<S> configuration() const { return Configuration<S>(opinions); }
};

/// Time-indexed record of one run.
///
/// updaters[t] is the agent that moved at step t, diameters[t] is the diameter
/// before that move (so diameters has steps + 1 entries). Snapshots are taken
/// at the recording interval; the first and the last state are always present.
template <OpinionScalar S>
struct TrajectoryRecord {
  std::vector<Snapshot<S>> snapshots;
  std::vector<AgentId> updaters;
  std::vector<std::vector<AgentId>> neighborhoods;  // N_{I(t)}, when recorded
  std::vector<S> diameters;
  std::size_t steps = 0;
  StopReason stop_reason = StopReason::max_steps;
  std::vector<std::string> notes;

  const Snapshot<S>& initial_state() const { return snapshots.front(); }
  const Snapshot<S>& final_state() const { return snapshots.back(); }
};

}  // namespace knnod
