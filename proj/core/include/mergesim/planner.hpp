#pragma once

#include <array>
#include <map>
#include <vector>

#include "mergesim/behavior.hpp"
#include "mergesim/intent.hpp"
#include "mergesim/traffic.hpp"

namespace mergesim {

struct PlannerConfig {
  int horizon = 3;        // N; also the length of predicted neighbor sequences
  double discount = 0.9;  // lambda
  // Adds the neighbor's progress term to the ego step reward to discourage
  // merges that stall surrounding traffic.
  bool include_neighbor_progress = false;

  void validate() const;
};

struct PlanResult {
  DriverAction action = DriverAction::Maintain;
  std::array<double, kActionCount> action_values{};  // Q_0(s, u) per action
  std::array<bool, kActionCount> feasible{};
  std::map<int, IntentBelief> beliefs_used;
  double elapsed_seconds = 0.0;  // diagnostic only; never written to traces
};

// Discounted pairwise cumulative reward of the ego against one neighbor for a
// fixed pair of action sequences; the step reward is the boundary- and
// collision-gated progress of the ego (plus optionally the neighbor's).
double ego_pair_value(const TrafficSnapshot& snapshot, int ego_id, int neighbor_id,
                      const ActionSequence& gamma_ego, const ActionSequence& gamma_other,
                      const ModelParams& params, const PlannerConfig& cfg);

// Q'_0: expectation of ego_pair_value over each neighbor's intent belief and
// the sequence distribution it induces, averaged over the ego's neighbors.
// Neighbors without an entry in `beliefs` use the uniform belief. Throws when
// the ego has no adjacent vehicles.
double ego_cumulative(const TrafficSnapshot& snapshot, int ego_id,
                      const ActionSequence& gamma_ego,
                      const std::map<int, IntentBelief>& beliefs,
                      const ModelParams& params, const PlannerConfig& cfg);

// One receding-horizon step: exhaustive enumeration of Q_0(s, u) and argmax
// over feasible actions (ties resolved by the fixed action order).
PlanResult plan(const TrafficSnapshot& snapshot, int ego_id,
                const std::map<int, IntentBelief>& beliefs, const ModelParams& params,
                const PlannerConfig& cfg);

// Planner fallback for an ego with no adjacent vehicles: maximizes the
// discounted boundary-gated progress roll-up alone.
PlanResult plan_solo(const TrafficSnapshot& snapshot, int ego_id,
                     const ModelParams& params, const PlannerConfig& cfg);

}  // namespace mergesim
