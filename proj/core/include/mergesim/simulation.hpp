#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mergesim/behavior.hpp"
#include "mergesim/intent.hpp"
#include "mergesim/planner.hpp"
#include "mergesim/traffic.hpp"

namespace mergesim {

enum class ControllerKind : std::uint8_t {
  Planner = 0,        // the ego: receding-horizon merging controller
  Behavior = 1,       // scripted driver following the behavior model
  Replay = 2,         // fixed action script
  ConstantSpeed = 3,  // always Maintain
};

const char* controller_name(ControllerKind kind);
ControllerKind controller_from_name(const std::string& name);

struct VehicleSpec {
  int id = 0;
  VehicleState initial;
  bool merging = false;
  ControllerKind controller = ControllerKind::ConstantSpeed;
  // Behavior-controller parameters.
  SocialOrientation sigma;
  ObjectiveWeights weights;
  bool sample = false;  // argmax by default; softmax sampling when true
  // Replay-controller script; Maintain once exhausted.
  std::vector<DriverAction> script;
};

struct ScenarioConfig {
  RoadGeometry road;
  KinematicsConfig kinematics;
  RewardConfig rewards;
  BehaviorConfig behavior;
  PlannerConfig planner;
  std::vector<VehicleSpec> vehicles;
  std::uint64_t seed = 0;
  int max_steps = 30;
  double adjacency_radius = 100.0;
  bool disturbances = false;  // seeded Gaussian disturbances for every vehicle

  void validate() const;  // exactly one planner-controlled vehicle, unique ids
  ModelParams params() const;
  int ego_id() const;
};

enum class Verdict : std::uint8_t {
  MergedSuccess = 0,
  Collision = 1,
  RampEndFailure = 2,
  Timeout = 3,
};

const char* verdict_name(Verdict v);

struct TraceRow {
  int step = 0;
  double time = 0.0;
  int vehicle_id = 0;
  VehicleState state;
  std::optional<DriverAction> action;                     // empty on terminal rows
  std::optional<std::array<double, kActionCount>> q_values;  // ego rows only
};

struct BeliefRow {
  int step = 0;
  double time = 0.0;
  int vehicle_id = 0;
  std::array<double, kIntentCellCount> probabilities{};
};

struct SimOutcome {
  Verdict verdict = Verdict::Timeout;
  double merge_time = -1.0;  // seconds; -1 when the ego never reached the lane center
  int steps = 0;             // time index at classification
  int ego_id = 0;
  std::vector<TraceRow> trace;
  std::vector<BeliefRow> belief_trace;
};

// Outcome classification for the transition into `current`; `previous`
// enables swept collision checks between consecutive states (pass nullptr at
// the first step). Returns nothing while the run should continue. The
// verdicts are mutually exclusive: collision is checked first, then the ramp
// end, then merge completion (the ego exactly at the target lane center while
// still beside the ramp).
std::optional<Verdict> classify_transition(const TrafficSnapshot& current,
                                           const TrafficSnapshot* previous, int ego_id,
                                           const RoadGeometry& road,
                                           const SafetyConfig& safety);

// Closed-loop simulation: update beliefs, plan the ego action, evaluate
// scripted vehicles, step everything with seeded disturbances, classify.
SimOutcome run(const ScenarioConfig& scenario);

// Scenario JSON files (schema documented in the README).
ScenarioConfig load_scenario(const std::filesystem::path& path);
void save_scenario(const ScenarioConfig& scenario, const std::filesystem::path& path);
ScenarioConfig scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const ScenarioConfig& scenario);

// Output writers. Numbers are printed with shortest round-trip formatting so
// identical runs produce byte-identical files.
void write_trace_csv(const SimOutcome& outcome, const std::filesystem::path& path);
void write_beliefs_csv(const SimOutcome& outcome, const std::filesystem::path& path);
void write_outcome_summary(const SimOutcome& outcome, const std::filesystem::path& path,
                           const std::string& format);  // "csv" or "json"

std::string format_double(double value);  // shortest round-trip representation

}  // namespace mergesim
