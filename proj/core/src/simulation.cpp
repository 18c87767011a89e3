#include "mergesim/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace mergesim {

const char* controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Planner: return "planner";
    case ControllerKind::Behavior: return "behavior";
    case ControllerKind::Replay: return "replay";
    case ControllerKind::ConstantSpeed: return "constant-speed";
  }
  throw std::logic_error("unknown controller kind");
}

ControllerKind controller_from_name(const std::string& name) {
  for (ControllerKind k : {ControllerKind::Planner, ControllerKind::Behavior,
                           ControllerKind::Replay, ControllerKind::ConstantSpeed}) {
    if (name == controller_name(k)) return k;
  }
  throw std::invalid_argument("unknown controller kind: " + name);
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::MergedSuccess: return "MergedSuccess";
    case Verdict::Collision: return "Collision";
    case Verdict::RampEndFailure: return "RampEndFailure";
    case Verdict::Timeout: return "Timeout";
  }
  throw std::logic_error("unknown verdict");
}

void ScenarioConfig::validate() const {
  params().validate();
  planner.validate();
  if (!(adjacency_radius > 0.0))
    throw std::invalid_argument("scenario: adjacency_radius must be > 0");
  if (max_steps < 1) throw std::invalid_argument("scenario: max_steps must be >= 1");
  if (vehicles.empty()) throw std::invalid_argument("scenario: needs at least one vehicle");
  std::set<int> ids;
  int planners = 0;
  for (const VehicleSpec& v : vehicles) {
    if (!ids.insert(v.id).second)
      throw std::invalid_argument("scenario: duplicate vehicle id " + std::to_string(v.id));
    if (v.controller == ControllerKind::Planner) ++planners;
    if (v.controller == ControllerKind::Behavior) v.weights.validate();
    if (v.initial.v_x < kinematics.v_min || v.initial.v_x > kinematics.v_max)
      throw std::invalid_argument("scenario: initial speed outside [v_min, v_max] for vehicle " +
                                  std::to_string(v.id));
    if (v.initial.y < 0.0 || v.initial.y > road.upper_boundary_y())
      throw std::invalid_argument("scenario: initial y outside the road for vehicle " +
                                  std::to_string(v.id));
  }
  if (planners != 1)
    throw std::invalid_argument("scenario: exactly one vehicle must use the planner controller");
}

ModelParams ScenarioConfig::params() const {
  return ModelParams{road, kinematics, rewards, behavior};
}

int ScenarioConfig::ego_id() const {
  for (const VehicleSpec& v : vehicles) {
    if (v.controller == ControllerKind::Planner) return v.id;
  }
  throw std::logic_error("scenario has no planner-controlled vehicle");
}

std::optional<Verdict> classify_transition(const TrafficSnapshot& current,
                                           const TrafficSnapshot* previous, int ego_id,
                                           const RoadGeometry& road,
                                           const SafetyConfig& safety) {
  const TrafficVehicle& ego = current.vehicle(ego_id);
  for (const TrafficVehicle& other : current.vehicles) {
    if (other.id == ego_id) continue;
    bool hit = boxes_overlap(ego.state, other.state, road, safety);
    if (!hit && previous != nullptr && previous->index_of(other.id) >= 0) {
      hit = swept_collision(previous->vehicle(ego_id).state, ego.state,
                            previous->vehicle(other.id).state, other.state, road, safety);
    }
    if (hit) return Verdict::Collision;
  }
  if (crosses_boundary(ego.state, road, safety)) {
    const bool past_ramp_end = ego.state.x > road.ramp_end_x;
    const bool below_highway =
        ego.state.y - safety.margin_lat < road.lower_boundary_y(ego.state.x);
    if (past_ramp_end && below_highway) return Verdict::RampEndFailure;
    return Verdict::Collision;
  }
  if (std::abs(ego.state.y - road.target_lane_center_y) < 1e-9 &&
      ego.state.x <= road.ramp_end_x) {
    return Verdict::MergedSuccess;
  }
  return std::nullopt;
}

namespace {

Eigen::Vector3d draw_disturbance(const Eigen::Matrix3d& cov, std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  Eigen::Vector3d z;
  for (int i = 0; i < 3; ++i) z(i) = unit(rng);
  return Eigen::LLT<Eigen::Matrix3d>(cov).matrixL() * z;
}

}  // namespace

SimOutcome run(const ScenarioConfig& scenario) {
  scenario.validate();
  const ModelParams params = scenario.params();
  const int ego_id = scenario.ego_id();
  const double dt = scenario.kinematics.dt;
  std::mt19937_64 rng(scenario.seed);

  std::vector<TrafficVehicle> current;
  current.reserve(scenario.vehicles.size());
  std::vector<VehicleSpec> specs = scenario.vehicles;
  std::sort(specs.begin(), specs.end(),
            [](const VehicleSpec& a, const VehicleSpec& b) { return a.id < b.id; });
  for (const VehicleSpec& spec : specs) {
    current.push_back(TrafficVehicle{spec.id, spec.initial, spec.merging});
  }

  SimOutcome outcome;
  outcome.ego_id = ego_id;
  std::map<int, IntentBelief> beliefs;
  TrafficSnapshot snapshot =
      make_snapshot(current, scenario.road, scenario.adjacency_radius, 0);
  TrafficSnapshot previous;

  const auto record_beliefs = [&](int step) {
    for (const TrafficVehicle& v : snapshot.vehicles) {
      if (v.id == ego_id) continue;
      BeliefRow row;
      row.step = step;
      row.time = step * dt;
      row.vehicle_id = v.id;
      const auto it = beliefs.find(v.id);
      const IntentBelief& belief = it == beliefs.end() ? init_belief() : it->second;
      std::copy(belief.probabilities.begin(), belief.probabilities.end(),
                row.probabilities.begin());
      outcome.belief_trace.push_back(row);
    }
  };

  const auto record_terminal = [&](int step) {
    for (const TrafficVehicle& v : snapshot.vehicles) {
      TraceRow row;
      row.step = step;
      row.time = step * dt;
      row.vehicle_id = v.id;
      row.state = v.state;
      outcome.trace.push_back(row);
    }
  };

  for (int step = 0;; ++step) {
    if (const auto verdict =
            classify_transition(snapshot, step == 0 ? nullptr : &previous, ego_id,
                                scenario.road, scenario.rewards.safety)) {
      outcome.verdict = *verdict;
      outcome.steps = step;
      if (*verdict == Verdict::MergedSuccess) outcome.merge_time = step * dt;
      record_beliefs(step);
      record_terminal(step);
      return outcome;
    }
    if (step >= scenario.max_steps) {
      outcome.verdict = Verdict::Timeout;
      outcome.steps = step;
      record_beliefs(step);
      record_terminal(step);
      return outcome;
    }

    // Beliefs first, then the plan that uses them.
    if (step > 0) {
      beliefs = update_all(beliefs, previous, snapshot, snapshot.neighbors(ego_id), params);
    }
    record_beliefs(step);

    std::map<int, DriverAction> actions;
    std::optional<std::array<double, kActionCount>> ego_q;
    for (const VehicleSpec& spec : specs) {
      if (snapshot.index_of(spec.id) < 0) continue;
      switch (spec.controller) {
        case ControllerKind::Planner: {
          const PlanResult result =
              snapshot.neighbors(spec.id).empty()
                  ? plan_solo(snapshot, spec.id, params, scenario.planner)
                  : plan(snapshot, spec.id, beliefs, params, scenario.planner);
          actions[spec.id] = result.action;
          ego_q = result.action_values;
          break;
        }
        case ControllerKind::Behavior:
          actions[spec.id] =
              spec.sample
                  ? behavior_action_sampled(snapshot, spec.id, spec.sigma, spec.weights,
                                            params, rng)
                  : behavior_action(snapshot, spec.id, spec.sigma, spec.weights, params);
          break;
        case ControllerKind::Replay:
          actions[spec.id] = step < static_cast<int>(spec.script.size())
                                 ? spec.script[step]
                                 : DriverAction::Maintain;
          break;
        case ControllerKind::ConstantSpeed:
          actions[spec.id] = DriverAction::Maintain;
          break;
      }
    }

    for (const TrafficVehicle& v : snapshot.vehicles) {
      TraceRow row;
      row.step = step;
      row.time = step * dt;
      row.vehicle_id = v.id;
      row.state = v.state;
      row.action = actions.at(v.id);
      if (v.id == ego_id) row.q_values = ego_q;
      outcome.trace.push_back(row);
    }

    std::vector<TrafficVehicle> next = snapshot.vehicles;
    for (TrafficVehicle& v : next) {
      const Eigen::Vector3d disturbance =
          scenario.disturbances
              ? draw_disturbance(scenario.kinematics.disturbance_cov, rng)
              : Eigen::Vector3d::Zero();
      v.state = mergesim::step(v.state, actions.at(v.id), scenario.kinematics,
                               scenario.road, disturbance);
    }
    previous = std::move(snapshot);
    snapshot = make_snapshot(std::move(next), scenario.road, scenario.adjacency_radius,
                             step + 1);
  }
}

// --- Output writers ----------------------------------------------------------

std::string format_double(double value) {
  std::array<char, 32> buffer;
  const auto [ptr, ec] =
      std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), ptr);
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  return out;
}

}  // namespace

void write_trace_csv(const SimOutcome& outcome, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "time,vehicle_id,x,y,v_x,action,q_maintain,q_accelerate,q_decelerate,"
         "q_steer_left,q_steer_right\n";
  for (const TraceRow& row : outcome.trace) {
    out << format_double(row.time) << ',' << row.vehicle_id << ','
        << format_double(row.state.x) << ',' << format_double(row.state.y) << ','
        << format_double(row.state.v_x) << ',';
    if (row.action) out << action_name(*row.action);
    for (int u = 0; u < kActionCount; ++u) {
      out << ',';
      if (row.q_values) out << format_double((*row.q_values)[u]);
    }
    out << '\n';
  }
}

void write_beliefs_csv(const SimOutcome& outcome, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "time,vehicle_id";
  for (const IntentCell& cell : intent_grid()) out << ',' << cell.label;
  out << '\n';
  for (const BeliefRow& row : outcome.belief_trace) {
    out << format_double(row.time) << ',' << row.vehicle_id;
    for (double p : row.probabilities) out << ',' << format_double(p);
    out << '\n';
  }
}

void write_outcome_summary(const SimOutcome& outcome, const std::filesystem::path& path,
                           const std::string& format) {
  std::ofstream out = open_output(path);
  if (format == "json") {
    out << "{\n"
        << "  \"verdict\": \"" << verdict_name(outcome.verdict) << "\",\n"
        << "  \"merge_time\": " << format_double(outcome.merge_time) << ",\n"
        << "  \"steps\": " << outcome.steps << ",\n"
        << "  \"ego_id\": " << outcome.ego_id << "\n"
        << "}\n";
  } else if (format == "csv") {
    out << "verdict,merge_time,steps,ego_id\n";
    out << verdict_name(outcome.verdict) << ',' << format_double(outcome.merge_time)
        << ',' << outcome.steps << ',' << outcome.ego_id << '\n';
  } else {
    throw std::invalid_argument("unknown summary format: " + format);
  }
}

}  // namespace mergesim
