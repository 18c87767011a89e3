#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "mergesim/simulation.hpp"

namespace mergesim {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) {
    rows.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
  }
  return rows;
}

Eigen::Matrix3d matrix_from_json(const json& j) {
  Eigen::Matrix3d m;
  if (j.is_array() && j.size() == 3 && j[0].is_number()) {
    // A 3-vector is read as a diagonal covariance.
    m = Eigen::Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>())
            .asDiagonal();
    return m;
  }
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("disturbance_cov must be a 3-vector or 3x3 matrix");
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

ObjectiveWeights weights_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("weights must be a 3-vector [headway, progress, effort]");
  ObjectiveWeights w{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  w.validate();
  return w;
}

}  // namespace

ScenarioConfig scenario_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario JSON parse error: ") + e.what());
  }

  ScenarioConfig sc;
  if (!j.contains("road")) throw std::invalid_argument("scenario: missing road section");
  const json& road = j["road"];
  sc.road.lane_count = road.value("lane_count", 2);
  sc.road.lane_width = road.value("lane_width", 3.5);
  sc.road.ramp_start_x = road.value("ramp_start_x", 0.0);
  sc.road.ramp_end_x = road.value("ramp_end_x", 250.0);
  sc.road.goal_x = road.value("goal_x", 400.0);
  sc.road.target_lane_center_y =
      road.value("target_lane_center_y", 1.5 * sc.road.lane_width);

  sc.kinematics.dt = j.value("dt", 1.0);
  sc.seed = j.value("seed", std::uint64_t{0});
  sc.max_steps = j.value("max_steps", 30);
  sc.adjacency_radius = j.value("adjacency_radius", 100.0);
  sc.disturbances = j.value("disturbances", false);

  if (j.contains("kinematics")) {
    const json& kin = j["kinematics"];
    sc.kinematics.a_mag = kin.value("a_mag", sc.kinematics.a_mag);
    sc.kinematics.t_lane = kin.value("t_lane", sc.kinematics.t_lane);
    sc.kinematics.v_min = kin.value("v_min", sc.kinematics.v_min);
    sc.kinematics.v_max = kin.value("v_max", sc.kinematics.v_max);
    if (kin.contains("disturbance_cov"))
      sc.kinematics.disturbance_cov = matrix_from_json(kin["disturbance_cov"]);
  }
  if (j.contains("rewards")) {
    const json& rw = j["rewards"];
    sc.rewards.safety.t_min = rw.value("t_min", sc.rewards.safety.t_min);
    sc.rewards.safety.t_max = rw.value("t_max", sc.rewards.safety.t_max);
    sc.rewards.safety.margin_long = rw.value("margin_long", sc.rewards.safety.margin_long);
    sc.rewards.safety.margin_lat = rw.value("margin_lat", sc.rewards.safety.margin_lat);
    sc.rewards.e_speed = rw.value("e_speed", sc.rewards.e_speed);
    sc.rewards.e_lane = rw.value("e_lane", sc.rewards.e_lane);
    sc.rewards.mix_on_ramp = rw.value("mix_on_ramp", sc.rewards.mix_on_ramp);
    sc.rewards.mix_highway = rw.value("mix_highway", sc.rewards.mix_highway);
  }
  if (j.contains("behavior")) {
    const json& bh = j["behavior"];
    sc.behavior.horizon = bh.value("horizon", sc.behavior.horizon);
    sc.behavior.discount = bh.value("discount", sc.behavior.discount);
    sc.behavior.temperature = bh.value("temperature", sc.behavior.temperature);
  }
  if (j.contains("planner")) {
    const json& pl = j["planner"];
    sc.planner.horizon = pl.value("horizon", sc.planner.horizon);
    sc.planner.discount = pl.value("discount", sc.planner.discount);
    sc.planner.include_neighbor_progress =
        pl.value("include_neighbor_progress", sc.planner.include_neighbor_progress);
  }

  if (!j.contains("vehicles") || !j["vehicles"].is_array() || j["vehicles"].empty())
    throw std::invalid_argument("scenario: missing vehicles array");
  for (const json& vj : j["vehicles"]) {
    VehicleSpec spec;
    if (!vj.contains("id")) throw std::invalid_argument("vehicle: missing id");
    spec.id = vj["id"].get<int>();
    spec.initial.x = vj.value("x", 0.0);
    spec.initial.y = vj.value("y", 0.0);
    spec.initial.v_x = vj.value("v_x", 0.0);
    spec.merging = vj.value("merging", false);
    spec.controller = controller_from_name(vj.value("controller", "constant-speed"));
    if (spec.controller == ControllerKind::Behavior) {
      spec.sigma.category = svo_from_name(vj.value("svo", "egoistic"));
      if (!vj.contains("weights"))
        throw std::invalid_argument("behavior vehicle: missing weights");
      spec.weights = weights_from_json(vj["weights"]);
      const std::string mode = vj.value("mode", "argmax");
      if (mode != "argmax" && mode != "sample")
        throw std::invalid_argument("behavior vehicle: mode must be argmax or sample");
      spec.sample = mode == "sample";
    }
    if (spec.controller == ControllerKind::Replay) {
      if (!vj.contains("script"))
        throw std::invalid_argument("replay vehicle: missing script");
      for (const json& aj : vj["script"])
        spec.script.push_back(action_from_name(aj.get<std::string>()));
    }
    sc.vehicles.push_back(std::move(spec));
  }

  sc.validate();
  return sc;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return scenario_from_json_text(text);
}

std::string scenario_to_json_text(const ScenarioConfig& sc) {
  json j;
  j["road"] = {{"lane_count", sc.road.lane_count},
               {"lane_width", sc.road.lane_width},
               {"ramp_start_x", sc.road.ramp_start_x},
               {"ramp_end_x", sc.road.ramp_end_x},
               {"goal_x", sc.road.goal_x},
               {"target_lane_center_y", sc.road.target_lane_center_y}};
  j["dt"] = sc.kinematics.dt;
  j["seed"] = sc.seed;
  j["max_steps"] = sc.max_steps;
  j["adjacency_radius"] = sc.adjacency_radius;
  j["disturbances"] = sc.disturbances;
  j["kinematics"] = {{"a_mag", sc.kinematics.a_mag},
                     {"t_lane", sc.kinematics.t_lane},
                     {"v_min", sc.kinematics.v_min},
                     {"v_max", sc.kinematics.v_max},
                     {"disturbance_cov", matrix_to_json(sc.kinematics.disturbance_cov)}};
  j["rewards"] = {{"t_min", sc.rewards.safety.t_min},
                  {"t_max", sc.rewards.safety.t_max},
                  {"margin_long", sc.rewards.safety.margin_long},
                  {"margin_lat", sc.rewards.safety.margin_lat},
                  {"e_speed", sc.rewards.e_speed},
                  {"e_lane", sc.rewards.e_lane},
                  {"mix_on_ramp", sc.rewards.mix_on_ramp},
                  {"mix_highway", sc.rewards.mix_highway}};
  j["behavior"] = {{"horizon", sc.behavior.horizon},
                   {"discount", sc.behavior.discount},
                   {"temperature", sc.behavior.temperature}};
  j["planner"] = {{"horizon", sc.planner.horizon},
                  {"discount", sc.planner.discount},
                  {"include_neighbor_progress", sc.planner.include_neighbor_progress}};
  j["vehicles"] = json::array();
  for (const VehicleSpec& spec : sc.vehicles) {
    json vj = {{"id", spec.id},           {"x", spec.initial.x},
               {"y", spec.initial.y},     {"v_x", spec.initial.v_x},
               {"merging", spec.merging}, {"controller", controller_name(spec.controller)}};
    if (spec.controller == ControllerKind::Behavior) {
      vj["svo"] = svo_name(spec.sigma.category);
      vj["weights"] = {spec.weights.headway, spec.weights.progress, spec.weights.effort};
      vj["mode"] = spec.sample ? "sample" : "argmax";
    }
    if (spec.controller == ControllerKind::Replay) {
      json script = json::array();
      for (DriverAction a : spec.script) script.push_back(action_name(a));
      vj["script"] = script;
    }
    j["vehicles"].push_back(std::move(vj));
  }
  return j.dump(2) + "\n";
}

void save_scenario(const ScenarioConfig& scenario, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  out << scenario_to_json_text(scenario);
}

}  // namespace mergesim
