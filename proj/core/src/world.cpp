#include "mergesim/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mergesim {

const char* action_name(DriverAction a) {
  switch (a) {
    case DriverAction::Maintain: return "maintain";
    case DriverAction::Accelerate: return "accelerate";
    case DriverAction::Decelerate: return "decelerate";
    case DriverAction::SteerLeft: return "steer_left";
    case DriverAction::SteerRight: return "steer_right";
  }
  throw std::logic_error("unknown action");
}

DriverAction action_from_name(const std::string& name) {
  for (DriverAction a : kAllActions) {
    if (name == action_name(a)) return a;
  }
  throw std::invalid_argument("unknown action name: " + name);
}

RoadGeometry RoadGeometry::make(int lane_count, double lane_width, double ramp_start_x,
                                double ramp_end_x, double goal_x) {
  RoadGeometry road;
  road.lane_count = lane_count;
  road.lane_width = lane_width;
  road.ramp_start_x = ramp_start_x;
  road.ramp_end_x = ramp_end_x;
  road.goal_x = goal_x;
  road.target_lane_center_y = 1.5 * lane_width;
  road.validate();
  return road;
}

void RoadGeometry::validate() const {
  if (lane_count < 1) throw std::invalid_argument("road: lane_count must be >= 1");
  if (!(lane_width > 0.0)) throw std::invalid_argument("road: lane_width must be > 0");
  if (!(ramp_start_x < ramp_end_x))
    throw std::invalid_argument("road: ramp_start_x must be < ramp_end_x");
  if (!(ramp_end_x <= goal_x))
    throw std::invalid_argument("road: ramp_end_x must be <= goal_x");
  if (std::abs(target_lane_center_y - 1.5 * lane_width) > 1e-9 * lane_width)
    throw std::invalid_argument(
        "road: target_lane_center_y must be the center of the lane next to the ramp");
}

int nearest_band(double y, const RoadGeometry& road) {
  const double w = road.lane_width;
  // Band whose center (band + 0.5) * w is closest; round half down so ties
  // resolve to the lower band deterministically.
  int band = static_cast<int>(std::ceil(y / w - 1.0));
  if (std::abs(y - road.lane_center_y(band + 1)) < std::abs(y - road.lane_center_y(band))) {
    ++band;
  }
  return std::clamp(band, 0, road.lane_count);
}

LaneSet occupied_bands(double y, const RoadGeometry& road) {
  const int near = nearest_band(y, road);
  if (std::abs(y - road.lane_center_y(near)) < kLaneCenterTolerance * road.lane_width) {
    return LaneSet{near, near};
  }
  int low = static_cast<int>(std::floor(y / road.lane_width - 0.5));
  int high = low + 1;
  low = std::clamp(low, 0, road.lane_count);
  high = std::clamp(high, 0, road.lane_count);
  return LaneSet{low, high};
}

void KinematicsConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("kinematics: dt must be > 0");
  if (!(a_mag > 0.0)) throw std::invalid_argument("kinematics: a_mag must be > 0");
  if (!(t_lane > 0.0)) throw std::invalid_argument("kinematics: t_lane must be > 0");
  if (!(v_min >= 0.0 && v_min < v_max))
    throw std::invalid_argument("kinematics: need 0 <= v_min < v_max");
  if (!disturbance_cov.isApprox(disturbance_cov.transpose(), 1e-12))
    throw std::invalid_argument("kinematics: disturbance_cov must be symmetric");
  Eigen::LLT<Eigen::Matrix3d> llt(disturbance_cov);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("kinematics: disturbance_cov must be positive-definite");
}

Control control_for(DriverAction action, const KinematicsConfig& cfg,
                    const RoadGeometry& road) {
  const double v_lat = road.lane_width / cfg.t_lane;
  switch (action) {
    case DriverAction::Maintain: return {0.0, 0.0};
    case DriverAction::Accelerate: return {cfg.a_mag, 0.0};
    case DriverAction::Decelerate: return {-cfg.a_mag, 0.0};
    case DriverAction::SteerLeft: return {0.0, v_lat};
    case DriverAction::SteerRight: return {0.0, -v_lat};
  }
  throw std::logic_error("unknown action");
}

VehicleState kinematics_update(const VehicleState& state, DriverAction action,
                               const KinematicsConfig& cfg, const RoadGeometry& road,
                               const Eigen::Vector3d& disturbance) {
  const Control u = control_for(action, cfg, road);
  VehicleState next;
  next.x = state.x + state.v_x * cfg.dt + disturbance(0);
  next.v_x = state.v_x + u.a * cfg.dt + disturbance(1);
  next.y = state.y + u.v_y * cfg.dt + disturbance(2);
  return next;
}

VehicleState step(const VehicleState& state, DriverAction action,
                  const KinematicsConfig& cfg, const RoadGeometry& road,
                  const Eigen::Vector3d& disturbance) {
  VehicleState next = kinematics_update(state, action, cfg, road, disturbance);
  next.v_x = std::clamp(next.v_x, cfg.v_min, cfg.v_max);
  if (action == DriverAction::SteerLeft || action == DriverAction::SteerRight) {
    const double center = road.lane_center_y(nearest_band(next.y, road));
    const double step_travel = (road.lane_width / cfg.t_lane) * cfg.dt;
    if (std::abs(next.y - center) < step_travel) next.y = center;
  }
  return next;
}

std::vector<VehicleState> rollout(const VehicleState& state,
                                  const std::vector<DriverAction>& actions,
                                  const KinematicsConfig& cfg,
                                  const RoadGeometry& road) {
  std::vector<VehicleState> states;
  states.reserve(actions.size());
  VehicleState current = state;
  for (DriverAction a : actions) {
    current = step(current, a, cfg, road);
    states.push_back(current);
  }
  return states;
}

namespace {

// Target lane center index of a steer maneuver: the adjacent center in the
// steering direction, or the far center of the current transition.
int steer_target_band(double y, DriverAction action, const RoadGeometry& road) {
  const double w = road.lane_width;
  const double eps = 1e-9 * w;
  if (action == DriverAction::SteerLeft) {
    return static_cast<int>(std::floor((y + eps) / w - 0.5)) + 1;
  }
  return static_cast<int>(std::ceil((y - eps) / w - 0.5)) - 1;
}

}  // namespace

bool action_is_feasible(const VehicleState& state, DriverAction action,
                        const RoadGeometry& road) {
  if (action != DriverAction::SteerLeft && action != DriverAction::SteerRight) {
    return true;
  }
  const int target = steer_target_band(state.y, action, road);
  if (target < 0 || target > road.lane_count) return false;
  // The ramp is not a valid target once it has ended.
  if (target == 0 && state.x > road.ramp_end_x) return false;
  return true;
}

std::vector<DriverAction> feasible_actions(const VehicleState& state,
                                           const RoadGeometry& road) {
  std::vector<DriverAction> actions;
  actions.reserve(kActionCount);
  for (DriverAction a : kAllActions) {
    if (action_is_feasible(state, a, road)) actions.push_back(a);
  }
  return actions;
}

}  // namespace mergesim
