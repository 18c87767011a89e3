#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace mergesim {

// Symbolic maneuvers. The fixed order below is also the deterministic
// tie-break order used by every argmax in the library.
enum class DriverAction : std::uint8_t {
  Maintain = 0,
  Accelerate = 1,
  Decelerate = 2,
  SteerLeft = 3,
  SteerRight = 4,
};

inline constexpr int kActionCount = 5;

inline constexpr std::array<DriverAction, kActionCount> kAllActions = {
    DriverAction::Maintain,    DriverAction::Accelerate,
    DriverAction::Decelerate,  DriverAction::SteerLeft,
    DriverAction::SteerRight,
};

const char* action_name(DriverAction a);
DriverAction action_from_name(const std::string& name);

// Longitudinal position/velocity and lateral position of one vehicle.
struct VehicleState {
  double x = 0.0;    // m, increases along travel direction
  double y = 0.0;    // m, increases leftward from the outer road boundary
  double v_x = 0.0;  // m/s
};

// Acceleration and lateral velocity induced by a symbolic action.
struct Control {
  double a = 0.0;    // m/s^2
  double v_y = 0.0;  // m/s
};

// Highway segment with a merge ramp along the outer (low-y) edge.
//
// Lateral layout: the ramp lane occupies y in [0, lane_width) and exists for
// x <= ramp_end_x; highway lane k (k = 1..lane_count) occupies
// y in [k*lane_width, (k+1)*lane_width). Lane band 0 is the ramp.
struct RoadGeometry {
  int lane_count = 2;                    // highway lanes, ramp excluded
  double lane_width = 3.5;               // m
  double ramp_start_x = 0.0;             // m
  double ramp_end_x = 250.0;             // m
  double goal_x = 400.0;                 // m, beyond ramp end
  double target_lane_center_y = 5.25;    // m, center of the lane next to the ramp

  static RoadGeometry make(int lane_count, double lane_width, double ramp_start_x,
                           double ramp_end_x, double goal_x);

  // Throws std::invalid_argument when any geometric invariant is violated.
  void validate() const;

  double ramp_center_y() const { return 0.5 * lane_width; }
  // Center of lane band k; band 0 is the ramp, bands 1..lane_count are highway lanes.
  double lane_center_y(int band) const { return (band + 0.5) * lane_width; }
  int band_count() const { return lane_count + 1; }
  double upper_boundary_y() const { return (lane_count + 1) * lane_width; }
  // The outer boundary rises to the first highway lane edge once the ramp ends.
  double lower_boundary_y(double x) const {
    return x <= ramp_end_x ? 0.0 : lane_width;
  }
};

// Lane bands a vehicle occupies: one band when close to a lane center, the two
// flanking bands while transitioning between lanes.
struct LaneSet {
  int low = 0;
  int high = 0;  // == low when on-center

  bool contains(int band) const { return band >= low && band <= high; }
  bool intersects(const LaneSet& other) const {
    return low <= other.high && other.low <= high;
  }
  bool single() const { return low == high; }
};

// Fraction of the lane width within which a vehicle counts as on-center.
inline constexpr double kLaneCenterTolerance = 0.25;

// Index of the lane band whose center is nearest to y (ties toward the lower band).
int nearest_band(double y, const RoadGeometry& road);
LaneSet occupied_bands(double y, const RoadGeometry& road);

struct KinematicsConfig {
  double dt = 1.0;       // s
  double a_mag = 6.0;    // m/s^2
  double t_lane = 4.0;   // s for a complete lane change
  double v_min = 0.0;    // m/s
  double v_max = 40.0;   // m/s
  // Disturbance covariance; component order [x, v_x, y].
  Eigen::Matrix3d disturbance_cov =
      Eigen::Vector3d(0.25, 0.25, 0.04).asDiagonal();

  void validate() const;

  double lateral_speed() const;  // w_lane/t_lane requires the road's lane width
};

Control control_for(DriverAction action, const KinematicsConfig& cfg,
                    const RoadGeometry& road);

// One-step closed-form update without speed clamping or lane snapping.
// Disturbance components are ordered [x, v_x, y].
VehicleState kinematics_update(const VehicleState& state, DriverAction action,
                               const KinematicsConfig& cfg, const RoadGeometry& road,
                               const Eigen::Vector3d& disturbance);

// Full transition: closed-form update, then v_x clamped to [v_min, v_max] and,
// after a steer step, y snapped to the nearest lane center when within one
// step's lateral travel of it.
VehicleState step(const VehicleState& state, DriverAction action,
                  const KinematicsConfig& cfg, const RoadGeometry& road,
                  const Eigen::Vector3d& disturbance = Eigen::Vector3d::Zero());

// Disturbance-free repeated application of step(); element k is the state
// after actions[0..k].
std::vector<VehicleState> rollout(const VehicleState& state,
                                  const std::vector<DriverAction>& actions,
                                  const KinematicsConfig& cfg,
                                  const RoadGeometry& road);

// Actions whose target lane center lies inside the road at the vehicle's
// position. Maintain/Accelerate/Decelerate are always feasible.
std::vector<DriverAction> feasible_actions(const VehicleState& state,
                                           const RoadGeometry& road);

bool action_is_feasible(const VehicleState& state, DriverAction action,
                        const RoadGeometry& road);

}  // namespace mergesim
