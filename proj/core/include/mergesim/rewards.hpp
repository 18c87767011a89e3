#pragma once

#include <map>

#include "mergesim/traffic.hpp"
#include "mergesim/world.hpp"

namespace mergesim {

enum class SvoCategory : std::uint8_t {
  Altruistic = 0,
  Prosocial = 1,
  Egoistic = 2,
  Competitive = 3,
};

const char* svo_name(SvoCategory c);
SvoCategory svo_from_name(const std::string& name);

// Social value orientation with its (theta_self, theta_other) weight pair:
// altruistic (0, 1), prosocial (1/2, 1/2), egoistic (1, 0), competitive (1/2, -1/2).
struct SocialOrientation {
  SvoCategory category = SvoCategory::Egoistic;

  double theta_self() const;
  double theta_other() const;
};

// Weights over the personal objectives [headway, progress, effort]; a point on
// the probability simplex.
struct ObjectiveWeights {
  double headway = 1.0 / 3.0;
  double progress = 1.0 / 3.0;
  double effort = 1.0 / 3.0;

  void validate() const;  // nonnegative, sums to 1
};

// Assumed objective weights of other drivers during a vehicle's own decision.
inline constexpr ObjectiveWeights kAssumedOtherWeights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

struct RewardFeatures {
  bool collision = false;  // c
  double headway = 1.0;    // h in [0,1]
  double progress = 0.0;   // tau in [0,1]
  double effort = 1.0;     // e in [0,1]
};

struct SafetyConfig {
  double t_min = 0.2;        // s, minimum reaction time
  double t_max = 3.0;        // s, adequate time headway
  double margin_long = 2.0;  // m, half-length of the safety bounding box
  double margin_lat = 0.5;   // m, half-width of the safety bounding box

  void validate() const;
};

struct RewardConfig {
  SafetyConfig safety;
  double e_speed = 0.5;      // effort level of accelerate/decelerate
  double e_lane = 0.25;      // effort level of steer left/right
  double mix_on_ramp = 0.5;  // lateral/longitudinal progress mix for merging vehicles
  double mix_highway = 0.0;

  void validate() const;

  double mix_for(bool merging) const { return merging ? mix_on_ramp : mix_highway; }
};

// --- Geometry predicates -----------------------------------------------------

// Instantaneous safety-box overlap. Two boxes conflict when they are close
// longitudinally and either overlap laterally or share a lane band (a vehicle
// between lane centers occupies both flanking bands).
bool boxes_overlap(const VehicleState& a, const VehicleState& b,
                   const RoadGeometry& road, const SafetyConfig& cfg);

// Safety box extends past a road edge; past the ramp end the outer boundary
// rises to the first highway lane edge.
bool crosses_boundary(const VehicleState& v, const RoadGeometry& road,
                      const SafetyConfig& cfg);

// Box overlap anywhere along the straight-line motion of both vehicles over
// one step. Catches pass-throughs that the endpoint states alone would miss.
bool swept_collision(const VehicleState& a_from, const VehicleState& a_to,
                     const VehicleState& b_from, const VehicleState& b_to,
                     const RoadGeometry& road, const SafetyConfig& cfg);

// --- Reward variables --------------------------------------------------------

// True iff the vehicle's box overlaps any other vehicle's box or crosses a
// road boundary in the given snapshot. Throws on unknown id.
bool collision_flag(const TrafficSnapshot& snapshot, int vehicle_id,
                    const RoadGeometry& road, const SafetyConfig& cfg);

// Saturated time-to-collision against the nearest same-lane leader, normalized
// to [0,1]. No leader or non-closing leader saturates to 1.
double headway(const TrafficSnapshot& snapshot, int vehicle_id,
               const RoadGeometry& road, const SafetyConfig& cfg);

// Headway of `subject` considering only `other` as a potential leader.
double pair_headway(const VehicleState& subject, const VehicleState& other,
                    const RoadGeometry& road, const SafetyConfig& cfg);

// Progress toward the goal: mix between longitudinal fraction of the
// ramp-to-goal span and lateral closeness to the target lane center.
double progress(const VehicleState& state, const RoadGeometry& road, double mix);

double effort(DriverAction action, const RewardConfig& cfg);

// r = (1 - c) * (w_h*h + w_tau*tau + w_e*e), in [0,1].
double personal_reward(const RewardFeatures& features, const ObjectiveWeights& w);

// --- Pairwise evaluation -----------------------------------------------------

// One vehicle's motion over a single step.
struct Motion {
  VehicleState from;
  VehicleState to;
  DriverAction action = DriverAction::Maintain;
  bool merging = false;
};

// Reward variables of `subject` in the pairwise interaction with `other`,
// evaluated at the post-step states: c is the swept pairwise collision plus
// the subject's boundary violation, h considers only `other` as leader.
RewardFeatures pair_features(const Motion& subject, const Motion& other,
                             const RoadGeometry& road, const RewardConfig& cfg);

// (1-c) * [h, tau, e] of `subject` against `other`; personal reward is the dot
// product of this vector with the objective weights.
Eigen::Vector3d pair_gain(const Motion& subject, const Motion& other,
                          const RoadGeometry& road, const RewardConfig& cfg);

// SVO-weighted multi-modal reward of one vehicle for a joint action:
// mean over adjacent vehicles j of
//   theta_self * r_i(i, j | w_self) + theta_other * r_j(j, i | assumed weights).
// `controls` must contain an action for the vehicle and each of its neighbors.
// Throws when the vehicle has no adjacent vehicles.
double svo_reward(const TrafficSnapshot& snapshot,
                  const std::map<int, DriverAction>& controls, int vehicle_id,
                  const SocialOrientation& sigma, const ObjectiveWeights& w_self,
                  const RoadGeometry& road, const KinematicsConfig& kin,
                  const RewardConfig& cfg);

}  // namespace mergesim
