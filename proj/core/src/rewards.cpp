#include "mergesim/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mergesim {

const char* svo_name(SvoCategory c) {
  switch (c) {
    case SvoCategory::Altruistic: return "altruistic";
    case SvoCategory::Prosocial: return "prosocial";
    case SvoCategory::Egoistic: return "egoistic";
    case SvoCategory::Competitive: return "competitive";
  }
  throw std::logic_error("unknown svo category");
}

SvoCategory svo_from_name(const std::string& name) {
  for (SvoCategory c : {SvoCategory::Altruistic, SvoCategory::Prosocial,
                        SvoCategory::Egoistic, SvoCategory::Competitive}) {
    if (name == svo_name(c)) return c;
  }
  throw std::invalid_argument("unknown svo category: " + name);
}

double SocialOrientation::theta_self() const {
  switch (category) {
    case SvoCategory::Altruistic: return 0.0;
    case SvoCategory::Prosocial: return 0.5;
    case SvoCategory::Egoistic: return 1.0;
    case SvoCategory::Competitive: return 0.5;
  }
  throw std::logic_error("unknown svo category");
}

double SocialOrientation::theta_other() const {
  switch (category) {
    case SvoCategory::Altruistic: return 1.0;
    case SvoCategory::Prosocial: return 0.5;
    case SvoCategory::Egoistic: return 0.0;
    case SvoCategory::Competitive: return -0.5;
  }
  throw std::logic_error("unknown svo category");
}

void ObjectiveWeights::validate() const {
  if (headway < 0.0 || progress < 0.0 || effort < 0.0)
    throw std::invalid_argument("objective weights must be nonnegative");
  if (std::abs(headway + progress + effort - 1.0) > 1e-9)
    throw std::invalid_argument("objective weights must sum to 1");
}

void SafetyConfig::validate() const {
  if (!(0.0 < t_min && t_min < t_max))
    throw std::invalid_argument("safety: need 0 < t_min < t_max");
  if (!(margin_long > 0.0 && margin_lat > 0.0))
    throw std::invalid_argument("safety: margins must be > 0");
}

void RewardConfig::validate() const {
  safety.validate();
  if (!(e_speed > 0.0 && e_speed < 1.0) || !(e_lane > 0.0 && e_lane < 1.0))
    throw std::invalid_argument("rewards: effort levels must lie in (0,1)");
  if (mix_on_ramp < 0.0 || mix_on_ramp > 1.0 || mix_highway < 0.0 || mix_highway > 1.0)
    throw std::invalid_argument("rewards: progress mix must lie in [0,1]");
}

namespace {

bool lateral_conflict(double ya, double yb, const RoadGeometry& road,
                      const SafetyConfig& cfg) {
  if (std::abs(ya - yb) < 2.0 * cfg.margin_lat) return true;
  return occupied_bands(ya, road).intersects(occupied_bands(yb, road));
}

}  // namespace

bool boxes_overlap(const VehicleState& a, const VehicleState& b,
                   const RoadGeometry& road, const SafetyConfig& cfg) {
  if (std::abs(a.x - b.x) >= 2.0 * cfg.margin_long) return false;
  return lateral_conflict(a.y, b.y, road, cfg);
}

bool crosses_boundary(const VehicleState& v, const RoadGeometry& road,
                      const SafetyConfig& cfg) {
  if (v.y + cfg.margin_lat > road.upper_boundary_y()) return true;
  return v.y - cfg.margin_lat < road.lower_boundary_y(v.x);
}

bool swept_collision(const VehicleState& a_from, const VehicleState& a_to,
                     const VehicleState& b_from, const VehicleState& b_to,
                     const RoadGeometry& road, const SafetyConfig& cfg) {
  const double dx0 = b_from.x - a_from.x;
  const double dx1 = b_to.x - a_to.x;
  const double reach = 2.0 * cfg.margin_long;

  // Alpha window where the boxes overlap longitudinally; dx is linear in alpha.
  double lo = 0.0, hi = 1.0;
  const double slope = dx1 - dx0;
  if (std::abs(slope) < 1e-12) {
    if (std::abs(dx0) >= reach) return false;
  } else {
    double a = (-reach - dx0) / slope;
    double b = (reach - dx0) / slope;
    if (a > b) std::swap(a, b);
    lo = std::max(0.0, a);
    hi = std::min(1.0, b);
    if (lo >= hi) return false;
  }

  // Lateral speeds are at most one lane per step, so a coarse sweep of the
  // longitudinal overlap window is enough to catch every band transition.
  constexpr int kSamples = 9;
  for (int i = 0; i <= kSamples; ++i) {
    const double alpha = lo + (hi - lo) * i / kSamples;
    const double ya = a_from.y + (a_to.y - a_from.y) * alpha;
    const double yb = b_from.y + (b_to.y - b_from.y) * alpha;
    if (lateral_conflict(ya, yb, road, cfg)) return true;
  }
  return false;
}

bool collision_flag(const TrafficSnapshot& snapshot, int vehicle_id,
                    const RoadGeometry& road, const SafetyConfig& cfg) {
  const TrafficVehicle& self = snapshot.vehicle(vehicle_id);
  if (crosses_boundary(self.state, road, cfg)) return true;
  for (const TrafficVehicle& other : snapshot.vehicles) {
    if (other.id == vehicle_id) continue;
    if (boxes_overlap(self.state, other.state, road, cfg)) return true;
  }
  return false;
}

namespace {

double headway_from_ttc(double ttc, const SafetyConfig& cfg) {
  const double sat = std::clamp(ttc, cfg.t_min, cfg.t_max);
  return (sat - cfg.t_min) / (cfg.t_max - cfg.t_min);
}

// TTC of `subject` against one candidate leader; +inf when the candidate is
// not ahead in the subject's lane or not closing.
double ttc_against(const VehicleState& subject, const VehicleState& leader,
                   const RoadGeometry& road, const SafetyConfig& cfg) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (leader.x <= subject.x) return kInf;
  const int band = nearest_band(subject.y, road);
  if (!occupied_bands(leader.y, road).contains(band)) return kInf;
  const double closing = subject.v_x - leader.v_x;
  if (closing <= 0.0) return kInf;
  const double gap = std::max(0.0, leader.x - subject.x - 2.0 * cfg.margin_long);
  return gap / closing;
}

}  // namespace

double headway(const TrafficSnapshot& snapshot, int vehicle_id,
               const RoadGeometry& road, const SafetyConfig& cfg) {
  const TrafficVehicle& self = snapshot.vehicle(vehicle_id);
  const int band = nearest_band(self.state.y, road);
  double best_dx = std::numeric_limits<double>::infinity();
  const TrafficVehicle* leader = nullptr;
  for (const TrafficVehicle& other : snapshot.vehicles) {
    if (other.id == vehicle_id || other.state.x <= self.state.x) continue;
    if (!occupied_bands(other.state.y, road).contains(band)) continue;
    const double dx = other.state.x - self.state.x;
    if (dx < best_dx) {
      best_dx = dx;
      leader = &other;
    }
  }
  if (leader == nullptr) return 1.0;
  return headway_from_ttc(ttc_against(self.state, leader->state, road, cfg), cfg);
}

double pair_headway(const VehicleState& subject, const VehicleState& other,
                    const RoadGeometry& road, const SafetyConfig& cfg) {
  return headway_from_ttc(ttc_against(subject, other, road, cfg), cfg);
}

double progress(const VehicleState& state, const RoadGeometry& road, double mix) {
  if (mix < 0.0 || mix > 1.0) throw std::invalid_argument("progress mix must lie in [0,1]");
  const double tau_x = std::clamp(
      (state.x - road.ramp_start_x) / (road.goal_x - road.ramp_start_x), 0.0, 1.0);
  const double tau_y =
      1.0 - std::min(std::abs(state.y - road.target_lane_center_y), road.lane_width) /
                road.lane_width;
  return (1.0 - mix) * tau_x + mix * tau_y;
}

double effort(DriverAction action, const RewardConfig& cfg) {
  switch (action) {
    case DriverAction::Maintain: return 1.0;
    case DriverAction::Accelerate:
    case DriverAction::Decelerate: return cfg.e_speed;
    case DriverAction::SteerLeft:
    case DriverAction::SteerRight: return cfg.e_lane;
  }
  throw std::logic_error("unknown action");
}

double personal_reward(const RewardFeatures& f, const ObjectiveWeights& w) {
  if (f.collision) return 0.0;
  return w.headway * f.headway + w.progress * f.progress + w.effort * f.effort;
}

RewardFeatures pair_features(const Motion& subject, const Motion& other,
                             const RoadGeometry& road, const RewardConfig& cfg) {
  RewardFeatures f;
  f.collision = swept_collision(subject.from, subject.to, other.from, other.to, road,
                                cfg.safety) ||
                crosses_boundary(subject.to, road, cfg.safety);
  f.headway = pair_headway(subject.to, other.to, road, cfg.safety);
  f.progress = progress(subject.to, road, cfg.mix_for(subject.merging));
  f.effort = effort(subject.action, cfg);
  return f;
}

Eigen::Vector3d pair_gain(const Motion& subject, const Motion& other,
                          const RoadGeometry& road, const RewardConfig& cfg) {
  const RewardFeatures f = pair_features(subject, other, road, cfg);
  if (f.collision) return Eigen::Vector3d::Zero();
  return {f.headway, f.progress, f.effort};
}

namespace {

Motion motion_for(const TrafficVehicle& v, DriverAction action,
                  const RoadGeometry& road, const KinematicsConfig& kin) {
  return Motion{v.state, step(v.state, action, kin, road), action, v.merging};
}

DriverAction control_of(const std::map<int, DriverAction>& controls, int id) {
  auto it = controls.find(id);
  if (it == controls.end())
    throw std::invalid_argument("missing control for vehicle " + std::to_string(id));
  return it->second;
}

}  // namespace

double svo_reward(const TrafficSnapshot& snapshot,
                  const std::map<int, DriverAction>& controls, int vehicle_id,
                  const SocialOrientation& sigma, const ObjectiveWeights& w_self,
                  const RoadGeometry& road, const KinematicsConfig& kin,
                  const RewardConfig& cfg) {
  const std::vector<int>& neighbors = snapshot.neighbors(vehicle_id);
  if (neighbors.empty())
    throw std::invalid_argument("svo_reward: vehicle " + std::to_string(vehicle_id) +
                                " has no adjacent vehicles");
  const Motion self =
      motion_for(snapshot.vehicle(vehicle_id), control_of(controls, vehicle_id), road, kin);

  const double theta_self = sigma.theta_self();
  const double theta_other = sigma.theta_other();
  const Eigen::Vector3d w_i(w_self.headway, w_self.progress, w_self.effort);
  const Eigen::Vector3d w_j(kAssumedOtherWeights.headway, kAssumedOtherWeights.progress,
                            kAssumedOtherWeights.effort);

  double total = 0.0;
  for (int j : neighbors) {
    const Motion other = motion_for(snapshot.vehicle(j), control_of(controls, j), road, kin);
    total += theta_self * w_i.dot(pair_gain(self, other, road, cfg)) +
             theta_other * w_j.dot(pair_gain(other, self, road, cfg));
  }
  return total / static_cast<double>(neighbors.size());
}

}  // namespace mergesim
