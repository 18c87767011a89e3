#pragma once

#include <map>
#include <random>
#include <vector>

#include "mergesim/rewards.hpp"
#include "mergesim/traffic.hpp"
#include "mergesim/world.hpp"

namespace mergesim {

// An action sequence over the decision horizon. Sequences are enumerated in a
// fixed lexicographic order with the first action as the most significant
// base-5 digit, so all sequences sharing a first action form one contiguous
// block of size 5^(N-1).
using ActionSequence = std::vector<DriverAction>;

struct BehaviorConfig {
  int horizon = 3;           // N
  double discount = 0.9;     // lambda in [0,1]
  double temperature = 1.0;  // softmax temperature, > 0

  void validate() const;
};

// Parameter bundle shared by the behavior model, the intent filter, and the
// planner.
struct ModelParams {
  RoadGeometry road;
  KinematicsConfig kinematics;
  RewardConfig rewards;
  BehaviorConfig behavior;

  void validate() const;
};

int sequence_count(int horizon);  // 5^N
int sequence_index(const ActionSequence& gamma);
ActionSequence sequence_from_index(int index, int horizon);

// Cumulative discounted reward of one action sequence, averaged over all
// neighbor action sequences (uniform and independent per neighbor), computed
// through the pairwise decomposition of the multi-modal reward.
// Throws when the vehicle has no adjacent vehicles.
double cumulative_reward(const TrafficSnapshot& snapshot, int vehicle_id,
                         const ActionSequence& gamma, const SocialOrientation& sigma,
                         const ObjectiveWeights& w, const ModelParams& params);

// Q(s, u): mean cumulative reward over the 5^(N-1) sequences starting with u.
std::map<DriverAction, double> action_values(const TrafficSnapshot& snapshot,
                                             int vehicle_id,
                                             const SocialOrientation& sigma,
                                             const ObjectiveWeights& w,
                                             const ModelParams& params);

// Receding-horizon choice: argmax of Q(s, u) over feasible actions, ties
// resolved by the fixed action order.
DriverAction best_action(const TrafficSnapshot& snapshot, int vehicle_id,
                         const SocialOrientation& sigma, const ObjectiveWeights& w,
                         const ModelParams& params);

// Softmax distribution over feasible first actions:
// P(u) proportional to exp(Q(s,u)/temperature).
std::map<DriverAction, double> policy(const TrafficSnapshot& snapshot, int vehicle_id,
                                      const SocialOrientation& sigma,
                                      const ObjectiveWeights& w,
                                      const ModelParams& params);

// Softmax distribution over whole sequences, indexed by sequence_index.
// Sequences whose first action is infeasible get probability zero.
std::vector<double> sequence_policy(const TrafficSnapshot& snapshot, int vehicle_id,
                                    const SocialOrientation& sigma,
                                    const ObjectiveWeights& w,
                                    const ModelParams& params);

// Behavior-model action for a scripted vehicle. Falls back to a personal-only
// reward (no pairwise terms, headway saturated) when the vehicle has no
// adjacent vehicles, so isolated vehicles still drive sensibly.
DriverAction behavior_action(const TrafficSnapshot& snapshot, int vehicle_id,
                             const SocialOrientation& sigma, const ObjectiveWeights& w,
                             const ModelParams& params);

// Sampled variant of behavior_action using the softmax policy.
DriverAction behavior_action_sampled(const TrafficSnapshot& snapshot, int vehicle_id,
                                     const SocialOrientation& sigma,
                                     const ObjectiveWeights& w,
                                     const ModelParams& params, std::mt19937_64& rng);

}  // namespace mergesim
