#include "mergesim/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "prediction.hpp"

namespace mergesim {

void BehaviorConfig::validate() const {
  if (horizon < 1 || horizon > 4)
    throw std::invalid_argument("behavior: horizon must lie in [1, 4]");
  if (discount < 0.0 || discount > 1.0)
    throw std::invalid_argument("behavior: discount must lie in [0, 1]");
  if (!(temperature > 0.0))
    throw std::invalid_argument("behavior: temperature must be > 0");
}

void ModelParams::validate() const {
  road.validate();
  kinematics.validate();
  rewards.validate();
  behavior.validate();
}

int sequence_count(int horizon) { return detail::pow5(horizon); }

int sequence_index(const ActionSequence& gamma) {
  int index = 0;
  for (DriverAction a : gamma) index = index * kActionCount + static_cast<int>(a);
  return index;
}

ActionSequence sequence_from_index(int index, int horizon) {
  ActionSequence gamma(horizon);
  for (int k = horizon - 1; k >= 0; --k) {
    gamma[k] = static_cast<DriverAction>(index % kActionCount);
    index /= kActionCount;
  }
  return gamma;
}

namespace {

void require_neighbors(const TrafficSnapshot& snapshot, int vehicle_id) {
  if (snapshot.neighbors(vehicle_id).empty())
    throw std::invalid_argument("vehicle " + std::to_string(vehicle_id) +
                                " has no adjacent vehicles");
}

DriverAction argmax_feasible(const std::array<double, kActionCount>& q,
                             const std::array<bool, kActionCount>& mask) {
  int best = -1;
  for (int u = 0; u < kActionCount; ++u) {
    if (!mask[u]) continue;
    if (best < 0 || q[u] > q[best]) best = u;
  }
  return static_cast<DriverAction>(best);
}

}  // namespace

double cumulative_reward(const TrafficSnapshot& snapshot, int vehicle_id,
                         const ActionSequence& gamma, const SocialOrientation& sigma,
                         const ObjectiveWeights& w, const ModelParams& params) {
  require_neighbors(snapshot, vehicle_id);
  if (static_cast<int>(gamma.size()) != params.behavior.horizon)
    throw std::invalid_argument("action sequence length must equal the horizon");
  detail::Engine engine(snapshot, params, params.behavior.horizon,
                        params.behavior.discount);
  return engine.sequence_values(vehicle_id, sigma, w)[sequence_index(gamma)];
}

std::map<DriverAction, double> action_values(const TrafficSnapshot& snapshot,
                                             int vehicle_id,
                                             const SocialOrientation& sigma,
                                             const ObjectiveWeights& w,
                                             const ModelParams& params) {
  require_neighbors(snapshot, vehicle_id);
  detail::Engine engine(snapshot, params, params.behavior.horizon,
                        params.behavior.discount);
  const std::array<double, kActionCount> q = engine.action_values(vehicle_id, sigma, w);
  std::map<DriverAction, double> result;
  for (int u = 0; u < kActionCount; ++u) result[static_cast<DriverAction>(u)] = q[u];
  return result;
}

DriverAction best_action(const TrafficSnapshot& snapshot, int vehicle_id,
                         const SocialOrientation& sigma, const ObjectiveWeights& w,
                         const ModelParams& params) {
  require_neighbors(snapshot, vehicle_id);
  detail::Engine engine(snapshot, params, params.behavior.horizon,
                        params.behavior.discount);
  return argmax_feasible(engine.action_values(vehicle_id, sigma, w),
                         engine.feasible_mask(vehicle_id));
}

std::map<DriverAction, double> policy(const TrafficSnapshot& snapshot, int vehicle_id,
                                      const SocialOrientation& sigma,
                                      const ObjectiveWeights& w,
                                      const ModelParams& params) {
  require_neighbors(snapshot, vehicle_id);
  detail::Engine engine(snapshot, params, params.behavior.horizon,
                        params.behavior.discount);
  const std::array<double, kActionCount> probs =
      engine.first_action_policy(vehicle_id, sigma, w, params.behavior.temperature);
  std::map<DriverAction, double> result;
  for (int u = 0; u < kActionCount; ++u) result[static_cast<DriverAction>(u)] = probs[u];
  return result;
}

std::vector<double> sequence_policy(const TrafficSnapshot& snapshot, int vehicle_id,
                                    const SocialOrientation& sigma,
                                    const ObjectiveWeights& w,
                                    const ModelParams& params) {
  require_neighbors(snapshot, vehicle_id);
  detail::Engine engine(snapshot, params, params.behavior.horizon,
                        params.behavior.discount);
  return engine.sequence_distribution(vehicle_id, sigma, w, params.behavior.temperature);
}

DriverAction behavior_action(const TrafficSnapshot& snapshot, int vehicle_id,
                             const SocialOrientation& sigma, const ObjectiveWeights& w,
                             const ModelParams& params) {
  detail::Engine engine(snapshot, params, params.behavior.horizon,
                        params.behavior.discount);
  return argmax_feasible(engine.action_values(vehicle_id, sigma, w),
                         engine.feasible_mask(vehicle_id));
}

DriverAction behavior_action_sampled(const TrafficSnapshot& snapshot, int vehicle_id,
                                     const SocialOrientation& sigma,
                                     const ObjectiveWeights& w,
                                     const ModelParams& params, std::mt19937_64& rng) {
  detail::Engine engine(snapshot, params, params.behavior.horizon,
                        params.behavior.discount);
  const std::array<double, kActionCount> probs =
      engine.first_action_policy(vehicle_id, sigma, w, params.behavior.temperature);
  const double draw = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  int last_positive = 0;
  for (int u = 0; u < kActionCount; ++u) {
    if (probs[u] <= 0.0) continue;
    last_positive = u;
    cumulative += probs[u];
    if (draw < cumulative) return static_cast<DriverAction>(u);
  }
  return static_cast<DriverAction>(last_positive);
}

}  // namespace mergesim
