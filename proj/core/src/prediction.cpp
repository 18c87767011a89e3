#include "prediction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mergesim::detail {

VehicleTable build_vehicle_table(const TrafficVehicle& vehicle, int horizon,
                                 const ModelParams& params) {
  VehicleTable t;
  t.prev.resize(horizon);
  t.next.resize(horizon);
  t.boundary.resize(horizon);
  t.tau.resize(horizon);
  t.effort_level.resize(horizon);
  const double mix = params.rewards.mix_for(vehicle.merging);
  for (int k = 0; k < horizon; ++k) {
    const int n = pow5(k + 1);
    t.prev[k].resize(n);
    t.next[k].resize(n);
    t.boundary[k].resize(n);
    t.tau[k].resize(n);
    t.effort_level[k].resize(n);
    for (int p = 0; p < n; ++p) {
      const DriverAction action = static_cast<DriverAction>(p % kActionCount);
      const VehicleState& from = (k == 0) ? vehicle.state : t.next[k - 1][p / kActionCount];
      const VehicleState to = step(from, action, params.kinematics, params.road);
      t.prev[k][p] = from;
      t.next[k][p] = to;
      t.boundary[k][p] = crosses_boundary(to, params.road, params.rewards.safety) ? 1 : 0;
      t.tau[k][p] = progress(to, params.road, mix);
      t.effort_level[k][p] = effort(action, params.rewards);
    }
  }
  return t;
}

PairTable build_pair_table(const VehicleTable& a, const VehicleTable& b, int horizon,
                           const ModelParams& params) {
  PairTable table;
  table.levels.resize(horizon);
  const RoadGeometry& road = params.road;
  const SafetyConfig& safety = params.rewards.safety;
  for (int k = 0; k < horizon; ++k) {
    const int n = pow5(k + 1);
    table.levels[k].resize(static_cast<std::size_t>(n) * n);
    for (int pa = 0; pa < n; ++pa) {
      const VehicleState& a_from = a.prev[k][pa];
      const VehicleState& a_to = a.next[k][pa];
      for (int pb = 0; pb < n; ++pb) {
        const VehicleState& b_from = b.prev[k][pb];
        const VehicleState& b_to = b.next[k][pb];
        PairTable::Entry& e = table.levels[k][static_cast<std::size_t>(pa) * n + pb];
        const bool collided = swept_collision(a_from, a_to, b_from, b_to, road, safety);
        if (collided || a.boundary[k][pa]) {
          e.gain_a = {0.0, 0.0, 0.0};
        } else {
          e.gain_a = {pair_headway(a_to, b_to, road, safety), a.tau[k][pa],
                      a.effort_level[k][pa]};
        }
        if (collided || b.boundary[k][pb]) {
          e.gain_b = {0.0, 0.0, 0.0};
        } else {
          e.gain_b = {pair_headway(b_to, a_to, road, safety), b.tau[k][pb],
                      b.effort_level[k][pb]};
        }
      }
    }
  }
  return table;
}

Engine::Engine(const TrafficSnapshot& snapshot, const ModelParams& params, int horizon,
               double discount)
    : snapshot_(snapshot),
      params_(params),
      horizon_(horizon),
      n_sequences_(pow5(horizon)),
      discount_(discount) {
  if (horizon < 1 || horizon > 4)
    throw std::invalid_argument("prediction horizon must lie in [1, 4]");
}

const VehicleTable& Engine::vehicle_table(int id) {
  auto it = vehicle_tables_.find(id);
  if (it == vehicle_tables_.end()) {
    it = vehicle_tables_
             .emplace(id, build_vehicle_table(snapshot_.vehicle(id), horizon_, params_))
             .first;
  }
  return it->second;
}

const PairTable& Engine::pair_table(int id_a, int id_b) {
  const std::pair<int, int> key{std::min(id_a, id_b), std::max(id_a, id_b)};
  auto it = pair_tables_.find(key);
  if (it == pair_tables_.end()) {
    it = pair_tables_
             .emplace(key, build_pair_table(vehicle_table(key.first),
                                            vehicle_table(key.second), horizon_, params_))
             .first;
  }
  return it->second;
}

const BehaviorTables& Engine::behavior_tables(int id) {
  auto it = behavior_tables_.find(id);
  if (it != behavior_tables_.end()) return it->second;

  BehaviorTables tables;
  const std::vector<int>& neighbors = snapshot_.neighbors(id);
  tables.solo = neighbors.empty();
  tables.self_gain.resize(horizon_);
  tables.other_reward.resize(horizon_);
  const VehicleTable& self = vehicle_table(id);

  for (int k = 0; k < horizon_; ++k) {
    const int n = pow5(k + 1);
    tables.self_gain[k].assign(n, {0.0, 0.0, 0.0});
    tables.other_reward[k].assign(n, 0.0);
  }

  if (tables.solo) {
    // Personal-only fallback: no pairwise collision and a saturated headway.
    for (int k = 0; k < horizon_; ++k) {
      const int n = pow5(k + 1);
      for (int p = 0; p < n; ++p) {
        if (!self.boundary[k][p]) {
          tables.self_gain[k][p] = {1.0, self.tau[k][p], self.effort_level[k][p]};
        }
      }
    }
    return behavior_tables_.emplace(id, std::move(tables)).first->second;
  }

  const Eigen::Vector3d w_other(kAssumedOtherWeights.headway, kAssumedOtherWeights.progress,
                                kAssumedOtherWeights.effort);
  const double neighbor_scale = 1.0 / static_cast<double>(neighbors.size());
  for (int j : neighbors) {
    const PairTable& pair = pair_table(id, j);
    const bool self_is_first = std::min(id, j) == id;
    for (int k = 0; k < horizon_; ++k) {
      const int n = pow5(k + 1);
      const double prefix_scale = neighbor_scale / static_cast<double>(n);
      for (int ps = 0; ps < n; ++ps) {
        std::array<double, 3> g{0.0, 0.0, 0.0};
        double other = 0.0;
        for (int po = 0; po < n; ++po) {
          const std::size_t idx = self_is_first
                                      ? static_cast<std::size_t>(ps) * n + po
                                      : static_cast<std::size_t>(po) * n + ps;
          const PairTable::Entry& e = pair.levels[k][idx];
          const std::array<double, 3>& gs = self_is_first ? e.gain_a : e.gain_b;
          const std::array<double, 3>& go = self_is_first ? e.gain_b : e.gain_a;
          g[0] += gs[0];
          g[1] += gs[1];
          g[2] += gs[2];
          other += w_other(0) * go[0] + w_other(1) * go[1] + w_other(2) * go[2];
        }
        tables.self_gain[k][ps][0] += g[0] * prefix_scale;
        tables.self_gain[k][ps][1] += g[1] * prefix_scale;
        tables.self_gain[k][ps][2] += g[2] * prefix_scale;
        tables.other_reward[k][ps] += other * prefix_scale;
      }
    }
  }
  return behavior_tables_.emplace(id, std::move(tables)).first->second;
}

std::vector<double> Engine::sequence_values(int id, const SocialOrientation& sigma,
                                            const ObjectiveWeights& w) {
  const BehaviorTables& tables = behavior_tables(id);
  const double theta_self = sigma.theta_self();
  const double theta_other = sigma.theta_other();

  // Per-prefix step value at each level, then discounted accumulation along
  // the prefix tree.
  std::vector<std::vector<double>> level_values(horizon_);
  double discount_k = 1.0;
  for (int k = 0; k < horizon_; ++k) {
    const int n = pow5(k + 1);
    level_values[k].resize(n);
    for (int p = 0; p < n; ++p) {
      const std::array<double, 3>& g = tables.self_gain[k][p];
      const double self_reward = w.headway * g[0] + w.progress * g[1] + w.effort * g[2];
      level_values[k][p] =
          discount_k * (theta_self * self_reward + theta_other * tables.other_reward[k][p]);
    }
    discount_k *= discount_;
  }
  // Accumulate parent prefix values down the tree.
  for (int k = 1; k < horizon_; ++k) {
    const int n = pow5(k + 1);
    for (int p = 0; p < n; ++p) level_values[k][p] += level_values[k - 1][p / kActionCount];
  }
  return level_values[horizon_ - 1];
}

std::array<double, kActionCount> Engine::action_values(int id,
                                                       const SocialOrientation& sigma,
                                                       const ObjectiveWeights& w) {
  const std::vector<double> values = sequence_values(id, sigma, w);
  const int block = n_sequences_ / kActionCount;
  std::array<double, kActionCount> q{};
  for (int u = 0; u < kActionCount; ++u) {
    double sum = 0.0;
    for (int s = u * block; s < (u + 1) * block; ++s) sum += values[s];
    q[u] = sum / block;
  }
  return q;
}

std::array<bool, kActionCount> Engine::feasible_mask(int id) const {
  const VehicleState& state = snapshot_.vehicle(id).state;
  std::array<bool, kActionCount> mask{};
  for (int u = 0; u < kActionCount; ++u) {
    mask[u] = action_is_feasible(state, static_cast<DriverAction>(u), params_.road);
  }
  return mask;
}

std::vector<double> Engine::masked_softmax(const std::vector<double>& values,
                                           const std::array<bool, kActionCount>& mask,
                                           double temperature, int block) {
  std::vector<double> probs(values.size(), 0.0);
  double max_value = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < values.size(); ++s) {
    if (mask[s / block]) max_value = std::max(max_value, values[s]);
  }
  double total = 0.0;
  for (std::size_t s = 0; s < values.size(); ++s) {
    if (!mask[s / block]) continue;
    probs[s] = std::exp((values[s] - max_value) / temperature);
    total += probs[s];
  }
  for (double& p : probs) p /= total;
  return probs;
}

std::vector<double> Engine::sequence_distribution(int id, const SocialOrientation& sigma,
                                                  const ObjectiveWeights& w,
                                                  double temperature) {
  return masked_softmax(sequence_values(id, sigma, w), feasible_mask(id), temperature,
                        n_sequences_ / kActionCount);
}

std::array<double, kActionCount> Engine::first_action_policy(
    int id, const SocialOrientation& sigma, const ObjectiveWeights& w,
    double temperature) {
  const std::array<double, kActionCount> q = action_values(id, sigma, w);
  const std::vector<double> probs = masked_softmax(
      std::vector<double>(q.begin(), q.end()), feasible_mask(id), temperature, 1);
  std::array<double, kActionCount> result{};
  std::copy(probs.begin(), probs.end(), result.begin());
  return result;
}

std::vector<std::vector<double>> prefix_marginals(const std::vector<double>& seq_probs,
                                                  int horizon) {
  std::vector<std::vector<double>> marginals(horizon);
  marginals[horizon - 1] = seq_probs;
  for (int k = horizon - 2; k >= 0; --k) {
    const int n = pow5(k + 1);
    marginals[k].assign(n, 0.0);
    for (int p = 0; p < n * kActionCount; ++p) {
      marginals[k][p / kActionCount] += marginals[k + 1][p];
    }
  }
  return marginals;
}

}  // namespace mergesim::detail
