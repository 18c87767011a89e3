#include "mergesim/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "prediction.hpp"

namespace mergesim {

void PlannerConfig::validate() const {
  if (horizon < 1 || horizon > 4)
    throw std::invalid_argument("planner: horizon must lie in [1, 4]");
  if (discount < 0.0 || discount > 1.0)
    throw std::invalid_argument("planner: discount must lie in [0, 1]");
}

namespace {

using detail::pow5;

// Ego step reward per (ego prefix, neighbor prefix): the progress component of
// the collision-gated pair gain.
double ego_step_reward(const detail::PairTable::Entry& entry, bool ego_is_first,
                       bool include_neighbor_progress) {
  const std::array<double, 3>& ego_gain = ego_is_first ? entry.gain_a : entry.gain_b;
  double r = ego_gain[1];
  if (include_neighbor_progress) {
    const std::array<double, 3>& other_gain = ego_is_first ? entry.gain_b : entry.gain_a;
    r += other_gain[1];
  }
  return r;
}

// Per-level contraction of the ego-neighbor reward table against the
// neighbor's prefix marginals: result[k][p0] = E_{gamma_i}[r_0(k) | prefix p0].
std::vector<std::vector<double>> contract_neighbor(
    const detail::PairTable& pair, bool ego_is_first,
    const std::vector<std::vector<double>>& neighbor_marginals, int horizon,
    bool include_neighbor_progress) {
  std::vector<std::vector<double>> contracted(horizon);
  for (int k = 0; k < horizon; ++k) {
    const int n = pow5(k + 1);
    contracted[k].assign(n, 0.0);
    for (int p0 = 0; p0 < n; ++p0) {
      double total = 0.0;
      for (int pi = 0; pi < n; ++pi) {
        const std::size_t idx = ego_is_first ? static_cast<std::size_t>(p0) * n + pi
                                             : static_cast<std::size_t>(pi) * n + p0;
        total += neighbor_marginals[k][pi] *
                 ego_step_reward(pair.levels[k][idx], ego_is_first,
                                 include_neighbor_progress);
      }
      contracted[k][p0] = total;
    }
  }
  return contracted;
}

// Discounted accumulation of per-level prefix values into full-sequence values.
std::vector<double> accumulate_sequences(std::vector<std::vector<double>> levels,
                                         double discount) {
  const int horizon = static_cast<int>(levels.size());
  double discount_k = 1.0;
  for (int k = 0; k < horizon; ++k) {
    for (double& v : levels[k]) v *= discount_k;
    discount_k *= discount;
  }
  for (int k = 1; k < horizon; ++k) {
    const int n = static_cast<int>(levels[k].size());
    for (int p = 0; p < n; ++p) levels[k][p] += levels[k - 1][p / kActionCount];
  }
  return levels[horizon - 1];
}

// Q'_0 for every ego sequence.
std::vector<double> ego_sequence_values(detail::Engine& engine, int ego_id,
                                        const std::map<int, IntentBelief>& beliefs,
                                        const ModelParams& params,
                                        const PlannerConfig& cfg) {
  const TrafficSnapshot& snapshot = engine.snapshot();
  const std::vector<int>& neighbors = snapshot.neighbors(ego_id);
  const int horizon = cfg.horizon;

  std::vector<std::vector<double>> totals(horizon);
  for (int k = 0; k < horizon; ++k) totals[k].assign(pow5(k + 1), 0.0);

  for (int neighbor_id : neighbors) {
    // Belief-weighted mixture of the neighbor's per-cell sequence policies.
    auto belief_it = beliefs.find(neighbor_id);
    const IntentBelief belief =
        belief_it == beliefs.end() ? init_belief() : belief_it->second;
    belief.validate();

    std::vector<double> mixture(engine.sequences(), 0.0);
    for (int c = 0; c < kIntentCellCount; ++c) {
      const double mass = belief.probabilities[c];
      if (mass <= 0.0) continue;
      const IntentCell& cell = intent_grid()[c];
      const std::vector<double> probs = engine.sequence_distribution(
          neighbor_id, cell.sigma, cell.weights, params.behavior.temperature);
      for (int s = 0; s < engine.sequences(); ++s) mixture[s] += mass * probs[s];
    }

    const std::vector<std::vector<double>> marginals =
        detail::prefix_marginals(mixture, horizon);
    const detail::PairTable& pair = engine.pair_table(ego_id, neighbor_id);
    const bool ego_is_first = std::min(ego_id, neighbor_id) == ego_id;
    const std::vector<std::vector<double>> contracted = contract_neighbor(
        pair, ego_is_first, marginals, horizon, cfg.include_neighbor_progress);
    for (int k = 0; k < horizon; ++k) {
      for (std::size_t p = 0; p < totals[k].size(); ++p)
        totals[k][p] += contracted[k][p];
    }
  }

  const double scale = 1.0 / static_cast<double>(neighbors.size());
  for (int k = 0; k < horizon; ++k) {
    for (double& v : totals[k]) v *= scale;
  }
  return accumulate_sequences(std::move(totals), cfg.discount);
}

PlanResult plan_from_sequence_values(const TrafficSnapshot& snapshot, int ego_id,
                                     const std::vector<double>& values,
                                     const ModelParams& params,
                                     const PlannerConfig& cfg) {
  PlanResult result;
  const int block = static_cast<int>(values.size()) / kActionCount;
  for (int u = 0; u < kActionCount; ++u) {
    double sum = 0.0;
    for (int s = u * block; s < (u + 1) * block; ++s) sum += values[s];
    result.action_values[u] = sum / block;
    result.feasible[u] = action_is_feasible(snapshot.vehicle(ego_id).state,
                                            static_cast<DriverAction>(u), params.road);
  }
  int best = -1;
  for (int u = 0; u < kActionCount; ++u) {
    if (!result.feasible[u]) continue;
    if (best < 0 || result.action_values[u] > result.action_values[best]) best = u;
  }
  result.action = static_cast<DriverAction>(best);
  return result;
}

}  // namespace

double ego_pair_value(const TrafficSnapshot& snapshot, int ego_id, int neighbor_id,
                      const ActionSequence& gamma_ego, const ActionSequence& gamma_other,
                      const ModelParams& params, const PlannerConfig& cfg) {
  if (static_cast<int>(gamma_ego.size()) != cfg.horizon ||
      static_cast<int>(gamma_other.size()) != cfg.horizon)
    throw std::invalid_argument("action sequence length must equal the horizon");
  const TrafficVehicle& ego = snapshot.vehicle(ego_id);
  const TrafficVehicle& other = snapshot.vehicle(neighbor_id);

  double value = 0.0;
  double discount_k = 1.0;
  VehicleState ego_state = ego.state;
  VehicleState other_state = other.state;
  for (int k = 0; k < cfg.horizon; ++k) {
    const VehicleState ego_next = step(ego_state, gamma_ego[k], params.kinematics, params.road);
    const VehicleState other_next =
        step(other_state, gamma_other[k], params.kinematics, params.road);
    const Motion ego_motion{ego_state, ego_next, gamma_ego[k], ego.merging};
    const Motion other_motion{other_state, other_next, gamma_other[k], other.merging};
    double r = pair_gain(ego_motion, other_motion, params.road, params.rewards)(1);
    if (cfg.include_neighbor_progress) {
      r += pair_gain(other_motion, ego_motion, params.road, params.rewards)(1);
    }
    value += discount_k * r;
    discount_k *= cfg.discount;
    ego_state = ego_next;
    other_state = other_next;
  }
  return value;
}

double ego_cumulative(const TrafficSnapshot& snapshot, int ego_id,
                      const ActionSequence& gamma_ego,
                      const std::map<int, IntentBelief>& beliefs,
                      const ModelParams& params, const PlannerConfig& cfg) {
  cfg.validate();
  if (snapshot.neighbors(ego_id).empty())
    throw std::invalid_argument("ego vehicle has no adjacent vehicles");
  if (static_cast<int>(gamma_ego.size()) != cfg.horizon)
    throw std::invalid_argument("action sequence length must equal the horizon");
  detail::Engine engine(snapshot, params, cfg.horizon, cfg.discount);
  return ego_sequence_values(engine, ego_id, beliefs, params, cfg)[sequence_index(gamma_ego)];
}

PlanResult plan(const TrafficSnapshot& snapshot, int ego_id,
                const std::map<int, IntentBelief>& beliefs, const ModelParams& params,
                const PlannerConfig& cfg) {
  cfg.validate();
  if (snapshot.neighbors(ego_id).empty())
    throw std::invalid_argument("ego vehicle has no adjacent vehicles");
  const auto start = std::chrono::steady_clock::now();

  detail::Engine engine(snapshot, params, cfg.horizon, cfg.discount);
  const std::vector<double> values =
      ego_sequence_values(engine, ego_id, beliefs, params, cfg);
  PlanResult result = plan_from_sequence_values(snapshot, ego_id, values, params, cfg);
  for (int id : snapshot.neighbors(ego_id)) {
    auto it = beliefs.find(id);
    result.beliefs_used[id] = it == beliefs.end() ? init_belief() : it->second;
  }
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

PlanResult plan_solo(const TrafficSnapshot& snapshot, int ego_id,
                     const ModelParams& params, const PlannerConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const TrafficVehicle& ego = snapshot.vehicle(ego_id);
  detail::VehicleTable table = detail::build_vehicle_table(ego, cfg.horizon, params);

  std::vector<std::vector<double>> levels(cfg.horizon);
  for (int k = 0; k < cfg.horizon; ++k) {
    const int n = pow5(k + 1);
    levels[k].resize(n);
    for (int p = 0; p < n; ++p) {
      levels[k][p] = table.boundary[k][p] ? 0.0 : table.tau[k][p];
    }
  }
  const std::vector<double> values = accumulate_sequences(std::move(levels), cfg.discount);
  PlanResult result = plan_from_sequence_values(snapshot, ego_id, values, params, cfg);
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace mergesim
