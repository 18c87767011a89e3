#pragma once

// Internal enumeration engine behind the behavior model, the intent filter,
// and the ego planner.
//
// Sequences of N actions are base-5 numbers with the first action as the most
// significant digit. The "prefix" of a sequence at level k (k = 0..N-1)
// encodes its first k+1 actions the same way, so level k has 5^(k+1) distinct
// prefixes and the rollout state after k+1 actions depends only on the prefix.
// Per-step rewards at level k depend on the two vehicles' level-k prefixes
// alone, which keeps every expectation in the model an exact contraction over
// prefix tables instead of an enumeration over joint sequences.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "mergesim/behavior.hpp"
#include "mergesim/rewards.hpp"
#include "mergesim/traffic.hpp"
#include "mergesim/world.hpp"

namespace mergesim::detail {

inline int pow5(int n) {
  int r = 1;
  while (n-- > 0) r *= 5;
  return r;
}

// Per-level rollout data of one vehicle: states before/after the level's
// action plus the action-independent reward pieces.
struct VehicleTable {
  // All vectors at level k have 5^(k+1) entries.
  std::vector<std::vector<VehicleState>> prev;
  std::vector<std::vector<VehicleState>> next;
  std::vector<std::vector<std::uint8_t>> boundary;  // crosses_boundary(next)
  std::vector<std::vector<double>> tau;             // progress(next, mix)
  std::vector<std::vector<double>> effort_level;    // effort(action at prefix)
};

VehicleTable build_vehicle_table(const TrafficVehicle& vehicle, int horizon,
                                 const ModelParams& params);

// Pairwise step gains for an ordered vehicle pair (a, b), flattened as
// level[k][pa * 5^(k+1) + pb].
struct PairTable {
  struct Entry {
    std::array<double, 3> gain_a;  // (1-c_a) * [h, tau, e] of a against b
    std::array<double, 3> gain_b;
  };
  std::vector<std::vector<Entry>> levels;
};

PairTable build_pair_table(const VehicleTable& a, const VehicleTable& b, int horizon,
                           const ModelParams& params);

// Uniform-neighbor reductions aggregated over all neighbors of one vehicle:
//   self_gain[k][p]   = (1/|A|) sum_j E_{uniform j-prefix} gain_self
//   other_reward[k][p] = (1/|A|) sum_j E_{uniform j-prefix} <w_other, gain_j>
// For a vehicle with no neighbors (solo fallback) self_gain carries the
// boundary-gated [1, tau, e] vector and other_reward is zero.
struct BehaviorTables {
  bool solo = false;
  std::vector<std::vector<std::array<double, 3>>> self_gain;
  std::vector<std::vector<double>> other_reward;
};

// Caches rollout, pair, and behavior tables for one snapshot so repeated
// queries (22 intent cells, per-neighbor planner terms) share the heavy work.
class Engine {
 public:
  Engine(const TrafficSnapshot& snapshot, const ModelParams& params, int horizon,
         double discount);

  const TrafficSnapshot& snapshot() const { return snapshot_; }
  int horizon() const { return horizon_; }
  int sequences() const { return n_sequences_; }
  double discount() const { return discount_; }

  const VehicleTable& vehicle_table(int id);
  const PairTable& pair_table(int id_a, int id_b);  // canonical order (min,max)
  const BehaviorTables& behavior_tables(int id);

  // Q' of every sequence of `id` under the given intent parameters. Solo
  // vehicles use theta_self * personal reward.
  std::vector<double> sequence_values(int id, const SocialOrientation& sigma,
                                      const ObjectiveWeights& w);

  // Block means of sequence values per first action.
  std::array<double, kActionCount> action_values(int id, const SocialOrientation& sigma,
                                                 const ObjectiveWeights& w);

  std::array<bool, kActionCount> feasible_mask(int id) const;

  // softmax(values/temperature) restricted to entries whose first action is
  // feasible; `block` > 1 treats `values` as consecutive first-action blocks.
  static std::vector<double> masked_softmax(const std::vector<double>& values,
                                            const std::array<bool, kActionCount>& mask,
                                            double temperature, int block);

  std::vector<double> sequence_distribution(int id, const SocialOrientation& sigma,
                                            const ObjectiveWeights& w,
                                            double temperature);

  std::array<double, kActionCount> first_action_policy(int id,
                                                       const SocialOrientation& sigma,
                                                       const ObjectiveWeights& w,
                                                       double temperature);

 private:
  const TrafficSnapshot& snapshot_;
  const ModelParams& params_;
  int horizon_;
  int n_sequences_;
  double discount_;
  std::map<int, VehicleTable> vehicle_tables_;
  std::map<std::pair<int, int>, PairTable> pair_tables_;
  std::map<int, BehaviorTables> behavior_tables_;
};

// Marginal probability mass of each level-k prefix under a distribution over
// full sequences; result[k] has 5^(k+1) entries.
std::vector<std::vector<double>> prefix_marginals(const std::vector<double>& seq_probs,
                                                  int horizon);

}  // namespace mergesim::detail
