#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "mergesim/behavior.hpp"
#include "mergesim/rewards.hpp"
#include "mergesim/traffic.hpp"

namespace mergesim {

// Finite objective-weight set used by the filter; every member is a normalized
// combination of zeros and ones over [headway, progress, effort].
const std::array<ObjectiveWeights, 7>& weight_set();

struct IntentCell {
  SocialOrientation sigma;
  ObjectiveWeights weights;
  std::string label;  // e.g. "egoistic_w1"; stable CSV column name
};

// The 22-cell latent-intent grid: {prosocial, egoistic, competitive} x the 7
// weight vectors, plus a single altruistic cell (an altruistic driver's reward
// ignores its own weights, so one cell represents the whole category). The
// order below is the fixed cell order used in every belief CSV.
const std::vector<IntentCell>& intent_grid();

inline constexpr int kIntentCellCount = 22;
inline constexpr int kAltruisticCell = 21;

// Discrete posterior over the intent grid for one neighbor.
struct IntentBelief {
  std::vector<double> probabilities;  // size 22, nonnegative, sums to 1

  void validate() const;
  // Cell indices ordered by decreasing probability (ties by cell index).
  std::vector<int> ranked() const;
  // True when the cell is among the k highest-probability cells, counting ties
  // generously: fewer than k cells have strictly larger mass.
  bool in_top(int cell, int k) const;
};

IntentBelief init_belief();  // uniform 1/22

// Zero-mean multivariate normal density at `residual`; component order
// [x, v_x, y]. Throws when the covariance is singular.
double gaussian_density(const Eigen::Vector3d& residual, const Eigen::Matrix3d& cov);

// One-step observation history entry: the traffic at time t and the states
// observed at t+1.
struct ObservationHistory {
  std::vector<TrafficSnapshot> snapshots;  // time-ordered, uniform dt
};

// Controls reconstructed from two consecutive observed states by finite
// differences (used when replaying recorded trajectories).
Control reconstruct_control(const VehicleState& before, const VehicleState& after,
                            const KinematicsConfig& kin);

// Transition likelihood of the observed next state under one intent cell:
// sum over actions of policy probability times the Gaussian density of the
// residual against the deterministic one-step prediction.
double transition_likelihood(const TrafficSnapshot& snapshot, int vehicle_id,
                             const VehicleState& observed_next,
                             const SocialOrientation& sigma, const ObjectiveWeights& w,
                             const ModelParams& params);

// Log-likelihood of every grid cell, sharing the per-vehicle prediction work.
std::vector<double> cell_log_likelihoods(const TrafficSnapshot& snapshot, int vehicle_id,
                                         const VehicleState& observed_next,
                                         const ModelParams& params);

// Posterior from prior and per-cell likelihoods. When every likelihood is
// below the underflow floor the prior is returned unchanged.
std::vector<double> bayes_update(const std::vector<double>& prior,
                                 const std::vector<double>& likelihoods);

// Recursive filter step for one neighbor.
IntentBelief update(const IntentBelief& belief, const TrafficSnapshot& snapshot,
                    int vehicle_id, const VehicleState& observed_next,
                    const ModelParams& params);

// Updates the beliefs of every id in `ids` given consecutive snapshots; ids
// absent from either snapshot are left untouched. Missing beliefs start
// uniform.
std::map<int, IntentBelief> update_all(const std::map<int, IntentBelief>& beliefs,
                                       const TrafficSnapshot& prev,
                                       const TrafficSnapshot& next,
                                       const std::vector<int>& ids,
                                       const ModelParams& params);

}  // namespace mergesim
