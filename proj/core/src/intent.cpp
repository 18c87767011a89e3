#include "mergesim/intent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "prediction.hpp"

namespace mergesim {

namespace {

constexpr double kUnderflowFloor = 1e-300;
const double kLogUnderflowFloor = std::log(kUnderflowFloor);

std::array<ObjectiveWeights, 7> make_weight_set() {
  return {{
      {0.0, 0.0, 1.0},
      {0.0, 0.5, 0.5},
      {0.0, 1.0, 0.0},
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
      {0.5, 0.0, 0.5},
      {0.5, 0.5, 0.0},
      {1.0, 0.0, 0.0},
  }};
}

std::vector<IntentCell> make_grid() {
  std::vector<IntentCell> cells;
  cells.reserve(kIntentCellCount);
  const std::array<SvoCategory, 3> categories = {
      SvoCategory::Prosocial, SvoCategory::Egoistic, SvoCategory::Competitive};
  for (SvoCategory category : categories) {
    const auto& ws = weight_set();
    for (std::size_t i = 0; i < ws.size(); ++i) {
      cells.push_back(IntentCell{SocialOrientation{category}, ws[i],
                                 std::string(svo_name(category)) + "_w" +
                                     std::to_string(i + 1)});
    }
  }
  cells.push_back(IntentCell{SocialOrientation{SvoCategory::Altruistic},
                             ObjectiveWeights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                             "altruistic"});
  return cells;
}

}  // namespace

const std::array<ObjectiveWeights, 7>& weight_set() {
  static const std::array<ObjectiveWeights, 7> set = make_weight_set();
  return set;
}

const std::vector<IntentCell>& intent_grid() {
  static const std::vector<IntentCell> grid = make_grid();
  return grid;
}

void IntentBelief::validate() const {
  if (probabilities.size() != kIntentCellCount)
    throw std::invalid_argument("belief must have 22 cells");
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw std::invalid_argument("belief probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("belief probabilities must sum to 1");
}

std::vector<int> IntentBelief::ranked() const {
  std::vector<int> order(probabilities.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [this](int a, int b) {
    return probabilities[a] > probabilities[b];
  });
  return order;
}

bool IntentBelief::in_top(int cell, int k) const {
  int strictly_above = 0;
  for (double p : probabilities) {
    if (p > probabilities[cell]) ++strictly_above;
  }
  return strictly_above < k;
}

IntentBelief init_belief() {
  IntentBelief belief;
  belief.probabilities.assign(kIntentCellCount, 1.0 / kIntentCellCount);
  return belief;
}

namespace {

// log of the zero-mean normal density; throws on a singular covariance.
double log_gaussian_density(const Eigen::Vector3d& residual, const Eigen::Matrix3d& cov) {
  const Eigen::LLT<Eigen::Matrix3d> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("disturbance covariance is singular or indefinite");
  const Eigen::Matrix3d l = llt.matrixL();
  double log_det = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (!(l(i, i) > 0.0))
      throw std::invalid_argument("disturbance covariance is singular or indefinite");
    log_det += 2.0 * std::log(l(i, i));
  }
  const Eigen::Vector3d z = llt.matrixL().solve(residual);
  return -1.5 * std::log(2.0 * M_PI) - 0.5 * log_det - 0.5 * z.squaredNorm();
}

double log_sum_exp(const std::vector<double>& terms) {
  double max_term = -std::numeric_limits<double>::infinity();
  for (double t : terms) max_term = std::max(max_term, t);
  if (!std::isfinite(max_term)) return max_term;
  double total = 0.0;
  for (double t : terms) total += std::exp(t - max_term);
  return max_term + std::log(total);
}

// Residual log-densities of the observed state against the one-step
// prediction of each action; shared by every grid cell.
std::array<double, kActionCount> residual_log_densities(const TrafficSnapshot& snapshot,
                                                        int vehicle_id,
                                                        const VehicleState& observed_next,
                                                        const ModelParams& params) {
  std::array<double, kActionCount> result{};
  const VehicleState& state = snapshot.vehicle(vehicle_id).state;
  for (int u = 0; u < kActionCount; ++u) {
    const VehicleState predicted =
        step(state, static_cast<DriverAction>(u), params.kinematics, params.road);
    const Eigen::Vector3d residual(observed_next.x - predicted.x,
                                   observed_next.v_x - predicted.v_x,
                                   observed_next.y - predicted.y);
    result[u] = log_gaussian_density(residual, params.kinematics.disturbance_cov);
  }
  return result;
}

double log_likelihood_for_policy(const std::array<double, kActionCount>& policy,
                                 const std::array<double, kActionCount>& log_density) {
  std::vector<double> terms;
  terms.reserve(kActionCount);
  for (int u = 0; u < kActionCount; ++u) {
    if (policy[u] > 0.0) terms.push_back(std::log(policy[u]) + log_density[u]);
  }
  return log_sum_exp(terms);
}

}  // namespace

double gaussian_density(const Eigen::Vector3d& residual, const Eigen::Matrix3d& cov) {
  return std::exp(log_gaussian_density(residual, cov));
}

Control reconstruct_control(const VehicleState& before, const VehicleState& after,
                            const KinematicsConfig& kin) {
  return Control{(after.v_x - before.v_x) / kin.dt, (after.y - before.y) / kin.dt};
}

double transition_likelihood(const TrafficSnapshot& snapshot, int vehicle_id,
                             const VehicleState& observed_next,
                             const SocialOrientation& sigma, const ObjectiveWeights& w,
                             const ModelParams& params) {
  detail::Engine engine(snapshot, params, params.behavior.horizon,
                        params.behavior.discount);
  const std::array<double, kActionCount> policy =
      engine.first_action_policy(vehicle_id, sigma, w, params.behavior.temperature);
  return std::exp(log_likelihood_for_policy(
      policy, residual_log_densities(snapshot, vehicle_id, observed_next, params)));
}

std::vector<double> cell_log_likelihoods(const TrafficSnapshot& snapshot, int vehicle_id,
                                         const VehicleState& observed_next,
                                         const ModelParams& params) {
  detail::Engine engine(snapshot, params, params.behavior.horizon,
                        params.behavior.discount);
  const std::array<double, kActionCount> log_density =
      residual_log_densities(snapshot, vehicle_id, observed_next, params);
  std::vector<double> result;
  result.reserve(kIntentCellCount);
  for (const IntentCell& cell : intent_grid()) {
    const std::array<double, kActionCount> policy = engine.first_action_policy(
        vehicle_id, cell.sigma, cell.weights, params.behavior.temperature);
    result.push_back(log_likelihood_for_policy(policy, log_density));
  }
  return result;
}

std::vector<double> bayes_update(const std::vector<double>& prior,
                                 const std::vector<double>& likelihoods) {
  if (prior.size() != likelihoods.size())
    throw std::invalid_argument("prior and likelihood sizes differ");
  bool all_underflow = true;
  for (double l : likelihoods) {
    if (l >= kUnderflowFloor) all_underflow = false;
  }
  if (all_underflow) return prior;
  double total = 0.0;
  std::vector<double> posterior(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    posterior[i] = prior[i] * likelihoods[i];
    total += posterior[i];
  }
  if (!(total > 0.0)) return prior;
  for (double& p : posterior) p /= total;
  return posterior;
}

IntentBelief update(const IntentBelief& belief, const TrafficSnapshot& snapshot,
                    int vehicle_id, const VehicleState& observed_next,
                    const ModelParams& params) {
  belief.validate();
  const std::vector<double> log_likelihood =
      cell_log_likelihoods(snapshot, vehicle_id, observed_next, params);

  double max_term = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < kIntentCellCount; ++c) {
    if (belief.probabilities[c] > 0.0) max_term = std::max(max_term, log_likelihood[c]);
  }
  // Underflow guard: an observation no cell can explain leaves the belief
  // unchanged rather than producing an invalid distribution.
  if (!(max_term >= kLogUnderflowFloor)) return belief;

  IntentBelief posterior;
  posterior.probabilities.resize(kIntentCellCount);
  double total = 0.0;
  for (int c = 0; c < kIntentCellCount; ++c) {
    const double p =
        belief.probabilities[c] * std::exp(log_likelihood[c] - max_term);
    posterior.probabilities[c] = p;
    total += p;
  }
  if (!(total > 0.0)) return belief;
  for (double& p : posterior.probabilities) p /= total;
  return posterior;
}

std::map<int, IntentBelief> update_all(const std::map<int, IntentBelief>& beliefs,
                                       const TrafficSnapshot& prev,
                                       const TrafficSnapshot& next,
                                       const std::vector<int>& ids,
                                       const ModelParams& params) {
  std::map<int, IntentBelief> result = beliefs;
  for (int id : ids) {
    if (prev.index_of(id) < 0 || next.index_of(id) < 0) continue;
    auto it = result.find(id);
    if (it == result.end()) it = result.emplace(id, init_belief()).first;
    it->second = update(it->second, prev, id, next.vehicle(id).state, params);
  }
  return result;
}

}  // namespace mergesim
