#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mergesim/simulation.hpp"

namespace mergesim {

// Naturalistic trajectory recording in the documented CSV schema
// (header: frame,id,x,y,xVelocity,yVelocity,laneId). Coordinates follow the
// library convention: x along travel direction, y leftward from the outer
// boundary, laneId 0 is the ramp band and 1..L the highway lanes.
struct TrajectoryRecord {
  struct Frame {
    int frame = 0;
    double x = 0.0;
    double y = 0.0;
    double v_x = 0.0;
    double v_y = 0.0;
    int lane_id = 0;
  };

  std::string recording_id;
  double frame_rate = 25.0;                // Hz
  std::map<int, std::vector<Frame>> tracks;  // per vehicle, contiguous frames

  int first_frame(int vehicle_id) const;
  int last_frame(int vehicle_id) const;
  // nullptr when the vehicle has no row at `frame`.
  const Frame* at(int vehicle_id, int frame) const;
};

// Parses and validates a recording; malformed rows are rejected with their row
// number in the error message.
TrajectoryRecord load_trajectories(const std::filesystem::path& path,
                                   double frame_rate = 25.0);
void save_trajectories(const TrajectoryRecord& record,
                       const std::filesystem::path& path);

// One forced-merge episode: a vehicle whose track begins in the ramp lane and
// ends in a highway lane.
struct MergeEpisode {
  int vehicle_id = 0;
  int start_frame = 0;
  int end_frame = 0;
};

std::vector<MergeEpisode> extract_merge_episodes(const TrajectoryRecord& record);

// Replay evaluation setup: the virtual ego replaces the merging vehicle and is
// planned at fixed decision epochs while every other vehicle is replayed
// verbatim (nearest recorded frame per epoch).
struct ReplaySetup {
  RoadGeometry road = RoadGeometry::make(2, 3.5, 0.0, 250.0, 400.0);
  KinematicsConfig kinematics;  // dt below overrides kinematics.dt
  RewardConfig rewards;
  BehaviorConfig behavior;
  PlannerConfig planner;
  double dt = 2.0;  // s between decision epochs
  double adjacency_radius = 100.0;

  ModelParams params() const;
};

SimOutcome replay_episode(const TrajectoryRecord& record, const MergeEpisode& episode,
                          const ReplaySetup& setup);

// Evaluates every episode; `max_workers` > 1 fans episodes out to a worker
// pool (results keep episode order).
std::vector<SimOutcome> replay_all(const TrajectoryRecord& record,
                                   const std::vector<MergeEpisode>& episodes,
                                   const ReplaySetup& setup, int max_workers = 1);

// Drives a virtual vehicle with the behavior model under fixed intent
// parameters against verbatim playback of the rest of the traffic; returns
// side-by-side virtual/actual rows.
struct ReproduceRow {
  int step = 0;
  double time = 0.0;
  VehicleState virtual_state;
  DriverAction action = DriverAction::Maintain;
  VehicleState actual_state;
  double deviation = 0.0;  // planar distance between virtual and actual
};

struct ReproduceResult {
  std::vector<ReproduceRow> rows;
  double final_deviation = 0.0;
};

ReproduceResult reproduce_vehicle(const TrajectoryRecord& record, int vehicle_id,
                                  const SocialOrientation& sigma,
                                  const ObjectiveWeights& weights,
                                  const ReplaySetup& setup);

// Synthetic recording generator: schema-identical files with staggered merge
// episodes. Benign episodes keep a generous gap in the target lane;
// adversarial episodes seal the target lane so a merge before the ramp end is
// impossible.
struct SyntheticOptions {
  int episodes = 10;
  bool adversarial = false;
  std::uint64_t seed = 0;
  double frame_rate = 25.0;
  RoadGeometry road = RoadGeometry::make(2, 3.5, 0.0, 250.0, 400.0);
};

TrajectoryRecord generate_synthetic_record(const SyntheticOptions& options);

}  // namespace mergesim
