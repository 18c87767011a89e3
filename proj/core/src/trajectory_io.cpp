#include "mergesim/trajectory_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mergesim {

int TrajectoryRecord::first_frame(int vehicle_id) const {
  return tracks.at(vehicle_id).front().frame;
}

int TrajectoryRecord::last_frame(int vehicle_id) const {
  return tracks.at(vehicle_id).back().frame;
}

const TrajectoryRecord::Frame* TrajectoryRecord::at(int vehicle_id, int frame) const {
  auto it = tracks.find(vehicle_id);
  if (it == tracks.end()) return nullptr;
  const std::vector<Frame>& track = it->second;
  const int offset = frame - track.front().frame;
  if (offset < 0 || offset >= static_cast<int>(track.size())) return nullptr;
  return &track[offset];  // frames are contiguous per vehicle
}

namespace {

const std::array<const char*, 7> kColumns = {"frame", "id", "x", "y",
                                             "xVelocity", "yVelocity", "laneId"};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, int row, const char* column) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument("trailing characters");
    if (std::isnan(value))
      throw std::invalid_argument("NaN value");
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument("trajectory row " + std::to_string(row) +
                                ": invalid value for column " + column + ": '" + text +
                                "'");
  }
}

int parse_int(const std::string& text, int row, const char* column) {
  try {
    std::size_t consumed = 0;
    const int value = std::stoi(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument("trajectory row " + std::to_string(row) +
                                ": invalid value for column " + column + ": '" + text +
                                "'");
  }
}

}  // namespace

TrajectoryRecord load_trajectories(const std::filesystem::path& path, double frame_rate) {
  if (!(frame_rate > 0.0)) throw std::invalid_argument("frame rate must be > 0");
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open trajectory file: " + path.string());

  TrajectoryRecord record;
  record.recording_id = path.stem().string();
  record.frame_rate = frame_rate;

  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("trajectory file is empty: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv(line);
  for (const char* column : kColumns) {
    if (std::find(header.begin(), header.end(), column) == header.end())
      throw std::invalid_argument(std::string("trajectory header: missing column ") +
                                  column);
  }
  if (header.size() != kColumns.size() ||
      !std::equal(header.begin(), header.end(), kColumns.begin()))
    throw std::invalid_argument(
        "trajectory header: columns must be exactly frame,id,x,y,xVelocity,yVelocity,"
        "laneId");

  struct RawRow {
    TrajectoryRecord::Frame frame;
    int row_number;
  };
  std::map<int, std::vector<RawRow>> raw_tracks;
  int row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != kColumns.size())
      throw std::invalid_argument("trajectory row " + std::to_string(row_number) +
                                  ": expected 7 fields, got " +
                                  std::to_string(fields.size()));
    TrajectoryRecord::Frame f;
    f.frame = parse_int(fields[0], row_number, "frame");
    const int id = parse_int(fields[1], row_number, "id");
    f.x = parse_double(fields[2], row_number, "x");
    f.y = parse_double(fields[3], row_number, "y");
    f.v_x = parse_double(fields[4], row_number, "xVelocity");
    f.v_y = parse_double(fields[5], row_number, "yVelocity");
    f.lane_id = parse_int(fields[6], row_number, "laneId");
    raw_tracks[id].push_back(RawRow{f, row_number});
  }

  for (auto& [id, rows] : raw_tracks) {
    std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) {
      return a.frame.frame < b.frame.frame;
    });
    std::vector<TrajectoryRecord::Frame> track;
    track.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0) {
        const int previous = rows[i - 1].frame.frame;
        if (rows[i].frame.frame == previous)
          throw std::invalid_argument(
              "trajectory row " + std::to_string(rows[i].row_number) +
              ": duplicate frame " + std::to_string(previous) + " for vehicle " +
              std::to_string(id));
        if (rows[i].frame.frame != previous + 1)
          throw std::invalid_argument(
              "trajectory row " + std::to_string(rows[i].row_number) +
              ": non-contiguous frames for vehicle " + std::to_string(id));
      }
      track.push_back(rows[i].frame);
    }
    record.tracks.emplace(id, std::move(track));
  }
  return record;
}

void save_trajectories(const TrajectoryRecord& record,
                       const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  out << "frame,id,x,y,xVelocity,yVelocity,laneId\n";
  // Rows ordered by frame then vehicle id.
  int min_frame = std::numeric_limits<int>::max();
  int max_frame = std::numeric_limits<int>::min();
  for (const auto& [id, track] : record.tracks) {
    min_frame = std::min(min_frame, track.front().frame);
    max_frame = std::max(max_frame, track.back().frame);
  }
  for (int frame = min_frame; frame <= max_frame; ++frame) {
    for (const auto& [id, track] : record.tracks) {
      const TrajectoryRecord::Frame* f = record.at(id, frame);
      if (f == nullptr) continue;
      out << frame << ',' << id << ',' << format_double(f->x) << ','
          << format_double(f->y) << ',' << format_double(f->v_x) << ','
          << format_double(f->v_y) << ',' << f->lane_id << '\n';
    }
  }
}

std::vector<MergeEpisode> extract_merge_episodes(const TrajectoryRecord& record) {
  std::vector<MergeEpisode> episodes;
  for (const auto& [id, track] : record.tracks) {
    if (track.front().lane_id == 0 && track.back().lane_id > 0) {
      episodes.push_back(MergeEpisode{id, track.front().frame, track.back().frame});
    }
  }
  return episodes;
}

ModelParams ReplaySetup::params() const {
  ModelParams p{road, kinematics, rewards, behavior};
  p.kinematics.dt = dt;
  return p;
}

namespace {

bool starts_on_ramp(const TrajectoryRecord& record, int id) {
  return record.tracks.at(id).front().lane_id == 0;
}

std::vector<TrafficVehicle> replayed_vehicles(const TrajectoryRecord& record, int frame,
                                              int exclude_id) {
  std::vector<TrafficVehicle> vehicles;
  for (const auto& [id, track] : record.tracks) {
    if (id == exclude_id) continue;
    const TrajectoryRecord::Frame* f = record.at(id, frame);
    if (f == nullptr) continue;
    vehicles.push_back(
        TrafficVehicle{id, VehicleState{f->x, f->y, f->v_x}, starts_on_ramp(record, id)});
  }
  return vehicles;
}

}  // namespace

SimOutcome replay_episode(const TrajectoryRecord& record, const MergeEpisode& episode,
                          const ReplaySetup& setup) {
  if (record.tracks.find(episode.vehicle_id) == record.tracks.end())
    throw std::invalid_argument("episode vehicle not present in the record");
  if (episode.start_frame < record.first_frame(episode.vehicle_id) ||
      episode.end_frame > record.last_frame(episode.vehicle_id))
    throw std::invalid_argument("episode span exceeds the vehicle's recorded track");

  const ModelParams params = setup.params();
  params.validate();
  setup.planner.validate();
  const double frames_per_epoch = setup.dt * record.frame_rate;
  const int ego_id = episode.vehicle_id;

  const TrajectoryRecord::Frame* start = record.at(ego_id, episode.start_frame);
  VehicleState ego_state{start->x, start->y, start->v_x};

  SimOutcome outcome;
  outcome.ego_id = ego_id;
  std::map<int, IntentBelief> beliefs;

  TrafficSnapshot snapshot;
  TrafficSnapshot previous;
  for (int k = 0;; ++k) {
    const int frame =
        episode.start_frame + static_cast<int>(std::lround(k * frames_per_epoch));
    if (frame > episode.end_frame) {
      outcome.verdict = Verdict::Timeout;
      outcome.steps = k;
      return outcome;
    }
    std::vector<TrafficVehicle> vehicles = replayed_vehicles(record, frame, ego_id);
    vehicles.push_back(TrafficVehicle{ego_id, ego_state, true});
    snapshot = make_snapshot(std::move(vehicles), setup.road, setup.adjacency_radius, k);

    if (const auto verdict = classify_transition(snapshot, k == 0 ? nullptr : &previous,
                                                 ego_id, setup.road,
                                                 setup.rewards.safety)) {
      outcome.verdict = *verdict;
      outcome.steps = k;
      if (*verdict == Verdict::MergedSuccess) outcome.merge_time = k * setup.dt;
      for (const TrafficVehicle& v : snapshot.vehicles) {
        outcome.trace.push_back(TraceRow{k, k * setup.dt, v.id, v.state, {}, {}});
      }
      return outcome;
    }
    if (episode.start_frame + static_cast<int>(std::lround((k + 1) * frames_per_epoch)) >
        episode.end_frame) {
      outcome.verdict = Verdict::Timeout;
      outcome.steps = k;
      for (const TrafficVehicle& v : snapshot.vehicles) {
        outcome.trace.push_back(TraceRow{k, k * setup.dt, v.id, v.state, {}, {}});
      }
      return outcome;
    }

    if (k > 0) {
      beliefs = update_all(beliefs, previous, snapshot, snapshot.neighbors(ego_id), params);
    }
    for (const TrafficVehicle& v : snapshot.vehicles) {
      if (v.id == ego_id) continue;
      BeliefRow row;
      row.step = k;
      row.time = k * setup.dt;
      row.vehicle_id = v.id;
      const auto it = beliefs.find(v.id);
      const IntentBelief& belief = it == beliefs.end() ? init_belief() : it->second;
      std::copy(belief.probabilities.begin(), belief.probabilities.end(),
                row.probabilities.begin());
      outcome.belief_trace.push_back(row);
    }

    const PlanResult result = snapshot.neighbors(ego_id).empty()
                                  ? plan_solo(snapshot, ego_id, params, setup.planner)
                                  : plan(snapshot, ego_id, beliefs, params, setup.planner);
    for (const TrafficVehicle& v : snapshot.vehicles) {
      TraceRow row{k, k * setup.dt, v.id, v.state, {}, {}};
      if (v.id == ego_id) {
        row.action = result.action;
        row.q_values = result.action_values;
      }
      outcome.trace.push_back(row);
    }

    ego_state = step(ego_state, result.action, params.kinematics, setup.road);
    previous = std::move(snapshot);
  }
}

std::vector<SimOutcome> replay_all(const TrajectoryRecord& record,
                                   const std::vector<MergeEpisode>& episodes,
                                   const ReplaySetup& setup, int max_workers) {
  std::vector<SimOutcome> results(episodes.size());
  const int workers = std::max(
      1, std::min<int>(max_workers, static_cast<int>(episodes.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < episodes.size(); ++i) {
      results[i] = replay_episode(record, episodes[i], setup);
    }
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < episodes.size();
           i = next.fetch_add(1)) {
        results[i] = replay_episode(record, episodes[i], setup);
      }
    });
  }
  for (std::thread& t : pool) t.join();
  return results;
}

ReproduceResult reproduce_vehicle(const TrajectoryRecord& record, int vehicle_id,
                                  const SocialOrientation& sigma,
                                  const ObjectiveWeights& weights,
                                  const ReplaySetup& setup) {
  if (record.tracks.find(vehicle_id) == record.tracks.end())
    throw std::invalid_argument("vehicle not present in the record");
  weights.validate();
  const ModelParams params = setup.params();
  params.validate();
  const double frames_per_epoch = setup.dt * record.frame_rate;
  const int start_frame = record.first_frame(vehicle_id);
  const int end_frame = record.last_frame(vehicle_id);
  const bool merging = starts_on_ramp(record, vehicle_id);

  const TrajectoryRecord::Frame* start = record.at(vehicle_id, start_frame);
  VehicleState virtual_state{start->x, start->y, start->v_x};

  ReproduceResult result;
  for (int k = 0;; ++k) {
    const int frame = start_frame + static_cast<int>(std::lround(k * frames_per_epoch));
    if (frame > end_frame) break;
    const TrajectoryRecord::Frame* actual = record.at(vehicle_id, frame);

    std::vector<TrafficVehicle> vehicles = replayed_vehicles(record, frame, vehicle_id);
    vehicles.push_back(TrafficVehicle{vehicle_id, virtual_state, merging});
    const TrafficSnapshot snapshot =
        make_snapshot(std::move(vehicles), setup.road, setup.adjacency_radius, k);

    const DriverAction action =
        behavior_action(snapshot, vehicle_id, sigma, weights, params);
    ReproduceRow row;
    row.step = k;
    row.time = k * setup.dt;
    row.virtual_state = virtual_state;
    row.action = action;
    row.actual_state = VehicleState{actual->x, actual->y, actual->v_x};
    row.deviation = std::hypot(virtual_state.x - actual->x, virtual_state.y - actual->y);
    result.rows.push_back(row);

    virtual_state = step(virtual_state, action, params.kinematics, setup.road);
  }
  if (result.rows.empty())
    throw std::invalid_argument("vehicle track shorter than one decision epoch");
  result.final_deviation = result.rows.back().deviation;
  return result;
}

namespace {

struct MotionPhase {
  double duration;  // s
  double a;         // m/s^2
  double v_y;       // m/s
};

// Appends frames following piecewise-constant controls, one row per frame.
void emit_track(TrajectoryRecord& record, int id, int start_frame, double total_seconds,
                VehicleState state, const std::vector<MotionPhase>& phases,
                const RoadGeometry& road, double fps) {
  std::vector<TrajectoryRecord::Frame> track;
  const int frames = static_cast<int>(std::lround(total_seconds * fps));
  const double dt = 1.0 / fps;
  std::size_t phase_index = 0;
  double phase_elapsed = 0.0;
  double v_y = phases.empty() ? 0.0 : phases[0].v_y;
  for (int f = 0; f <= frames; ++f) {
    TrajectoryRecord::Frame frame;
    frame.frame = start_frame + f;
    frame.x = state.x;
    frame.y = state.y;
    frame.v_x = state.v_x;
    frame.v_y = v_y;
    frame.lane_id = nearest_band(state.y, road);
    track.push_back(frame);

    double a = 0.0;
    v_y = 0.0;
    if (phase_index < phases.size()) {
      a = phases[phase_index].a;
      v_y = phases[phase_index].v_y;
      phase_elapsed += dt;
      if (phase_elapsed >= phases[phase_index].duration - 1e-9) {
        ++phase_index;
        phase_elapsed = 0.0;
      }
    }
    state.x += state.v_x * dt;
    state.v_x = std::max(0.0, state.v_x + a * dt);
    state.y += v_y * dt;
  }
  record.tracks.emplace(id, std::move(track));
}

}  // namespace

TrajectoryRecord generate_synthetic_record(const SyntheticOptions& options) {
  if (options.episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  TrajectoryRecord record;
  record.recording_id = options.adversarial ? "synthetic_adversarial" : "synthetic";
  record.frame_rate = options.frame_rate;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const RoadGeometry& road = options.road;
  const double ramp_y = road.ramp_center_y();
  const double lane1_y = road.lane_center_y(1);
  const double lane2_y = road.lane_center_y(2 <= road.lane_count ? 2 : 1);
  const double episode_seconds = options.adversarial ? 24.0 : 20.0;
  const int frames_per_slot =
      static_cast<int>(std::lround((episode_seconds + 8.0) * options.frame_rate));

  for (int e = 0; e < options.episodes; ++e) {
    const int base_id = 100 * e;
    const int start_frame = e * frames_per_slot;
    const double target_x = 15.0 + 10.0 * unit(rng);
    const double target_v = 22.0 + 4.0 * (unit(rng) - 0.5);

    if (!options.adversarial) {
      // Target-lane traffic with a generous moving gap around the target.
      const double follower_x = target_x - 35.0 - 10.0 * unit(rng);
      const double leader_x = target_x + 55.0 + 15.0 * unit(rng);
      const double traffic_v = 20.0 + 2.0 * (unit(rng) - 0.5);
      emit_track(record, base_id + 2, start_frame, episode_seconds,
                 VehicleState{follower_x, lane1_y, traffic_v}, {}, road,
                 options.frame_rate);
      emit_track(record, base_id + 3, start_frame, episode_seconds,
                 VehicleState{leader_x, lane1_y, traffic_v}, {}, road,
                 options.frame_rate);
      emit_track(record, base_id + 4, start_frame, episode_seconds,
                 VehicleState{leader_x + 45.0 + 10.0 * unit(rng), lane1_y, traffic_v},
                 {}, road, options.frame_rate);
      emit_track(record, base_id + 5, start_frame, episode_seconds,
                 VehicleState{target_x + 20.0, lane2_y, 24.0}, {}, road,
                 options.frame_rate);
      // The recorded target cruises, adjusts speed, then completes a lane change.
      const double lateral = road.lane_width / 4.0;
      emit_track(record, base_id + 1, start_frame, episode_seconds,
                 VehicleState{target_x, ramp_y, target_v},
                 {MotionPhase{2.0, 0.0, 0.0}, MotionPhase{2.0, 1.5, 0.0},
                  MotionPhase{4.0, 0.0, lateral}},
                 road, options.frame_rate);
    } else {
      // Sealed target lane: a comb of vehicles at common speed, too dense for
      // any collision-free slot before the ramp end.
      const double comb_v = 22.0;
      int comb_id = base_id + 2;
      for (double offset = -60.0; offset <= 320.0; offset += 7.5) {
        emit_track(record, comb_id++, start_frame, episode_seconds,
                   VehicleState{target_x + offset, lane1_y, comb_v}, {}, road,
                   options.frame_rate);
      }
      // The recorded target only "merges" at the very end so the episode is
      // still extractable; playback never uses these rows.
      const double lateral = road.lane_width / 4.0;
      emit_track(record, base_id + 1, start_frame, episode_seconds,
                 VehicleState{target_x, ramp_y, target_v},
                 {MotionPhase{episode_seconds - 4.0, 0.0, 0.0},
                  MotionPhase{4.0, 0.0, lateral}},
                 road, options.frame_rate);
    }
  }
  return record;
}

}  // namespace mergesim
