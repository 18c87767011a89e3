#pragma once

#include <map>
#include <vector>

#include "mergesim/world.hpp"

namespace mergesim {

struct TrafficVehicle {
  int id = 0;
  VehicleState state;
  bool merging = false;  // started on the ramp; selects the progress-reward mix
};

// States of all vehicles plus adjacency sets at one time step.
struct TrafficSnapshot {
  int time_index = 0;
  std::vector<TrafficVehicle> vehicles;           // sorted by id
  std::vector<LaneSet> lanes;                     // parallel to vehicles
  std::map<int, std::vector<int>> adjacency;      // A(i), never contains i, symmetric

  const TrafficVehicle& vehicle(int id) const;    // throws on unknown id
  int index_of(int id) const;                     // -1 when absent
  const std::vector<int>& neighbors(int id) const;
};

// j is adjacent to i when |x_j - x_i| <= radius and their occupied lane bands
// are identical or adjacent (the ramp band is adjacent to the target lane).
std::map<int, std::vector<int>> adjacency(const std::vector<TrafficVehicle>& vehicles,
                                          const RoadGeometry& road, double radius);

// Sorts vehicles by id, assigns lane bands, and computes adjacency.
TrafficSnapshot make_snapshot(std::vector<TrafficVehicle> vehicles,
                              const RoadGeometry& road, double radius,
                              int time_index = 0);

}  // namespace mergesim
