#include "mergesim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mergesim {

const TrafficVehicle& TrafficSnapshot::vehicle(int id) const {
  const int idx = index_of(id);
  if (idx < 0) throw std::invalid_argument("unknown vehicle id " + std::to_string(id));
  return vehicles[idx];
}

int TrafficSnapshot::index_of(int id) const {
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    if (vehicles[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

const std::vector<int>& TrafficSnapshot::neighbors(int id) const {
  auto it = adjacency.find(id);
  if (it == adjacency.end())
    throw std::invalid_argument("unknown vehicle id " + std::to_string(id));
  return it->second;
}

namespace {

bool bands_adjacent(const LaneSet& a, const LaneSet& b) {
  return a.low <= b.high + 1 && b.low <= a.high + 1;
}

}  // namespace

std::map<int, std::vector<int>> adjacency(const std::vector<TrafficVehicle>& vehicles,
                                          const RoadGeometry& road, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("adjacency radius must be > 0");
  std::map<int, std::vector<int>> result;
  for (const TrafficVehicle& v : vehicles) result[v.id];
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const LaneSet li = occupied_bands(vehicles[i].state.y, road);
    for (std::size_t j = i + 1; j < vehicles.size(); ++j) {
      if (std::abs(vehicles[j].state.x - vehicles[i].state.x) > radius) continue;
      const LaneSet lj = occupied_bands(vehicles[j].state.y, road);
      if (!bands_adjacent(li, lj)) continue;
      result[vehicles[i].id].push_back(vehicles[j].id);
      result[vehicles[j].id].push_back(vehicles[i].id);
    }
  }
  for (auto& [id, list] : result) std::sort(list.begin(), list.end());
  return result;
}

TrafficSnapshot make_snapshot(std::vector<TrafficVehicle> vehicles,
                              const RoadGeometry& road, double radius,
                              int time_index) {
  std::sort(vehicles.begin(), vehicles.end(),
            [](const TrafficVehicle& a, const TrafficVehicle& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < vehicles.size(); ++i) {
    if (vehicles[i].id == vehicles[i - 1].id)
      throw std::invalid_argument("duplicate vehicle id " + std::to_string(vehicles[i].id));
  }
  TrafficSnapshot snap;
  snap.time_index = time_index;
  snap.lanes.reserve(vehicles.size());
  for (const TrafficVehicle& v : vehicles) {
    snap.lanes.push_back(occupied_bands(v.state.y, road));
  }
  snap.adjacency = adjacency(vehicles, road, radius);
  snap.vehicles = std::move(vehicles);
  return snap;
}

}  // namespace mergesim
