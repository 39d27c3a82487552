#pragma once

// Deterministic one-second microscopic simulator of the four-arm intersection.

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "signalbench/network.hpp"
#include "signalbench/signals.hpp"

namespace signalbench {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct SpawnEvent {
  enum class Kind { Vehicle, Pedestrian };
  Kind kind = Kind::Vehicle;
  VehicleClassId cls = VehicleClassId::Car;
  Arm from = Arm::W;  // vehicles: entry arm; pedestrians: arm whose crosswalk they use
  Movement movement = Movement::Straight;
  bool reverse = false;  // pedestrians: walking direction along the crosswalk

  static SpawnEvent vehicle(VehicleClassId c, Arm from, Movement m) {
    return {Kind::Vehicle, c, from, m, false};
  }
  static SpawnEvent pedestrian(Arm crosswalk, bool reverse = false) {
    return {Kind::Pedestrian, VehicleClassId::Car, crosswalk, Movement::Straight, reverse};
  }
  friend bool operator==(const SpawnEvent&, const SpawnEvent&) = default;
};

struct Vehicle {
  std::uint64_t id = 0;
  VehicleClassId cls = VehicleClassId::Car;
  Arm from = Arm::W;
  Movement movement = Movement::Straight;
  LaneRef lane;
  double pos = 0.0;  // meters upstream of the stop line; negative inside the junction
  double speed = 0.0;
  double stopped_time = 0.0;
  int spawn_time = 0;
  int junction_remaining = 0;  // seconds left in the junction; 0 while on the approach
  bool in_junction = false;
  int dwell_remaining = 0;
  bool dwelled = false;
};

enum class PedestrianState { Waiting, Crossing, Done };

struct Pedestrian {
  std::uint64_t id = 0;
  Arm crosswalk = Arm::W;
  bool reverse = false;
  PedestrianState state = PedestrianState::Waiting;
  double wait_time = 0.0;
  double crossing_progress = 0.0;
  int spawn_time = 0;
};

struct LaneTraffic {
  std::vector<Vehicle> vehicles;  // front (closest to / past the stop line) first
  std::deque<SpawnEvent> pending;  // deferred insertions, FIFO
};

struct SimState {
  std::shared_ptr<const NetworkConfig> net;
  int t = 0;
  std::array<std::vector<LaneTraffic>, 4> lanes;  // [arm][slot]
  std::array<std::vector<Pedestrian>, 4> pedestrians;  // per crosswalk arm
  SignalStateVector signals = all_red();
  Rng rng;
  std::array<std::uint64_t, kNumClasses> spawned{};
  std::array<std::uint64_t, kNumClasses> departed{};
  std::uint64_t pedestrians_spawned = 0;
  std::uint64_t pedestrians_done = 0;
  double total_vehicle_wait = 0.0;  // vehicle-seconds at or below v_stop
  double total_pedestrian_wait = 0.0;
  std::uint64_t next_id = 1;

  LaneTraffic& lane(LaneRef r) { return lanes[static_cast<std::size_t>(r.arm)][r.slot]; }
  const LaneTraffic& lane(LaneRef r) const {
    return lanes[static_cast<std::size_t>(r.arm)][r.slot];
  }
  std::size_t vehicles_present() const;
  std::size_t vehicles_pending() const;
  std::uint64_t total_spawned() const;
  std::uint64_t total_departed() const;
};

/// Empty network at t = 0. Throws ConfigError on an invalid network.
SimState init(const NetworkConfig& network, std::uint64_t seed);
SimState init(const NetworkConfig& network, std::span<const VehicleClass> classes,
              std::uint64_t seed);

/// Applies one second of motion under `signals`, inserting `spawns` first.
void advance(SimState& state, const SignalStateVector& signals,
             std::span<const SpawnEvent> spawns);

/// True when the signals let vehicles on `lane` cross the stop line this second.
bool movement_permitted(const NetworkConfig& net, LaneRef lane, const SignalStateVector& signals);
/// True when the movement runs on a protected (non-yielding) left arrow.
bool protected_left(Arm arm, const SignalStateVector& signals);

struct LaneObservation {
  LaneRef lane;
  double queue = 0.0;
  double wave = 0.0;
  double avg_speed = 0.0;
  double wait_veh = 0.0;
};

struct Observations {
  std::vector<LaneObservation> lanes;  // arm order, then lane slot order
  std::array<double, 4> wait_ped{};    // per crosswalk, arm order

  const LaneObservation& at(LaneRef r) const;
};

Observations lane_observations(const SimState& state, double detection_range);

/// Full state dump used for determinism comparisons.
nlohmann::json to_json(const SimState& state);

}  // namespace signalbench
