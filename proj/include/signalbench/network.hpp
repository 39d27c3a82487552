#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "signalbench/signals.hpp"

namespace signalbench {

enum class Arm : std::size_t { W, E, N, S };
inline constexpr std::array<Arm, 4> kAllArms = {Arm::W, Arm::E, Arm::N, Arm::S};

enum class Movement { Left, Straight, Right };

enum class LaneKind { SharedStraightRight, LeftTurn, Bike };

std::string_view to_string(Arm a);
std::string_view to_string(Movement m);
std::string_view to_string(LaneKind k);
std::optional<Arm> parse_arm(std::string_view s);
std::optional<Movement> parse_movement(std::string_view s);
std::optional<LaneKind> parse_lane_kind(std::string_view s);

/// Arm facing `a` across the junction.
Arm oncoming(Arm a);
/// Arm a vehicle leaves through after performing `m` from `from` (right-hand traffic).
Arm destination(Arm from, Movement m);
/// Inverse of destination(); nullopt for a U-turn.
std::optional<Movement> movement_between(Arm from, Arm to);

struct LaneSpec {
  std::string id;
  LaneKind kind = LaneKind::SharedStraightRight;
  double length = 0.0;  // meters from arm entry to stop line
  double waiting_area_offset = 0.0;  // bike lanes: stop line ahead of the vehicle stop line
  std::vector<Movement> allowed_movements;

  bool allows(Movement m) const;
};

struct CrosswalkSpec {
  std::string id;
  double length = 0.0;
  double walking_speed = 1.2;
};

struct BusStop {
  double position = 0.0;  // meters upstream of the stop line
  double dwell = 0.0;     // seconds
};

struct ArmSpec {
  Arm id = Arm::W;
  double approach_length = 0.0;
  double speed_limit = 0.0;
  std::vector<LaneSpec> lanes;
  CrosswalkSpec crosswalk;
  std::optional<BusStop> bus_stop;
};

enum class VehicleClassId : std::size_t { Car, Motorcycle, Truck, TruckTrailer, Bus, Bicycle };
inline constexpr std::size_t kNumClasses = 6;

std::string_view to_string(VehicleClassId c);
std::optional<VehicleClassId> parse_vehicle_class(std::string_view s);

struct VehicleClass {
  VehicleClassId id = VehicleClassId::Car;
  double length = 0.0;
  double max_speed = 0.0;
  double accel = 0.0;
  double decel = 0.0;
  double min_gap = 0.0;
};

struct BusLine {
  Arm arm = Arm::W;
  Movement movement = Movement::Straight;
  std::vector<int> offsets;  // departure seconds within the episode
};

struct NetworkConfig {
  std::array<ArmSpec, 4> arms;  // indexed by Arm
  std::array<VehicleClass, kNumClasses> classes;
  double v_stop = 0.5;
  double detection_range = 100.0;
  std::array<int, 3> traversal_time = {4, 3, 2};  // indexed by Movement
  std::vector<BusLine> bus_timetable;

  const ArmSpec& arm(Arm a) const { return arms[static_cast<std::size_t>(a)]; }
  const VehicleClass& vehicle_class(VehicleClassId c) const {
    return classes[static_cast<std::size_t>(c)];
  }
  int traversal(Movement m) const { return traversal_time[static_cast<std::size_t>(m)]; }
};

/// Stable lane handle: arm plus position in the arm's lane list.
struct LaneRef {
  Arm arm = Arm::W;
  std::size_t slot = 0;
  friend bool operator==(const LaneRef&, const LaneRef&) = default;
};

/// Lane a vehicle of `cls` performing `m` from `arm` is assigned to.
std::optional<LaneRef> choose_lane(const NetworkConfig& net, Arm arm, VehicleClassId cls,
                                   Movement m);

/// Signal groups that permit the movement out of `arm`. The W left lane is additionally
/// served (protected) by veh_w_left.
SignalGroup vehicle_group(Arm a);
SignalGroup crosswalk_group(Arm a);

/// The conventional defaults used when a config file omits vehicle classes.
std::array<VehicleClass, kNumClasses> default_vehicle_classes();

/// Parse and validate. Throws ConfigError naming the offending field.
NetworkConfig network_from_json(const nlohmann::json& j);
NetworkConfig load_network(const std::filesystem::path& path);
nlohmann::json to_json(const NetworkConfig& net);

/// Throws ConfigError if any type invariant is violated.
void validate(const NetworkConfig& net);

}  // namespace signalbench
