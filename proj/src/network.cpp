#include "signalbench/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json_util.hpp"
#include "signalbench/errors.hpp"

namespace signalbench {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 4> kArmNames = {"W", "E", "N", "S"};
constexpr std::array<std::string_view, 3> kMovementNames = {"left", "straight", "right"};
constexpr std::array<std::string_view, 3> kLaneKindNames = {"shared_straight_right",
                                                            "left_turn", "bike"};
constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "car", "motorcycle", "truck", "truck_trailer", "bus", "bicycle"};

template <typename E, std::size_t N>
std::optional<E> parse_name(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<E>(i);
  return std::nullopt;
}

std::vector<Movement> movements_for(LaneKind k) {
  switch (k) {
    case LaneKind::LeftTurn:
      return {Movement::Left};
    case LaneKind::SharedStraightRight:
      return {Movement::Straight, Movement::Right};
    case LaneKind::Bike:
      return {Movement::Left, Movement::Straight, Movement::Right};
  }
  return {};
}

}  // namespace

std::string_view to_string(Arm a) { return kArmNames[static_cast<std::size_t>(a)]; }
std::string_view to_string(Movement m) { return kMovementNames[static_cast<std::size_t>(m)]; }
std::string_view to_string(LaneKind k) { return kLaneKindNames[static_cast<std::size_t>(k)]; }
std::string_view to_string(VehicleClassId c) { return kClassNames[static_cast<std::size_t>(c)]; }

std::optional<Arm> parse_arm(std::string_view s) { return parse_name<Arm>(kArmNames, s); }
std::optional<Movement> parse_movement(std::string_view s) {
  return parse_name<Movement>(kMovementNames, s);
}
std::optional<LaneKind> parse_lane_kind(std::string_view s) {
  return parse_name<LaneKind>(kLaneKindNames, s);
}
std::optional<VehicleClassId> parse_vehicle_class(std::string_view s) {
  return parse_name<VehicleClassId>(kClassNames, s);
}

Arm oncoming(Arm a) {
  switch (a) {
    case Arm::W: return Arm::E;
    case Arm::E: return Arm::W;
    case Arm::N: return Arm::S;
    case Arm::S: return Arm::N;
  }
  return a;
}

Arm destination(Arm from, Movement m) {
  // Right-hand traffic. A vehicle from the west heads east; turning left it goes north.
  switch (from) {
    case Arm::W:
      return m == Movement::Straight ? Arm::E : m == Movement::Left ? Arm::N : Arm::S;
    case Arm::E:
      return m == Movement::Straight ? Arm::W : m == Movement::Left ? Arm::S : Arm::N;
    case Arm::N:
      return m == Movement::Straight ? Arm::S : m == Movement::Left ? Arm::E : Arm::W;
    case Arm::S:
      return m == Movement::Straight ? Arm::N : m == Movement::Left ? Arm::W : Arm::E;
  }
  return from;
}

std::optional<Movement> movement_between(Arm from, Arm to) {
  for (Movement m : {Movement::Left, Movement::Straight, Movement::Right})
    if (destination(from, m) == to) return m;
  return std::nullopt;
}

bool LaneSpec::allows(Movement m) const {
  return std::find(allowed_movements.begin(), allowed_movements.end(), m) !=
         allowed_movements.end();
}

SignalGroup vehicle_group(Arm a) {
  switch (a) {
    case Arm::W: return SignalGroup::VehW;
    case Arm::E: return SignalGroup::VehE;
    case Arm::N: return SignalGroup::VehN;
    case Arm::S: return SignalGroup::VehS;
  }
  return SignalGroup::VehW;
}

SignalGroup crosswalk_group(Arm a) {
  return (a == Arm::W || a == Arm::E) ? SignalGroup::PedWE : SignalGroup::PedNS;
}

std::optional<LaneRef> choose_lane(const NetworkConfig& net, Arm arm, VehicleClassId cls,
                                   Movement m) {
  const auto& lanes = net.arm(arm).lanes;
  auto find_kind = [&](LaneKind k) -> std::optional<LaneRef> {
    for (std::size_t i = 0; i < lanes.size(); ++i)
      if (lanes[i].kind == k && lanes[i].allows(m)) return LaneRef{arm, i};
    return std::nullopt;
  };
  if (cls == VehicleClassId::Bicycle)
    if (auto bike = find_kind(LaneKind::Bike)) return bike;
  return find_kind(m == Movement::Left ? LaneKind::LeftTurn : LaneKind::SharedStraightRight);
}

std::array<VehicleClass, kNumClasses> default_vehicle_classes() {
  return {{
      {VehicleClassId::Car, 5.0, 13.9, 2.6, 4.5, 2.5},
      {VehicleClassId::Motorcycle, 2.5, 13.9, 3.0, 5.0, 2.5},
      {VehicleClassId::Truck, 10.0, 11.0, 1.3, 3.5, 2.5},
      {VehicleClassId::TruckTrailer, 16.0, 11.0, 1.0, 3.5, 2.5},
      {VehicleClassId::Bus, 12.0, 11.0, 1.2, 3.5, 2.5},
      {VehicleClassId::Bicycle, 1.8, 5.5, 1.0, 2.0, 1.0},
  }};
}

void validate(const NetworkConfig& net) {
  for (Arm a : kAllArms) {
    const ArmSpec& arm = net.arm(a);
    const std::string ctx = "arms[" + std::string(to_string(a)) + "]";
    if (arm.id != a) throw ConfigError(ctx + ".id: arm stored in wrong slot");
    if (!(arm.approach_length > 0)) throw ConfigError(ctx + ".approach_length: must be > 0");
    if (!(arm.speed_limit > 0)) throw ConfigError(ctx + ".speed_limit: must be > 0");
    int shared = 0, left = 0, bike = 0;
    std::set<std::string> ids;
    for (const LaneSpec& lane : arm.lanes) {
      const std::string lctx = ctx + ".lanes[" + lane.id + "]";
      if (lane.id.empty() || !ids.insert(lane.id).second)
        throw ConfigError(lctx + ".id: empty or duplicate lane id");
      if (!(lane.length > 0)) throw ConfigError(lctx + ".length: must be > 0");
      if (lane.waiting_area_offset < 0)
        throw ConfigError(lctx + ".waiting_area_offset: must be >= 0");
      auto expected = movements_for(lane.kind);
      auto got = lane.allowed_movements;
      std::sort(got.begin(), got.end());
      if (got != expected)
        throw ConfigError(lctx + ".allowed_movements: inconsistent with lane kind " +
                          std::string(to_string(lane.kind)));
      shared += lane.kind == LaneKind::SharedStraightRight;
      left += lane.kind == LaneKind::LeftTurn;
      bike += lane.kind == LaneKind::Bike;
    }
    if (shared != 1 || left != 1)
      throw ConfigError(ctx + ".lanes: exactly one shared_straight_right and one left_turn lane "
                              "required");
    const bool ns = a == Arm::N || a == Arm::S;
    if (ns && bike != 1) throw ConfigError(ctx + ".lanes: N and S arms require one bike lane");
    if (!ns && bike != 0)
      throw ConfigError(ctx + ".lanes: W and E arms route bicycles on the shared lane");
    if (!(arm.crosswalk.length > 0)) throw ConfigError(ctx + ".crosswalk.length: must be > 0");
    if (!(arm.crosswalk.walking_speed > 0))
      throw ConfigError(ctx + ".crosswalk.walking_speed: must be > 0");
    if (arm.bus_stop) {
      if (!(arm.bus_stop->position > 0 && arm.bus_stop->position < arm.approach_length))
        throw ConfigError(ctx + ".bus_stop.position: must lie on the approach");
      if (arm.bus_stop->dwell < 0) throw ConfigError(ctx + ".bus_stop.dwell: must be >= 0");
    }
  }
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    const VehicleClass& c = net.classes[i];
    const std::string ctx = "vehicle_classes[" + std::string(to_string(c.id)) + "]";
    if (static_cast<std::size_t>(c.id) != i) throw ConfigError(ctx + ": class stored in wrong slot");
    if (!(c.length > 0 && c.max_speed > 0 && c.accel > 0 && c.decel > 0 && c.min_gap > 0))
      throw ConfigError(ctx + ": all physical attributes must be > 0");
  }
  if (!(net.v_stop > 0)) throw ConfigError("v_stop: must be > 0");
  if (!(net.detection_range > 0)) throw ConfigError("detection_range: must be > 0");
  for (int t : net.traversal_time)
    if (t < 1) throw ConfigError("traversal_time: must be >= 1 s");
  for (const BusLine& line : net.bus_timetable) {
    for (int off : line.offsets)
      if (off < 0) throw ConfigError("bus_timetable.offsets: must be >= 0");
    if (!choose_lane(net, line.arm, VehicleClassId::Bus, line.movement))
      throw ConfigError("bus_timetable.movement: not servable from arm " +
                        std::string(to_string(line.arm)));
  }
}

NetworkConfig network_from_json(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("network: expected an object");
  only_keys(j, {"arms", "vehicle_classes", "v_stop", "detection_range", "traversal_time",
                "bus_timetable", "comment"},
            "network");
  NetworkConfig net;
  const json& arms = field(j, "arms", "network");
  if (!arms.is_array() || arms.size() != 4) throw ConfigError("arms: exactly 4 arms required");
  std::array<bool, 4> seen{};
  for (const json& ja : arms) {
    only_keys(ja, {"id", "approach_length", "speed_limit", "lanes", "crosswalk", "bus_stop"},
              "arms[]");
    const std::string id = text(ja, "id", "arms[]");
    auto arm_id = parse_arm(id);
    if (!arm_id) throw ConfigError("arms[].id: unknown arm '" + id + "'");
    const auto slot = static_cast<std::size_t>(*arm_id);
    if (seen[slot]) throw ConfigError("arms[].id: duplicate arm '" + id + "'");
    seen[slot] = true;
    const std::string ctx = "arms[" + id + "]";
    ArmSpec arm;
    arm.id = *arm_id;
    arm.approach_length = number(ja, "approach_length", ctx);
    arm.speed_limit = number(ja, "speed_limit", ctx);
    const json& lanes = field(ja, "lanes", ctx);
    if (!lanes.is_array()) throw ConfigError(ctx + ".lanes: expected an array");
    for (const json& jl : lanes) {
      only_keys(jl, {"id", "kind", "length", "waiting_area_offset", "allowed_movements"},
                ctx + ".lanes[]");
      LaneSpec lane;
      lane.id = text(jl, "id", ctx + ".lanes[]");
      const std::string lctx = ctx + ".lanes[" + lane.id + "]";
      const std::string kind = text(jl, "kind", lctx);
      auto k = parse_lane_kind(kind);
      if (!k) throw ConfigError(lctx + ".kind: unknown lane kind '" + kind + "'");
      lane.kind = *k;
      lane.waiting_area_offset = number_or(jl, "waiting_area_offset", 0.0, lctx);
      lane.length = number_or(jl, "length", arm.approach_length + lane.waiting_area_offset, lctx);
      if (jl.contains("allowed_movements")) {
        const json& mv = jl["allowed_movements"];
        if (!mv.is_array()) throw ConfigError(lctx + ".allowed_movements: expected an array");
        for (const json& m : mv) {
          auto parsed = m.is_string() ? parse_movement(m.get<std::string>()) : std::nullopt;
          if (!parsed) throw ConfigError(lctx + ".allowed_movements: unknown movement");
          lane.allowed_movements.push_back(*parsed);
        }
      } else {
        lane.allowed_movements = movements_for(lane.kind);
      }
      arm.lanes.push_back(std::move(lane));
    }
    const json& cw = field(ja, "crosswalk", ctx);
    only_keys(cw, {"id", "length", "walking_speed"}, ctx + ".crosswalk");
    arm.crosswalk.id = text(cw, "id", ctx + ".crosswalk");
    arm.crosswalk.length = number(cw, "length", ctx + ".crosswalk");
    arm.crosswalk.walking_speed = number_or(cw, "walking_speed", 1.2, ctx + ".crosswalk");
    if (ja.contains("bus_stop") && !ja["bus_stop"].is_null()) {
      const json& bs = ja["bus_stop"];
      only_keys(bs, {"position", "dwell"}, ctx + ".bus_stop");
      arm.bus_stop = BusStop{number(bs, "position", ctx + ".bus_stop"),
                             number(bs, "dwell", ctx + ".bus_stop")};
    }
    net.arms[slot] = std::move(arm);
  }

  net.classes = default_vehicle_classes();
  if (j.contains("vehicle_classes")) {
    const json& jc = j["vehicle_classes"];
    if (!jc.is_array() || jc.size() != kNumClasses)
      throw ConfigError("vehicle_classes: exactly six classes required");
    std::array<bool, kNumClasses> have{};
    for (const json& c : jc) {
      only_keys(c, {"name", "length", "max_speed", "accel", "decel", "min_gap"},
                "vehicle_classes[]");
      const std::string name = text(c, "name", "vehicle_classes[]");
      auto id = parse_vehicle_class(name);
      if (!id) throw ConfigError("vehicle_classes[].name: unknown class '" + name + "'");
      const auto slot = static_cast<std::size_t>(*id);
      if (have[slot]) throw ConfigError("vehicle_classes[].name: duplicate class '" + name + "'");
      have[slot] = true;
      const std::string ctx = "vehicle_classes[" + name + "]";
      net.classes[slot] = {*id,
                           number(c, "length", ctx),
                           number(c, "max_speed", ctx),
                           number(c, "accel", ctx),
                           number(c, "decel", ctx),
                           number(c, "min_gap", ctx)};
    }
  }
  net.v_stop = number_or(j, "v_stop", net.v_stop, "network");
  net.detection_range = number_or(j, "detection_range", net.detection_range, "network");
  if (j.contains("traversal_time")) {
    const json& tt = j["traversal_time"];
    only_keys(tt, {"left", "straight", "right"}, "traversal_time");
    net.traversal_time = {integer(tt, "left", "traversal_time"),
                          integer(tt, "straight", "traversal_time"),
                          integer(tt, "right", "traversal_time")};
  }
  if (j.contains("bus_timetable")) {
    for (const json& jb : j["bus_timetable"]) {
      only_keys(jb, {"arm", "movement", "offsets"}, "bus_timetable[]");
      BusLine line;
      const std::string arm = text(jb, "arm", "bus_timetable[]");
      auto a = parse_arm(arm);
      if (!a) throw ConfigError("bus_timetable[].arm: unknown arm '" + arm + "'");
      line.arm = *a;
      const std::string mv = jb.contains("movement") ? text(jb, "movement", "bus_timetable[]")
                                                     : std::string("straight");
      auto m = parse_movement(mv);
      if (!m) throw ConfigError("bus_timetable[].movement: unknown movement '" + mv + "'");
      line.movement = *m;
      const json& offs = field(jb, "offsets", "bus_timetable[]");
      if (!offs.is_array()) throw ConfigError("bus_timetable[].offsets: expected an array");
      for (const json& o : offs) {
        if (!o.is_number_integer())
          throw ConfigError("bus_timetable[].offsets: expected integer seconds");
        line.offsets.push_back(o.get<int>());
      }
      std::sort(line.offsets.begin(), line.offsets.end());
      net.bus_timetable.push_back(std::move(line));
    }
  }
  validate(net);
  return net;
}

NetworkConfig load_network(const std::filesystem::path& path) {
  try {
    return network_from_json(detail::read_json_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const NetworkConfig& net) {
  json arms = json::array();
  for (const ArmSpec& a : net.arms) {
    json lanes = json::array();
    for (const LaneSpec& l : a.lanes) {
      json mv = json::array();
      for (Movement m : l.allowed_movements) mv.push_back(to_string(m));
      lanes.push_back({{"id", l.id},
                       {"kind", to_string(l.kind)},
                       {"length", l.length},
                       {"waiting_area_offset", l.waiting_area_offset},
                       {"allowed_movements", mv}});
    }
    json ja = {{"id", to_string(a.id)},
               {"approach_length", a.approach_length},
               {"speed_limit", a.speed_limit},
               {"lanes", lanes},
               {"crosswalk",
                {{"id", a.crosswalk.id},
                 {"length", a.crosswalk.length},
                 {"walking_speed", a.crosswalk.walking_speed}}}};
    if (a.bus_stop)
      ja["bus_stop"] = {{"position", a.bus_stop->position}, {"dwell", a.bus_stop->dwell}};
    arms.push_back(ja);
  }
  json classes = json::array();
  for (const VehicleClass& c : net.classes)
    classes.push_back({{"name", to_string(c.id)},
                       {"length", c.length},
                       {"max_speed", c.max_speed},
                       {"accel", c.accel},
                       {"decel", c.decel},
                       {"min_gap", c.min_gap}});
  json buses = json::array();
  for (const BusLine& b : net.bus_timetable)
    buses.push_back(
        {{"arm", to_string(b.arm)}, {"movement", to_string(b.movement)}, {"offsets", b.offsets}});
  return {{"arms", arms},
          {"vehicle_classes", classes},
          {"v_stop", net.v_stop},
          {"detection_range", net.detection_range},
          {"traversal_time",
           {{"left", net.traversal_time[0]},
            {"straight", net.traversal_time[1]},
            {"right", net.traversal_time[2]}}},
          {"bus_timetable", buses}};
}

}  // namespace signalbench
