#include "signalbench/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "signalbench/errors.hpp"

namespace signalbench {

using nlohmann::json;

namespace {

constexpr double kDt = 1.0;
constexpr double kBusStopSnap = 1.0;  // meters from the stop at which a bus begins dwelling
constexpr double kMinWindowSpeed = 2.0;

/// Largest speed from which the vehicle can still stop behind an obstacle `gap` meters
/// ahead that itself moves at `leader_speed` and brakes at the same rate.
double safe_speed(double gap, double leader_speed, double decel) {
  const double bt = decel * kDt;
  return std::sqrt(bt * bt + leader_speed * leader_speed + 2.0 * decel * std::max(gap, 0.0)) - bt;
}

bool is_green(const SignalStateVector& s, SignalGroup g) {
  return s[index(g)] == SignalColor::Green;
}

const LaneSpec& spec_of(const NetworkConfig& net, LaneRef r) { return net.arm(r.arm).lanes[r.slot]; }

double effective_max_speed(const NetworkConfig& net, const Vehicle& v) {
  return std::min(net.vehicle_class(v.cls).max_speed, net.arm(v.from).speed_limit);
}

/// Oncoming straight/right traffic that a permissive left turn out of `arm` must yield to:
/// anything in the junction, or anything with green that reaches the stop line within
/// the left-turn clearance window.
bool oncoming_conflict(const SimState& s, Arm arm, const SignalStateVector& signals) {
  const NetworkConfig& net = *s.net;
  const Arm opp = oncoming(arm);
  const double window = net.traversal(Movement::Left);
  const bool opp_green = is_green(signals, vehicle_group(opp));
  for (const LaneTraffic& lane : s.lanes[static_cast<std::size_t>(opp)]) {
    for (const Vehicle& v : lane.vehicles) {
      if (v.movement == Movement::Left) continue;
      if (v.in_junction) return true;
      if (opp_green && v.pos <= std::max(v.speed, kMinWindowSpeed) * window) return true;
    }
  }
  return false;
}

void insert_pending(SimState& s, LaneRef ref, const SignalStateVector& signals) {
  const NetworkConfig& net = *s.net;
  LaneTraffic& lane = s.lane(ref);
  const LaneSpec& spec = spec_of(net, ref);
  while (!lane.pending.empty()) {
    const SpawnEvent& ev = lane.pending.front();
    const VehicleClass& cls = net.vehicle_class(ev.cls);
    Vehicle v;
    v.cls = ev.cls;
    v.from = ev.from;
    v.movement = ev.movement;
    v.lane = ref;
    v.pos = spec.length;
    v.spawn_time = s.t;
    double speed = effective_max_speed(net, v);
    if (!lane.vehicles.empty()) {
      const Vehicle& last = lane.vehicles.back();
      const double gap = spec.length - (last.pos + net.vehicle_class(last.cls).length) - cls.min_gap;
      if (gap < 0) break;  // entry blocked; retry next second
      speed = std::min(speed, safe_speed(gap, last.speed, cls.decel));
    }
    if (!movement_permitted(net, ref, signals)) speed = std::min(speed, safe_speed(spec.length, 0.0, cls.decel));
    v.speed = speed;
    v.id = s.next_id++;
    s.spawned[static_cast<std::size_t>(v.cls)] += 1;
    lane.vehicles.push_back(v);
    lane.pending.pop_front();
  }
}

}  // namespace

std::size_t SimState::vehicles_present() const {
  std::size_t n = 0;
  for (const auto& arm : lanes)
    for (const LaneTraffic& l : arm) n += l.vehicles.size();
  return n;
}

std::size_t SimState::vehicles_pending() const {
  std::size_t n = 0;
  for (const auto& arm : lanes)
    for (const LaneTraffic& l : arm) n += l.pending.size();
  return n;
}

std::uint64_t SimState::total_spawned() const {
  std::uint64_t n = 0;
  for (auto c : spawned) n += c;
  return n;
}

std::uint64_t SimState::total_departed() const {
  std::uint64_t n = 0;
  for (auto c : departed) n += c;
  return n;
}

SimState init(const NetworkConfig& network, std::uint64_t seed) {
  validate(network);
  SimState s;
  s.net = std::make_shared<const NetworkConfig>(network);
  for (Arm a : kAllArms)
    s.lanes[static_cast<std::size_t>(a)].resize(network.arm(a).lanes.size());
  s.rng.seed(seed);
  return s;
}

SimState init(const NetworkConfig& network, std::span<const VehicleClass> classes,
              std::uint64_t seed) {
  if (classes.size() != kNumClasses) throw ConfigError("vehicle_classes: exactly six classes required");
  NetworkConfig net = network;
  for (const VehicleClass& c : classes) net.classes[static_cast<std::size_t>(c.id)] = c;
  return init(net, seed);
}

bool movement_permitted(const NetworkConfig& net, LaneRef lane, const SignalStateVector& signals) {
  if (is_green(signals, vehicle_group(lane.arm))) return true;
  // The west left-turn lane also runs on its own arrow.
  return lane.arm == Arm::W && spec_of(net, lane).kind == LaneKind::LeftTurn &&
         is_green(signals, SignalGroup::VehWLeft);
}

bool protected_left(Arm arm, const SignalStateVector& signals) {
  return arm == Arm::W && is_green(signals, SignalGroup::VehWLeft);
}

void advance(SimState& s, const SignalStateVector& signals, std::span<const SpawnEvent> spawns) {
  const NetworkConfig& net = *s.net;
  s.signals = signals;

  // (a) insertions
  for (const SpawnEvent& ev : spawns) {
    if (ev.kind == SpawnEvent::Kind::Pedestrian) {
      Pedestrian p;
      p.id = s.next_id++;
      p.crosswalk = ev.from;
      p.reverse = ev.reverse;
      p.spawn_time = s.t;
      s.pedestrians[static_cast<std::size_t>(ev.from)].push_back(p);
      s.pedestrians_spawned += 1;
      continue;
    }
    auto ref = choose_lane(net, ev.from, ev.cls, ev.movement);
    if (!ref) throw std::invalid_argument("spawn movement not servable by any lane");
    s.lane(*ref).pending.push_back(ev);
  }
  for (Arm a : kAllArms)
    for (std::size_t i = 0; i < net.arm(a).lanes.size(); ++i) insert_pending(s, LaneRef{a, i}, signals);

  // Yield decisions use the start-of-second snapshot so lane order does not matter.
  std::array<bool, 4> must_yield{};
  for (Arm a : kAllArms)
    must_yield[static_cast<std::size_t>(a)] =
        !protected_left(a, signals) && oncoming_conflict(s, a, signals);

  // (b)-(c), (f)-(g) per lane, front to back
  for (Arm a : kAllArms) {
    const ArmSpec& arm = net.arm(a);
    for (std::size_t slot = 0; slot < arm.lanes.size(); ++slot) {
      const LaneRef ref{a, slot};
      const LaneSpec& spec = arm.lanes[slot];
      LaneTraffic& lane = s.lane(ref);
      const bool green = movement_permitted(net, ref, signals);
      const bool has_bus_stop = arm.bus_stop && spec.kind == LaneKind::SharedStraightRight;
      for (std::size_t i = 0; i < lane.vehicles.size(); ++i) {
        Vehicle& v = lane.vehicles[i];
        const VehicleClass& cls = net.vehicle_class(v.cls);
        double next = std::min(v.speed + cls.accel * kDt, effective_max_speed(net, v));
        if (i > 0) {
          const Vehicle& leader = lane.vehicles[i - 1];
          const double gap =
              v.pos - (leader.pos + net.vehicle_class(leader.cls).length) - cls.min_gap;
          next = std::min({next, safe_speed(gap, leader.speed, cls.decel), std::max(gap, 0.0) / kDt});
        }
        if (!v.in_junction) {
          const bool stop =
              !green || (v.movement == Movement::Left && must_yield[static_cast<std::size_t>(a)]);
          if (stop) next = std::min({next, safe_speed(v.pos, 0.0, cls.decel), v.pos / kDt});
          if (v.cls == VehicleClassId::Bus && has_bus_stop && !v.dwelled) {
            const double gap = v.pos - arm.bus_stop->position;
            if (gap >= 0) next = std::min({next, safe_speed(gap, 0.0, cls.decel), gap / kDt});
          }
          if (v.dwell_remaining > 0) {
            next = 0.0;
            if (--v.dwell_remaining == 0) v.dwelled = true;
          }
        }
        next = std::max(next, 0.0);
        const double old_pos = v.pos;
        v.speed = next;
        v.pos -= next * kDt;
        if (v.in_junction) {
          --v.junction_remaining;
        } else if (old_pos >= 0.0 && v.pos < 0.0) {
          v.in_junction = true;
          v.junction_remaining = net.traversal(v.movement);
        }
        if (v.cls == VehicleClassId::Bus && has_bus_stop && !v.dwelled && v.dwell_remaining == 0 &&
            !v.in_junction && v.pos - arm.bus_stop->position <= kBusStopSnap && next <= net.v_stop) {
          v.dwell_remaining = static_cast<int>(std::ceil(arm.bus_stop->dwell));
          if (v.dwell_remaining == 0) v.dwelled = true;
        }
        if (next <= net.v_stop) {
          v.stopped_time += kDt;
          s.total_vehicle_wait += kDt;
        }
      }
      // Junction occupants sit at the front, so exits come off the front in order.
      auto first_kept = std::stable_partition(lane.vehicles.begin(), lane.vehicles.end(), [](const Vehicle& v) {
        return v.in_junction && v.junction_remaining <= 0;
      });
      for (auto it = lane.vehicles.begin(); it != first_kept; ++it)
        s.departed[static_cast<std::size_t>(it->cls)] += 1;
      lane.vehicles.erase(lane.vehicles.begin(), first_kept);
    }
  }

  // (e) pedestrians
  for (Arm a : kAllArms) {
    const CrosswalkSpec& cw = net.arm(a).crosswalk;
    const bool green = is_green(signals, crosswalk_group(a));
    auto& peds = s.pedestrians[static_cast<std::size_t>(a)];
    for (Pedestrian& p : peds) {
      if (p.state == PedestrianState::Waiting) {
        if (green) {
          p.state = PedestrianState::Crossing;
        } else {
          p.wait_time += kDt;
          s.total_pedestrian_wait += kDt;
          continue;
        }
      }
      p.crossing_progress = std::min(cw.length, p.crossing_progress + cw.walking_speed * kDt);
      if (p.crossing_progress >= cw.length) p.state = PedestrianState::Done;
    }
    const auto done = std::count_if(peds.begin(), peds.end(), [](const Pedestrian& p) {
      return p.state == PedestrianState::Done;
    });
    s.pedestrians_done += static_cast<std::uint64_t>(done);
    std::erase_if(peds, [](const Pedestrian& p) { return p.state == PedestrianState::Done; });
  }

  s.t += 1;
}

const LaneObservation& Observations::at(LaneRef r) const {
  for (const LaneObservation& o : lanes)
    if (o.lane == r) return o;
  throw std::out_of_range("no observation for lane");
}

Observations lane_observations(const SimState& s, double detection_range) {
  if (!(detection_range > 0)) throw std::invalid_argument("detection_range must be > 0");
  const NetworkConfig& net = *s.net;
  Observations out;
  for (Arm a : kAllArms) {
    const ArmSpec& arm = net.arm(a);
    for (std::size_t slot = 0; slot < arm.lanes.size(); ++slot) {
      LaneObservation o;
      o.lane = LaneRef{a, slot};
      double speed_sum = 0.0;
      int n = 0;
      const Vehicle* lead = nullptr;
      for (const Vehicle& v : s.lane(o.lane).vehicles) {
        if (v.in_junction) continue;
        ++n;
        speed_sum += v.speed;
        if (v.speed <= net.v_stop) o.queue += 1.0;
        if (v.pos <= detection_range) o.wave += 1.0;
        if (!lead || v.pos < lead->pos) lead = &v;
      }
      o.avg_speed = n > 0 ? speed_sum / n : arm.speed_limit;
      o.wait_veh = lead ? lead->stopped_time : 0.0;
      out.lanes.push_back(o);
    }
    double longest = 0.0;
    for (const Pedestrian& p : s.pedestrians[static_cast<std::size_t>(a)])
      if (p.state == PedestrianState::Waiting) longest = std::max(longest, p.wait_time);
    out.wait_ped[static_cast<std::size_t>(a)] = longest;
  }
  return out;
}

json to_json(const SimState& s) {
  json lanes = json::array();
  for (Arm a : kAllArms) {
    for (std::size_t slot = 0; slot < s.lanes[static_cast<std::size_t>(a)].size(); ++slot) {
      const LaneTraffic& lane = s.lanes[static_cast<std::size_t>(a)][slot];
      json vs = json::array();
      for (const Vehicle& v : lane.vehicles)
        vs.push_back({v.id, to_string(v.cls), to_string(v.movement), v.pos, v.speed, v.stopped_time,
                      v.spawn_time, v.junction_remaining, v.in_junction, v.dwell_remaining, v.dwelled});
      json pending = json::array();
      for (const SpawnEvent& e : lane.pending)
        pending.push_back({to_string(e.cls), to_string(e.movement)});
      lanes.push_back({{"lane", s.net->arm(a).lanes[slot].id}, {"vehicles", vs}, {"pending", pending}});
    }
  }
  json peds = json::array();
  for (const auto& cw : s.pedestrians)
    for (const Pedestrian& p : cw)
      peds.push_back({p.id, to_string(p.crosswalk), p.reverse, static_cast<int>(p.state), p.wait_time,
                      p.crossing_progress, p.spawn_time});
  json signals = json::array();
  for (SignalColor c : s.signals) signals.push_back(to_string(c));
  std::ostringstream rng;
  rng << s.rng;
  return {{"t", s.t},
          {"lanes", lanes},
          {"pedestrians", peds},
          {"signals", signals},
          {"rng", rng.str()},
          {"spawned", s.spawned},
          {"departed", s.departed},
          {"pedestrians_spawned", s.pedestrians_spawned},
          {"pedestrians_done", s.pedestrians_done},
          {"total_vehicle_wait", s.total_vehicle_wait},
          {"total_pedestrian_wait", s.total_pedestrian_wait},
          {"next_id", s.next_id}};
}

}  // namespace signalbench
