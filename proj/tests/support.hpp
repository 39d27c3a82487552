#pragma once

// Shared fixtures for the test binaries.

#include <stdexcept>
#include <vector>

#include "signalbench/env.hpp"
#include "signalbench/sim.hpp"
#include "signalbench/tslu.hpp"

namespace sbt {

namespace sb = signalbench;

inline const sb::EnvConfig& shipped() {
  static const sb::EnvConfig cfg = sb::default_env_config();
  return cfg;
}

inline sb::EnvConfig zero_demand() {
  sb::EnvConfig cfg = shipped();
  cfg.counts.rows.clear();
  cfg.net.bus_timetable.clear();
  return cfg;
}

inline sb::LaneRef lane(sb::Arm a, sb::LaneKind kind) {
  const auto& lanes = shipped().net.arm(a).lanes;
  for (std::size_t i = 0; i < lanes.size(); ++i)
    if (lanes[i].kind == kind) return {a, i};
  throw std::logic_error("no such lane");
}

inline sb::Vehicle& place(sb::SimState& s, sb::LaneRef where, sb::VehicleClassId cls, double pos,
                          double speed, sb::Movement m = sb::Movement::Straight) {
  sb::Vehicle v;
  v.id = s.next_id++;
  v.cls = cls;
  v.from = where.arm;
  v.movement = m;
  v.lane = where;
  v.pos = pos;
  v.speed = speed;
  v.spawn_time = s.t;
  s.spawned[static_cast<std::size_t>(cls)] += 1;
  auto& vs = s.lane(where).vehicles;
  vs.push_back(v);
  return vs.back();
}

inline sb::SignalStateVector with_green(std::initializer_list<sb::SignalGroup> groups) {
  sb::SignalStateVector v = sb::all_red();
  for (auto g : groups) v[sb::index(g)] = sb::SignalColor::Green;
  return v;
}

/// Ticks the controller until the pending transition completes. Returns the
/// colors shown at each tick.
inline std::vector<sb::SignalStateVector> settle(sb::ControllerState& c, const sb::TsluConfig& cfg,
                                                 int limit = 60) {
  std::vector<sb::SignalStateVector> trace;
  while (c.in_transition) {
    if (static_cast<int>(trace.size()) >= limit) throw std::runtime_error("transition did not settle");
    trace.push_back(sb::tick(c, cfg));
  }
  return trace;
}

/// Controller resting in `phase` for `hold` steady seconds, reached from phase 1
/// (through phase 4 for phase 5).
inline sb::ControllerState reach(const sb::TsluConfig& cfg, int phase, int hold = 0) {
  sb::ControllerState c = sb::initial_controller();
  const auto go = [&](int p) {
    if (!sb::request_phase(c, cfg, p).accepted) throw std::logic_error("setup wish refused");
    settle(c, cfg);
  };
  if (phase == 5) {
    go(4);
    while (c.phase_time < cfg.timing.phase5_clearance_wait) sb::tick(c, cfg);
  }
  if (phase != 1) go(phase);
  for (int i = 0; i < hold; ++i) sb::tick(c, cfg);
  return c;
}

}  // namespace sbt
