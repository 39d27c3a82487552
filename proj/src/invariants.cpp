#include "signalbench/invariants.hpp"

#include <algorithm>
#include <cmath>

namespace signalbench {

namespace {
constexpr double kTol = 1e-9;
constexpr std::size_t kMaxExamples = 20;
}  // namespace

std::uint64_t ViolationCounts::total() const {
  return conflicting_green + intergreen + color_sequence + min_green + phase_row + conservation +
         collision + red_light + speed + pedestrian + waiting_time;
}

InvariantMonitor::InvariantMonitor(const NetworkConfig& net, const TsluConfig& tslu)
    : net_(net), tslu_(tslu) {}

void InvariantMonitor::reset() {
  counts_ = {};
  examples_.clear();
  intergreen_checks_ = 0;
  prev_colors_.reset();
  run_length_.fill(0);
  green_end_.fill(std::nullopt);
  vehicles_.clear();
  crossing_.clear();
}

void InvariantMonitor::flag(std::uint64_t& counter, int t, std::string what) {
  ++counter;
  if (examples_.size() < kMaxExamples) examples_.push_back({t, std::move(what)});
}

void InvariantMonitor::observe_signals(int second, const SignalStateVector& colors,
                                       bool in_transition, int active_phase) {
  using C = SignalColor;
  const auto name = [](SignalGroup g) { return std::string(to_string(g)); };

  for (auto [a, b] : tslu_.conflicts.pairs())
    if (colors[index(a)] == C::Green && colors[index(b)] == C::Green)
      flag(counts_.conflicting_green, second, "conflicting green " + name(a) + "/" + name(b));

  if (!in_transition && colors != tslu_.phases.colors(active_phase))
    flag(counts_.phase_row, second, "steady phase " + std::to_string(active_phase) + " differs from its row");

  const SignalStateVector prev = prev_colors_.value_or(all_red());
  for (SignalGroup g : kAllGroups) {
    const std::size_t i = index(g);
    const C was = prev[i];
    const C now = colors[i];
    const bool vehicle = kind_of(g) == GroupKind::Vehicle;
    if (was != now) {
      bool legal;
      if (vehicle) {
        legal = (was == C::Red && now == C::RedYellow) ||
                (was == C::RedYellow && now == C::Green && run_length_[i] == tslu_.timing.red_yellow) ||
                (was == C::Green && now == C::Yellow) ||
                (was == C::Yellow && now == C::Red && run_length_[i] == tslu_.timing.yellow);
      } else {
        legal = (was == C::Red && now == C::Green) || (was == C::Green && now == C::Red);
      }
      if (!legal)
        flag(counts_.color_sequence, second,
             name(g) + " " + std::string(to_string(was)) + "->" + std::string(to_string(now)));
      if (was == C::Green) {
        if (run_length_[i] < tslu_.timing.min_green[i])
          flag(counts_.min_green, second, name(g) + " green for only " + std::to_string(run_length_[i]) + " s");
        green_end_[i] = second;
      }
      // Audited when the entering group leaves red (red_yellow or green).
      if (was == C::Red) {
        for (SignalGroup c : kAllGroups) {
          if (!tslu_.conflicts.conflicts(c, g)) continue;
          ++intergreen_checks_;
          if (prev[index(c)] == C::Green || colors[index(c)] == C::Green) {
            flag(counts_.intergreen, second, name(g) + " left red while " + name(c) + " green");
            continue;
          }
          if (green_end_[index(c)] && second - *green_end_[index(c)] < tslu_.intergreen.at(c, g))
            flag(counts_.intergreen, second,
                 name(c) + "->" + name(g) + " gap " + std::to_string(second - *green_end_[index(c)]) +
                     " s < " + std::to_string(tslu_.intergreen.at(c, g)) + " s");
        }
      }
      run_length_[i] = 1;
    } else {
      ++run_length_[i];
    }
  }
  prev_colors_ = colors;
}

void InvariantMonitor::observe_sim(const SimState& s, const SignalStateVector& signals) {
  if (s.total_spawned() != s.total_departed() + s.vehicles_present())
    flag(counts_.conservation, s.t, "spawned != departed + present");

  std::unordered_map<std::uint64_t, Seen> seen;
  for (Arm a : kAllArms) {
    const ArmSpec& arm = net_.arm(a);
    for (std::size_t slot = 0; slot < arm.lanes.size(); ++slot) {
      const LaneRef ref{a, slot};
      const auto& vs = s.lane(ref).vehicles;
      for (std::size_t i = 0; i < vs.size(); ++i) {
        const Vehicle& v = vs[i];
        const VehicleClass& cls = net_.vehicle_class(v.cls);
        if (i > 0) {
          const Vehicle& lead = vs[i - 1];
          if (lead.pos + net_.vehicle_class(lead.cls).length + cls.min_gap > v.pos + kTol)
            flag(counts_.collision, s.t, "gap violation on lane " + arm.lanes[slot].id);
        }
        const double vmax = std::min(cls.max_speed, arm.speed_limit);
        if (v.speed < 0 || v.speed > vmax + kTol) flag(counts_.speed, s.t, "speed out of bounds");
        if (auto it = vehicles_.find(v.id); it != vehicles_.end()) {
          if (it->second.pos >= 0 && v.pos < 0 && !movement_permitted(net_, ref, signals))
            flag(counts_.red_light, s.t, "vehicle crossed stop line without green on " + arm.lanes[slot].id);
          if (v.stopped_time < it->second.stopped_time)
            flag(counts_.waiting_time, s.t, "stopped_time decreased");
        }
        seen.emplace(v.id, Seen{v.pos, v.stopped_time});
      }
    }
  }
  vehicles_ = std::move(seen);

  std::unordered_map<std::uint64_t, double> crossing;
  for (Arm a : kAllArms) {
    const CrosswalkSpec& cw = net_.arm(a).crosswalk;
    for (const Pedestrian& p : s.pedestrians[static_cast<std::size_t>(a)]) {
      if (p.crossing_progress < 0 || p.crossing_progress > cw.length + kTol)
        flag(counts_.pedestrian, s.t, "crossing progress out of range");
      if (p.state != PedestrianState::Crossing) continue;
      if (auto it = crossing_.find(p.id);
          it != crossing_.end() && std::abs(p.crossing_progress - it->second - cw.walking_speed) > kTol)
        flag(counts_.pedestrian, s.t, "crossing progress did not advance at walking speed");
      crossing.emplace(p.id, p.crossing_progress);
    }
  }
  crossing_ = std::move(crossing);
}

}  // namespace signalbench
