#pragma once

// Runtime checks of the simulator and signal safety properties. The monitor only
// looks at observable output (colors shown, vehicle states), never at controller
// internals, so it can audit any controller backend.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "signalbench/sim.hpp"
#include "signalbench/tslu.hpp"

namespace signalbench {

struct Violation {
  int t = 0;
  std::string what;
};

struct ViolationCounts {
  std::uint64_t conflicting_green = 0;
  std::uint64_t intergreen = 0;
  std::uint64_t color_sequence = 0;
  std::uint64_t min_green = 0;
  std::uint64_t phase_row = 0;
  std::uint64_t conservation = 0;
  std::uint64_t collision = 0;
  std::uint64_t red_light = 0;
  std::uint64_t speed = 0;
  std::uint64_t pedestrian = 0;
  std::uint64_t waiting_time = 0;

  std::uint64_t total() const;
};

class InvariantMonitor {
 public:
  InvariantMonitor(const NetworkConfig& net, const TsluConfig& tslu);

  /// Clears tracking state and counters; call once per episode.
  void reset();

  /// Colors shown during `second`. When the controller reports a steady phase the
  /// vector must equal that phase's row.
  void observe_signals(int second, const SignalStateVector& colors, bool in_transition,
                       int active_phase);

  /// Simulator state after a step run under `signals`.
  void observe_sim(const SimState& after, const SignalStateVector& signals);

  const ViolationCounts& counts() const { return counts_; }
  /// First few violations, for diagnostics.
  const std::vector<Violation>& examples() const { return examples_; }
  bool clean() const { return counts_.total() == 0; }

  /// Number of (conflicting group, entering group) pairs audited since reset.
  std::uint64_t intergreen_checks() const { return intergreen_checks_; }

 private:
  void flag(std::uint64_t& counter, int t, std::string what);

  NetworkConfig net_;
  TsluConfig tslu_;
  ViolationCounts counts_;
  std::vector<Violation> examples_;
  std::uint64_t intergreen_checks_ = 0;

  std::optional<SignalStateVector> prev_colors_;
  std::array<int, kNumGroups> run_length_{};
  std::array<std::optional<int>, kNumGroups> green_end_{};

  struct Seen {
    double pos;
    double stopped_time;
  };
  std::unordered_map<std::uint64_t, Seen> vehicles_;
  std::unordered_map<std::uint64_t, double> crossing_;
};

}  // namespace signalbench
