#pragma once

// Traffic signal logic unit: phase table, conflict/intergreen data and the
// transition state machine that arbitrates phase wishes.

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "signalbench/network.hpp"
#include "signalbench/signals.hpp"

namespace signalbench {

inline constexpr int kNumPhases = 8;
inline constexpr int kFirstWish = 2;
inline constexpr int kNumActions = kNumPhases - 1;

/// Green flags per group for one phase.
using PhaseRow = std::array<bool, kNumGroups>;

struct PhaseTable {
  std::array<PhaseRow, kNumPhases> rows{};  // rows[p - 1] is phase p

  const PhaseRow& row(int phase) const { return rows.at(static_cast<std::size_t>(phase - 1)); }
  SignalStateVector colors(int phase) const;
  friend bool operator==(const PhaseTable&, const PhaseTable&) = default;
};

/// The eight phases in use at the intersection. Phase 1 is all red.
PhaseTable standard_phase_table();

class ConflictSet {
 public:
  void add(SignalGroup a, SignalGroup b);
  bool conflicts(SignalGroup a, SignalGroup b) const { return m_[index(a)][index(b)]; }
  std::vector<std::pair<SignalGroup, SignalGroup>> pairs() const;  // each pair once, a < b

 private:
  std::array<std::array<bool, kNumGroups>, kNumGroups> m_{};
};

ConflictSet standard_conflicts();

/// Inputs for one directed intergreen entry (clearing group -> entering group).
struct IntergreenGeometry {
  double crossing = 0.0;  // seconds
  double clearance_distance = 0.0;
  double clearance_speed = 1.0;
  double entering_distance = 0.0;
  double entering_speed = 1.0;
};

struct IntergreenEntry {
  SignalGroup clearing;
  SignalGroup entering;
  IntergreenGeometry geometry;
};

class IntergreenMatrix {
 public:
  IntergreenMatrix() { for (auto& r : s_) r.fill(-1); }
  void set(SignalGroup clearing, SignalGroup entering, int seconds);
  /// -1 when the pair has no entry.
  int at(SignalGroup clearing, SignalGroup entering) const {
    return s_[index(clearing)][index(entering)];
  }
  int max() const;

 private:
  std::array<std::array<int, kNumGroups>, kNumGroups> s_;
};

/// ceil(crossing + clearance time - entering time), floored at 0.
int compute_intergreen(const IntergreenGeometry& g);
IntergreenMatrix compute_intergreen(std::span<const IntergreenEntry> entries);

struct TimingConfig {
  std::array<int, kNumGroups> min_green{};
  int yellow = 3;
  int red_yellow = 1;
  int phase5_clearance_wait = 5;
};

/// Vehicle groups 5 s; pedestrian groups ceil(crossing length / walking speed), at least 5 s.
TimingConfig default_timing(const NetworkConfig& net);

struct TsluConfig {
  PhaseTable phases;
  ConflictSet conflicts;
  IntergreenMatrix intergreen;
  TimingConfig timing;
};

void validate(const TsluConfig& cfg);
TsluConfig tslu_from_json(const nlohmann::json& j, const NetworkConfig& net);
TsluConfig load_tslu(const std::filesystem::path& path, const NetworkConfig& net);

struct GroupState {
  SignalColor color = SignalColor::Red;
  int seconds_in_color = 0;
  std::optional<int> last_green_end;  // first second the group was no longer green
  friend bool operator==(const GroupState&, const GroupState&) = default;
};

struct ControllerState {
  int current_phase = 1;
  int target_phase = 1;
  bool in_transition = false;
  int phase_time = 0;  // seconds the current phase has been held steady
  int clock = 0;
  std::array<GroupState, kNumGroups> groups{};

  SignalStateVector colors() const;
  friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

/// Phase 1 (all red), clock 0.
ControllerState initial_controller();

struct Decision {
  bool accepted = false;
  std::string reason;  // empty when accepted
};

/// Pure check: would request_phase accept `wish` right now? Throws ProtocolError if
/// wish is outside 2..8.
Decision evaluate_wish(const ControllerState& ctrl, const TsluConfig& cfg, int wish);

/// Accepts or rejects a phase wish. Rejection leaves `ctrl` untouched.
Decision request_phase(ControllerState& ctrl, const TsluConfig& cfg, int wish);

/// Advances the controller one second and returns the colors shown during it.
SignalStateVector tick(ControllerState& ctrl, const TsluConfig& cfg);

/// mask[i] is true iff a wish for phase i + 2 would be accepted.
std::array<bool, kNumActions> action_mask(const ControllerState& ctrl, const TsluConfig& cfg);

/// Phase reported to observers: 1 while every group is red mid-transition.
int active_phase(const ControllerState& ctrl);

nlohmann::json to_json(const ControllerState& ctrl);

}  // namespace signalbench

namespace signalbench {
/// Canonical dump (intergreen as resolved seconds); used for fingerprinting.
nlohmann::json to_json(const TsluConfig& cfg);
}  // namespace signalbench
