#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace signalbench {

/// The seven signal groups of the intersection. Order is fixed and used as an index.
enum class SignalGroup : std::size_t { VehW, VehE, VehN, VehS, VehWLeft, PedWE, PedNS };
inline constexpr std::size_t kNumGroups = 7;

enum class GroupKind { Vehicle, Pedestrian };

enum class SignalColor { Red, RedYellow, Yellow, Green };

using SignalStateVector = std::array<SignalColor, kNumGroups>;

inline constexpr std::array<SignalGroup, kNumGroups> kAllGroups = {
    SignalGroup::VehW,     SignalGroup::VehE,  SignalGroup::VehN, SignalGroup::VehS,
    SignalGroup::VehWLeft, SignalGroup::PedWE, SignalGroup::PedNS};

constexpr std::size_t index(SignalGroup g) { return static_cast<std::size_t>(g); }

constexpr GroupKind kind_of(SignalGroup g) {
  return (g == SignalGroup::PedWE || g == SignalGroup::PedNS) ? GroupKind::Pedestrian
                                                              : GroupKind::Vehicle;
}

std::string_view to_string(SignalGroup g);
std::string_view to_string(SignalColor c);
std::optional<SignalGroup> parse_group(std::string_view s);
std::optional<SignalColor> parse_color(std::string_view s);

/// A vector with every group red (phase 1).
inline SignalStateVector all_red() {
  SignalStateVector v;
  v.fill(SignalColor::Red);
  return v;
}

}  // namespace signalbench
