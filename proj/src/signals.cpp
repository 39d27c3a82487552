#include "signalbench/signals.hpp"

namespace signalbench {

namespace {
constexpr std::array<std::string_view, kNumGroups> kGroupNames = {
    "veh_w", "veh_e", "veh_n", "veh_s", "veh_w_left", "ped_we", "ped_ns"};
constexpr std::array<std::string_view, 4> kColorNames = {"red", "red_yellow", "yellow", "green"};
}  // namespace

std::string_view to_string(SignalGroup g) { return kGroupNames[index(g)]; }

std::string_view to_string(SignalColor c) { return kColorNames[static_cast<std::size_t>(c)]; }

std::optional<SignalGroup> parse_group(std::string_view s) {
  for (std::size_t i = 0; i < kNumGroups; ++i)
    if (kGroupNames[i] == s) return static_cast<SignalGroup>(i);
  return std::nullopt;
}

std::optional<SignalColor> parse_color(std::string_view s) {
  for (std::size_t i = 0; i < kColorNames.size(); ++i)
    if (kColorNames[i] == s) return static_cast<SignalColor>(i);
  return std::nullopt;
}

}  // namespace signalbench
