#include "signalbench/tslu.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "signalbench/errors.hpp"

namespace signalbench {

using nlohmann::json;

namespace {

PhaseRow row_of(std::initializer_list<SignalGroup> green) {
  PhaseRow r{};
  for (SignalGroup g : green) r[index(g)] = true;
  return r;
}

bool matches(const ControllerState& ctrl, const PhaseRow& row) {
  for (std::size_t i = 0; i < kNumGroups; ++i) {
    const SignalColor want = row[i] ? SignalColor::Green : SignalColor::Red;
    if (ctrl.groups[i].color != want) return false;
  }
  return true;
}

void set_color(GroupState& s, SignalColor c) {
  if (s.color != c) {
    s.color = c;
    s.seconds_in_color = 0;
  }
}

SignalGroup group_or_throw(const json& v, const std::string& ctx) {
  if (!v.is_string()) throw ConfigError(ctx + ": expected a signal group name");
  auto g = parse_group(v.get<std::string>());
  if (!g) throw ConfigError(ctx + ": unknown signal group '" + v.get<std::string>() + "'");
  return *g;
}

}  // namespace

SignalStateVector PhaseTable::colors(int phase) const {
  SignalStateVector v;
  const PhaseRow& r = row(phase);
  for (std::size_t i = 0; i < kNumGroups; ++i) v[i] = r[i] ? SignalColor::Green : SignalColor::Red;
  return v;
}

PhaseTable standard_phase_table() {
  using G = SignalGroup;
  PhaseTable t;
  t.rows = {
      row_of({}),
      row_of({G::VehW, G::VehE, G::PedNS}),
      row_of({G::VehW, G::VehE}),
      row_of({G::VehW}),
      row_of({G::VehW, G::VehWLeft}),
      row_of({G::VehN, G::VehS, G::PedWE}),
      row_of({G::VehN, G::VehS}),
      row_of({G::VehN}),
  };
  return t;
}

void ConflictSet::add(SignalGroup a, SignalGroup b) {
  m_[index(a)][index(b)] = true;
  m_[index(b)][index(a)] = true;
}

std::vector<std::pair<SignalGroup, SignalGroup>> ConflictSet::pairs() const {
  std::vector<std::pair<SignalGroup, SignalGroup>> out;
  for (std::size_t a = 0; a < kNumGroups; ++a)
    for (std::size_t b = a + 1; b < kNumGroups; ++b)
      if (m_[a][b]) out.emplace_back(static_cast<SignalGroup>(a), static_cast<SignalGroup>(b));
  return out;
}

ConflictSet standard_conflicts() {
  using G = SignalGroup;
  ConflictSet c;
  c.add(G::VehW, G::VehN);
  c.add(G::VehW, G::VehS);
  c.add(G::VehE, G::VehN);
  c.add(G::VehE, G::VehS);
  c.add(G::VehWLeft, G::VehE);
  c.add(G::VehWLeft, G::VehN);
  c.add(G::VehWLeft, G::VehS);
  // ped_we crosses the W and E arms, ped_ns the N and S arms.
  c.add(G::PedWE, G::VehW);
  c.add(G::PedWE, G::VehE);
  c.add(G::PedWE, G::VehWLeft);
  c.add(G::PedNS, G::VehN);
  c.add(G::PedNS, G::VehS);
  c.add(G::PedNS, G::VehWLeft);
  return c;
}

void IntergreenMatrix::set(SignalGroup clearing, SignalGroup entering, int seconds) {
  s_[index(clearing)][index(entering)] = seconds;
}

int IntergreenMatrix::max() const {
  int m = 0;
  for (const auto& r : s_)
    for (int v : r) m = std::max(m, v);
  return m;
}

int compute_intergreen(const IntergreenGeometry& g) {
  if (!(g.clearance_speed > 0)) throw ConfigError("intergreen.clearance_speed: must be > 0");
  if (!(g.entering_speed > 0)) throw ConfigError("intergreen.entering_speed: must be > 0");
  const double t = g.crossing + g.clearance_distance / g.clearance_speed -
                   g.entering_distance / g.entering_speed;
  // Tolerate quotient rounding (9 / 1.2 must count as 7.5, not 7.5000000001).
  return std::max(0, static_cast<int>(std::ceil(t - 1e-9)));
}

IntergreenMatrix compute_intergreen(std::span<const IntergreenEntry> entries) {
  IntergreenMatrix m;
  for (const IntergreenEntry& e : entries) m.set(e.clearing, e.entering, compute_intergreen(e.geometry));
  return m;
}

TimingConfig default_timing(const NetworkConfig& net) {
  TimingConfig t;
  for (SignalGroup g : kAllGroups) t.min_green[index(g)] = 5;
  for (Arm a : kAllArms) {
    const CrosswalkSpec& cw = net.arm(a).crosswalk;
    const int crossing = static_cast<int>(std::ceil(cw.length / cw.walking_speed - 1e-9));
    int& mg = t.min_green[index(crosswalk_group(a))];
    mg = std::max(mg, crossing);
  }
  return t;
}

void validate(const TsluConfig& cfg) {
  if (!(cfg.phases == standard_phase_table()))
    throw ConfigError("phases: rows must match the intersection's eight-phase table");
  for (SignalGroup g : kAllGroups)
    if (cfg.conflicts.conflicts(g, g))
      throw ConfigError("conflicts: group " + std::string(to_string(g)) + " conflicts with itself");
  for (int p = 1; p <= kNumPhases; ++p) {
    const PhaseRow& r = cfg.phases.row(p);
    for (auto [a, b] : cfg.conflicts.pairs())
      if (r[index(a)] && r[index(b)])
        throw ConfigError("conflicts: " + std::string(to_string(a)) + "/" +
                          std::string(to_string(b)) + " are green together in phase " +
                          std::to_string(p));
  }
  for (SignalGroup a : kAllGroups)
    for (SignalGroup b : kAllGroups) {
      const int t = cfg.intergreen.at(a, b);
      const std::string name = std::string(to_string(a)) + "->" + std::string(to_string(b));
      if (cfg.conflicts.conflicts(a, b) && t < 0)
        throw ConfigError("intergreen." + name + ": missing entry for conflicting pair");
      if (!cfg.conflicts.conflicts(a, b) && t >= 0)
        throw ConfigError("intergreen." + name + ": entry for non-conflicting pair");
    }
  for (SignalGroup g : kAllGroups)
    if (cfg.timing.min_green[index(g)] < 0)
      throw ConfigError("timing.min_green." + std::string(to_string(g)) + ": must be >= 0");
  if (cfg.timing.yellow < 1) throw ConfigError("timing.yellow: must be >= 1");
  if (cfg.timing.red_yellow < 1) throw ConfigError("timing.red_yellow: must be >= 1");
  if (cfg.timing.phase5_clearance_wait < 0)
    throw ConfigError("timing.phase5_clearance_wait: must be >= 0");
}

TsluConfig tslu_from_json(const json& j, const NetworkConfig& net) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("tslu: expected an object");
  only_keys(j, {"phases", "conflicts", "intergreen", "timing", "comment"}, "tslu");
  TsluConfig cfg;

  const json& phases = field(j, "phases", "tslu");
  if (!phases.is_object() || phases.size() != kNumPhases)
    throw ConfigError("phases: exactly 8 phases required");
  for (int p = 1; p <= kNumPhases; ++p) {
    const std::string key = std::to_string(p);
    const json& row = field(phases, key, "phases");
    if (!row.is_array()) throw ConfigError("phases." + key + ": expected a list of green groups");
    PhaseRow r{};
    for (const json& g : row) r[index(group_or_throw(g, "phases." + key))] = true;
    cfg.phases.rows[static_cast<std::size_t>(p - 1)] = r;
  }

  const json& conflicts = field(j, "conflicts", "tslu");
  if (!conflicts.is_array()) throw ConfigError("conflicts: expected an array of pairs");
  for (const json& pair : conflicts) {
    if (!pair.is_array() || pair.size() != 2) throw ConfigError("conflicts[]: expected a pair");
    cfg.conflicts.add(group_or_throw(pair[0], "conflicts[]"), group_or_throw(pair[1], "conflicts[]"));
  }

  const json& ig = field(j, "intergreen", "tslu");
  if (!ig.is_array()) throw ConfigError("intergreen: expected an array");
  for (const json& e : ig) {
    only_keys(e, {"clearing", "entering", "seconds", "crossing", "clearance_distance",
                  "clearance_speed", "entering_distance", "entering_speed"},
              "intergreen[]");
    const SignalGroup clearing = group_or_throw(field(e, "clearing", "intergreen[]"), "intergreen[].clearing");
    const SignalGroup entering = group_or_throw(field(e, "entering", "intergreen[]"), "intergreen[].entering");
    const std::string ctx = "intergreen[" + std::string(to_string(clearing)) + "->" +
                            std::string(to_string(entering)) + "]";
    if (cfg.intergreen.at(clearing, entering) >= 0) throw ConfigError(ctx + ": duplicate entry");
    if (e.contains("seconds")) {
      const int s = integer(e, "seconds", ctx);
      if (s < 0) throw ConfigError(ctx + ".seconds: must be >= 0");
      cfg.intergreen.set(clearing, entering, s);
    } else {
      IntergreenGeometry g{number(e, "crossing", ctx), number(e, "clearance_distance", ctx),
                           number(e, "clearance_speed", ctx), number(e, "entering_distance", ctx),
                           number(e, "entering_speed", ctx)};
      try {
        cfg.intergreen.set(clearing, entering, compute_intergreen(g));
      } catch (const ConfigError& err) {
        throw ConfigError(ctx + ": " + err.what());
      }
    }
  }

  cfg.timing = default_timing(net);
  if (j.contains("timing")) {
    const json& t = j["timing"];
    only_keys(t, {"yellow", "red_yellow", "phase5_clearance_wait", "min_green"}, "timing");
    if (t.contains("yellow")) cfg.timing.yellow = integer(t, "yellow", "timing");
    if (t.contains("red_yellow")) cfg.timing.red_yellow = integer(t, "red_yellow", "timing");
    if (t.contains("phase5_clearance_wait"))
      cfg.timing.phase5_clearance_wait = integer(t, "phase5_clearance_wait", "timing");
    if (t.contains("min_green")) {
      const json& mg = t["min_green"];
      if (!mg.is_object()) throw ConfigError("timing.min_green: expected an object");
      for (auto it = mg.begin(); it != mg.end(); ++it) {
        auto g = parse_group(it.key());
        if (!g) throw ConfigError("timing.min_green." + it.key() + ": unknown signal group");
        cfg.timing.min_green[index(*g)] = integer(mg, it.key(), "timing.min_green");
      }
    }
  }
  validate(cfg);
  return cfg;
}

TsluConfig load_tslu(const std::filesystem::path& path, const NetworkConfig& net) {
  try {
    return tslu_from_json(detail::read_json_file(path), net);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

SignalStateVector ControllerState::colors() const {
  SignalStateVector v;
  for (std::size_t i = 0; i < kNumGroups; ++i) v[i] = groups[i].color;
  return v;
}

ControllerState initial_controller() { return ControllerState{}; }

Decision evaluate_wish(const ControllerState& ctrl, const TsluConfig& cfg, int wish) {
  if (wish < kFirstWish || wish > kNumPhases)
    throw ProtocolError("phase wish " + std::to_string(wish) + " outside 2..8");
  if (ctrl.in_transition) {
    if (wish == ctrl.target_phase) return {true, {}};
    return {false, "in_transition"};
  }
  if (wish == ctrl.current_phase) return {true, {}};
  const PhaseRow& now = cfg.phases.row(ctrl.current_phase);
  const PhaseRow& next = cfg.phases.row(wish);
  for (SignalGroup g : kAllGroups) {
    const std::size_t i = index(g);
    if (now[i] && !next[i] && ctrl.groups[i].seconds_in_color < cfg.timing.min_green[i])
      return {false, "min_green " + std::string(to_string(g))};
  }
  if (wish == 5) {
    if (ctrl.current_phase != 4) return {false, "phase5 only from 4"};
    if (ctrl.phase_time < cfg.timing.phase5_clearance_wait) return {false, "phase5 clearance wait"};
  }
  return {true, {}};
}

Decision request_phase(ControllerState& ctrl, const TsluConfig& cfg, int wish) {
  Decision d = evaluate_wish(ctrl, cfg, wish);
  if (d.accepted && !ctrl.in_transition && wish != ctrl.current_phase) {
    ctrl.target_phase = wish;
    ctrl.in_transition = true;
  }
  return d;
}

SignalStateVector tick(ControllerState& ctrl, const TsluConfig& cfg) {
  ctrl.clock += 1;
  const int now = ctrl.clock;
  if (ctrl.in_transition) {
    const PhaseRow& target = cfg.phases.row(ctrl.target_phase);
    // Pass 1: groups that are not red move along their sequence.
    for (SignalGroup g : kAllGroups) {
      GroupState& s = ctrl.groups[index(g)];
      const bool want_green = target[index(g)];
      switch (s.color) {
        case SignalColor::Green:
          if (!want_green) {
            set_color(s, kind_of(g) == GroupKind::Vehicle ? SignalColor::Yellow : SignalColor::Red);
            s.last_green_end = now;
          }
          break;
        case SignalColor::Yellow:
          if (s.seconds_in_color >= cfg.timing.yellow) set_color(s, SignalColor::Red);
          break;
        case SignalColor::RedYellow:
          if (s.seconds_in_color >= cfg.timing.red_yellow) set_color(s, SignalColor::Green);
          break;
        case SignalColor::Red:
          break;
      }
    }
    // Pass 2: red groups due for green leave red once every conflicting group has
    // stopped showing green for at least the intergreen time.
    for (SignalGroup g : kAllGroups) {
      GroupState& s = ctrl.groups[index(g)];
      if (s.color != SignalColor::Red || !target[index(g)]) continue;
      bool open = true;
      for (SignalGroup c : kAllGroups) {
        if (!cfg.conflicts.conflicts(c, g)) continue;
        const GroupState& cs = ctrl.groups[index(c)];
        if (cs.color == SignalColor::Green || cs.color == SignalColor::RedYellow) {
          open = false;
          break;
        }
        if (cs.last_green_end && now - *cs.last_green_end < cfg.intergreen.at(c, g)) {
          open = false;
          break;
        }
      }
      if (open)
        set_color(s, kind_of(g) == GroupKind::Vehicle ? SignalColor::RedYellow : SignalColor::Green);
    }
    if (matches(ctrl, target)) {
      ctrl.current_phase = ctrl.target_phase;
      ctrl.in_transition = false;
      ctrl.phase_time = 0;
    }
  }
  if (!ctrl.in_transition) ctrl.phase_time += 1;
  for (GroupState& s : ctrl.groups) s.seconds_in_color += 1;
  return ctrl.colors();
}

std::array<bool, kNumActions> action_mask(const ControllerState& ctrl, const TsluConfig& cfg) {
  std::array<bool, kNumActions> mask{};
  for (int i = 0; i < kNumActions; ++i) mask[static_cast<std::size_t>(i)] = evaluate_wish(ctrl, cfg, i + kFirstWish).accepted;
  return mask;
}

int active_phase(const ControllerState& ctrl) {
  if (ctrl.in_transition &&
      std::all_of(ctrl.groups.begin(), ctrl.groups.end(),
                  [](const GroupState& s) { return s.color == SignalColor::Red; }))
    return 1;
  return ctrl.current_phase;
}

json to_json(const ControllerState& ctrl) {
  json groups = json::object();
  for (SignalGroup g : kAllGroups) {
    const GroupState& s = ctrl.groups[index(g)];
    groups[std::string(to_string(g))] = {
        {"color", to_string(s.color)},
        {"seconds_in_color", s.seconds_in_color},
        {"last_green_end", s.last_green_end ? json(*s.last_green_end) : json(nullptr)}};
  }
  return {{"current_phase", ctrl.current_phase}, {"target_phase", ctrl.target_phase},
          {"in_transition", ctrl.in_transition}, {"phase_time", ctrl.phase_time},
          {"clock", ctrl.clock},                 {"groups", groups}};
}

}  // namespace signalbench

namespace signalbench {

nlohmann::json to_json(const TsluConfig& cfg) {
  json phases = json::object();
  for (int p = 1; p <= kNumPhases; ++p) {
    json row = json::array();
    for (SignalGroup g : kAllGroups)
      if (cfg.phases.row(p)[index(g)]) row.push_back(to_string(g));
    phases[std::to_string(p)] = row;
  }
  json conflicts = json::array();
  for (auto [a, b] : cfg.conflicts.pairs()) conflicts.push_back({to_string(a), to_string(b)});
  json ig = json::array();
  for (SignalGroup a : kAllGroups)
    for (SignalGroup b : kAllGroups)
      if (cfg.intergreen.at(a, b) >= 0)
        ig.push_back({{"clearing", to_string(a)}, {"entering", to_string(b)}, {"seconds", cfg.intergreen.at(a, b)}});
  json mg = json::object();
  for (SignalGroup g : kAllGroups) mg[std::string(to_string(g))] = cfg.timing.min_green[index(g)];
  return {{"phases", phases},
          {"conflicts", conflicts},
          {"intergreen", ig},
          {"timing",
           {{"yellow", cfg.timing.yellow},
            {"red_yellow", cfg.timing.red_yellow},
            {"phase5_clearance_wait", cfg.timing.phase5_clearance_wait},
            {"min_green", mg}}}};
}

}  // namespace signalbench
