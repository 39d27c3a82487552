#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "signalbench/errors.hpp"
#include "signalbench/invariants.hpp"
#include "support.hpp"

namespace sb = signalbench;
using sb::SignalColor;
using sb::SignalGroup;

namespace {

const sb::TsluConfig& cfg() { return sbt::shipped().tslu; }

nlohmann::json shipped_json() {
  std::ifstream in(sb::default_config_dir() / "owl322.tslu.json");
  return nlohmann::json::parse(in);
}

// Green groups of each phase at the intersection, written out by hand.
const std::vector<std::vector<SignalGroup>> kExpectedRows = {
    {},
    {SignalGroup::VehW, SignalGroup::VehE, SignalGroup::PedNS},
    {SignalGroup::VehW, SignalGroup::VehE},
    {SignalGroup::VehW},
    {SignalGroup::VehW, SignalGroup::VehWLeft},
    {SignalGroup::VehN, SignalGroup::VehS, SignalGroup::PedWE},
    {SignalGroup::VehN, SignalGroup::VehS},
    {SignalGroup::VehN},
};

sb::SignalStateVector expected_row(int phase) {
  sb::SignalStateVector v = sb::all_red();
  for (auto g : kExpectedRows[static_cast<std::size_t>(phase - 1)]) v[sb::index(g)] = SignalColor::Green;
  return v;
}

int first_tick(const std::vector<sb::SignalStateVector>& trace, SignalGroup g, SignalColor c, bool negate = false) {
  for (std::size_t i = 0; i < trace.size(); ++i)
    if ((trace[i][sb::index(g)] == c) != negate) return static_cast<int>(i) + 1;
  return -1;
}

}  // namespace

TEST(PhaseTable, RowsMatchIntersectionProgram) {
  for (int p = 1; p <= sb::kNumPhases; ++p) EXPECT_EQ(cfg().phases.colors(p), expected_row(p)) << "phase " << p;
}

TEST(PhaseTable, SteadyStateShowsRow) {
  for (int p = 2; p <= sb::kNumPhases; ++p) {
    auto c = sbt::reach(cfg(), p, 3);
    EXPECT_FALSE(c.in_transition);
    EXPECT_EQ(c.current_phase, p);
    EXPECT_EQ(c.colors(), expected_row(p)) << "phase " << p;
    EXPECT_EQ(sb::tick(c, cfg()), expected_row(p));
  }
}

TEST(Intergreen, ArithmeticExamples) {
  EXPECT_EQ(sb::compute_intergreen({1.0, 40.0, 10.0, 20.0, 10.0}), 3);
  EXPECT_EQ(sb::compute_intergreen({0.0, 20.0, 10.0, 20.0, 10.0}), 0);
  EXPECT_EQ(sb::compute_intergreen({0.0, 15.0, 1.2, 10.0, 10.0}), 12);
}

TEST(Intergreen, NeverNegative) { EXPECT_EQ(sb::compute_intergreen({0.0, 1.0, 10.0, 50.0, 5.0}), 0); }

TEST(Intergreen, ShippedMatrixCoversExactlyTheConflicts) {
  for (auto a : sb::kAllGroups)
    for (auto b : sb::kAllGroups)
      EXPECT_EQ(cfg().intergreen.at(a, b) >= 0, cfg().conflicts.conflicts(a, b))
          << sb::to_string(a) << "->" << sb::to_string(b);
  EXPECT_EQ(cfg().intergreen.at(SignalGroup::VehW, SignalGroup::VehN), 6);
}

TEST(Timing, PedestrianMinGreenFromCrossingTime) {
  const auto t = sb::default_timing(sbt::shipped().net);
  EXPECT_EQ(t.min_green[sb::index(SignalGroup::PedNS)], 8);
  EXPECT_EQ(t.min_green[sb::index(SignalGroup::PedWE)], 10);
  EXPECT_EQ(t.min_green[sb::index(SignalGroup::VehW)], 5);
  EXPECT_EQ(cfg().timing.min_green, t.min_green);
}

TEST(TsluConfig, RejectsMissingIntergreen) {
  auto j = shipped_json();
  j["intergreen"].erase(0);
  EXPECT_THROW(sb::tslu_from_json(j, sbt::shipped().net), sb::ConfigError);
}

TEST(TsluConfig, RejectsConflictingGreensInAPhase) {
  auto j = shipped_json();
  j["phases"]["3"].push_back("veh_n");
  EXPECT_THROW(sb::tslu_from_json(j, sbt::shipped().net), sb::ConfigError);
}

TEST(TsluConfig, RejectsUnknownField) {
  auto j = shipped_json();
  j["timing"]["blink"] = 1;
  EXPECT_THROW(sb::tslu_from_json(j, sbt::shipped().net), sb::ConfigError);
}

TEST(TsluConfig, RoundTripsThroughJson) {
  const auto back = sb::tslu_from_json(sb::to_json(cfg()), sbt::shipped().net);
  EXPECT_EQ(sb::to_json(back), sb::to_json(cfg()));
}

TEST(Wish, PedestrianMinGreenHolds) {
  auto c = sbt::reach(cfg(), 2);
  const auto& ped = c.groups[sb::index(SignalGroup::PedNS)];
  while (ped.seconds_in_color < 3) sb::tick(c, cfg());
  ASSERT_EQ(ped.seconds_in_color, 3);
  const auto before = c;
  const auto d = sb::request_phase(c, cfg(), 3);
  EXPECT_FALSE(d.accepted);
  EXPECT_EQ(d.reason, "min_green ped_ns");
  EXPECT_EQ(c, before);

  while (ped.seconds_in_color < 8) {
    EXPECT_FALSE(sb::evaluate_wish(c, cfg(), 3).accepted);
    sb::tick(c, cfg());
  }
  EXPECT_TRUE(sb::request_phase(c, cfg(), 3).accepted);
  EXPECT_TRUE(c.in_transition);
}

TEST(Wish, IdentityIsAcceptedNoOp) {
  auto c = sbt::reach(cfg(), 3, 1);
  const auto before = c;
  EXPECT_TRUE(sb::request_phase(c, cfg(), 3).accepted);
  EXPECT_EQ(c, before);
}

TEST(Wish, Phase5OnlyFromPhase4) {
  auto c = sbt::reach(cfg(), 7, 20);
  const auto d = sb::evaluate_wish(c, cfg(), 5);
  EXPECT_FALSE(d.accepted);
  EXPECT_EQ(d.reason, "phase5 only from 4");
}

TEST(Wish, Phase5AfterClearanceWait) {
  auto c = sbt::reach(cfg(), 4);
  ASSERT_LT(c.phase_time, 5);
  const auto d = sb::evaluate_wish(c, cfg(), 5);
  EXPECT_FALSE(d.accepted);
  EXPECT_EQ(d.reason, "phase5 clearance wait");
  while (c.phase_time < 5) sb::tick(c, cfg());
  EXPECT_TRUE(sb::request_phase(c, cfg(), 5).accepted);
  sbt::settle(c, cfg());
  EXPECT_EQ(c.current_phase, 5);
  EXPECT_EQ(c.colors(), expected_row(5));
}

TEST(Wish, OutOfRangeIsProtocolError) {
  auto c = sb::initial_controller();
  EXPECT_THROW(sb::evaluate_wish(c, cfg(), 1), sb::ProtocolError);
  EXPECT_THROW(sb::evaluate_wish(c, cfg(), 9), sb::ProtocolError);
}

TEST(Wish, OnlyTargetAcceptedDuringTransition) {
  auto c = sbt::reach(cfg(), 3, 10);
  ASSERT_TRUE(sb::request_phase(c, cfg(), 7).accepted);
  sb::tick(c, cfg());
  ASSERT_TRUE(c.in_transition);
  EXPECT_TRUE(sb::evaluate_wish(c, cfg(), 7).accepted);
  const auto d = sb::evaluate_wish(c, cfg(), 2);
  EXPECT_FALSE(d.accepted);
  EXPECT_EQ(d.reason, "in_transition");
}

TEST(Transition, ThreeToSevenHonoursIntergreen) {
  auto c = sbt::reach(cfg(), 3, 10);
  ASSERT_TRUE(sb::request_phase(c, cfg(), 7).accepted);
  const auto trace = sbt::settle(c, cfg());

  const int w_end = first_tick(trace, SignalGroup::VehW, SignalColor::Green, true);
  const int e_end = first_tick(trace, SignalGroup::VehE, SignalColor::Green, true);
  const int n_ry = first_tick(trace, SignalGroup::VehN, SignalColor::RedYellow);
  const int n_green = first_tick(trace, SignalGroup::VehN, SignalColor::Green);
  ASSERT_GT(w_end, 0);
  ASSERT_GT(n_ry, 0);
  EXPECT_GE(n_ry - w_end, 6);
  // Earliest legal entry: the latest of each clearing group's end plus its intergreen.
  const int expected = std::max(w_end + cfg().intergreen.at(SignalGroup::VehW, SignalGroup::VehN),
                                e_end + cfg().intergreen.at(SignalGroup::VehE, SignalGroup::VehN));
  EXPECT_EQ(n_ry, expected);
  EXPECT_EQ(n_green, n_ry + cfg().timing.red_yellow);
  EXPECT_EQ(static_cast<int>(trace.size()), n_green);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& s = trace[i];
    const int k = static_cast<int>(i) + 1;
    if (k >= w_end && k < w_end + cfg().timing.yellow) EXPECT_EQ(s[sb::index(SignalGroup::VehW)], SignalColor::Yellow);
    EXPECT_FALSE(s[sb::index(SignalGroup::VehW)] == SignalColor::Green && s[sb::index(SignalGroup::VehN)] == SignalColor::Green);
  }
  EXPECT_EQ(c.colors(), expected_row(7));
}

TEST(Transition, ThreeToFourTakesYellowOnly) {
  auto c = sbt::reach(cfg(), 3, 10);
  ASSERT_TRUE(sb::request_phase(c, cfg(), 4).accepted);
  int transitional = 0;
  while (true) {
    const auto s = sb::tick(c, cfg());
    if (!c.in_transition) {
      EXPECT_EQ(s, expected_row(4));
      break;
    }
    EXPECT_EQ(s[sb::index(SignalGroup::VehE)], SignalColor::Yellow);
    ++transitional;
  }
  EXPECT_EQ(transitional, cfg().timing.yellow);
}

TEST(Transition, AllRedReportsPhaseOne) {
  auto c = sbt::reach(cfg(), 3, 10);
  ASSERT_TRUE(sb::request_phase(c, cfg(), 7).accepted);
  bool saw_all_red = false;
  while (c.in_transition) {
    sb::tick(c, cfg());
    if (c.in_transition && c.colors() == sb::all_red()) {
      saw_all_red = true;
      EXPECT_EQ(sb::active_phase(c), 1);
    }
  }
  EXPECT_TRUE(saw_all_red);
  EXPECT_EQ(sb::active_phase(c), 7);
}

// Random wish streams: purity of rejections, bounded transitions, mask agreement
// and the observable signal safety properties.
TEST(Controller, RandomWishProperties) {
  const int bound = cfg().intergreen.max() + cfg().timing.yellow + cfg().timing.red_yellow + 2;
  sb::InvariantMonitor monitor(sbt::shipped().net, cfg());
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    std::mt19937_64 rng(seed);
    auto c = sb::initial_controller();
    monitor.reset();
    int transition_age = 0;
    for (int t = 0; t < 3000; ++t) {
      const int wish = 2 + static_cast<int>(rng() % 7);
      const auto mask = sb::action_mask(c, cfg());
      const auto before = c;
      const auto d = sb::request_phase(c, cfg(), wish);
      ASSERT_EQ(d.accepted, mask[static_cast<std::size_t>(wish - 2)]);
      if (!d.accepted) ASSERT_EQ(c, before);
      const bool started = c.in_transition && !before.in_transition;
      if (started) transition_age = 0;
      const auto colors = sb::tick(c, cfg());
      if (c.in_transition || started) ++transition_age;
      ASSERT_LE(transition_age, bound) << "seed " << seed << " t " << t;
      if (!c.in_transition) transition_age = 0;
      monitor.observe_signals(t, colors, c.in_transition, sb::active_phase(c));
    }
    ASSERT_TRUE(monitor.clean()) << "seed " << seed << ": " << monitor.examples().front().what;
  }
  EXPECT_GT(monitor.intergreen_checks(), 0u);
}
