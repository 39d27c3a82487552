#include <gtest/gtest.h>

#include <random>

#include "signalbench/errors.hpp"
#include "support.hpp"

namespace sb = signalbench;

namespace {

constexpr std::size_t kPedBase = sb::kObservedLanes * sb::kLaneFeatures;
constexpr std::size_t kPhaseBase = kPedBase + sb::kCrosswalks;

double hand_reward(const std::vector<double>& raw, double av, double ap) {
  double q = 0, wv = 0, wp = 0;
  for (std::size_t l = 0; l < 8; ++l) {
    q += raw[4 * l];
    wv += raw[4 * l + 3];
  }
  for (std::size_t c = 0; c < 4; ++c) wp += raw[32 + c];
  return -(q + av * wv + ap * wp);
}

}  // namespace

TEST(EnvLayout, NamesAndDimensions) {
  const auto names = sb::observation_names(sbt::shipped().net);
  ASSERT_EQ(names.size(), sb::kObsDim);
  EXPECT_EQ(sb::kObsDim, 45u);
  EXPECT_EQ(names.front(), "W_sr.queue");
  EXPECT_EQ(names[kPedBase], "cw_W.wait_ped");
  EXPECT_EQ(names.back(), "in_transition");
}

TEST(EnvReset, EmptyNetworkAtPhaseOne) {
  sb::Environment env(sbt::shipped());
  const auto obs = env.reset(42);
  ASSERT_EQ(obs.size(), sb::kObsDim);
  for (std::size_t l = 0; l < sb::kObservedLanes; ++l) {
    EXPECT_EQ(obs[4 * l + 0], 0.0);
    EXPECT_EQ(obs[4 * l + 1], 0.0);
    EXPECT_EQ(obs[4 * l + 3], 0.0);
  }
  for (std::size_t c = 0; c < sb::kCrosswalks; ++c) EXPECT_EQ(obs[kPedBase + c], 0.0);
  for (int p = 1; p <= sb::kNumPhases; ++p) EXPECT_EQ(obs[kPhaseBase + static_cast<std::size_t>(p - 1)], p == 1 ? 1.0 : 0.0);
  EXPECT_EQ(obs.back(), 0.0);
}

TEST(EnvReset, Deterministic) {
  sb::Environment a(sbt::shipped()), b(sbt::shipped());
  EXPECT_EQ(a.reset(42), b.reset(42));
  std::vector<double> last_a, last_b;
  for (int i = 0; i < 300; ++i) {
    const int act = 2 + (i / 40) % 7;
    last_a = a.step(act).obs;
    last_b = b.step(act).obs;
    ASSERT_EQ(last_a, last_b);
  }
  EXPECT_EQ(sb::to_json(a.sim()), sb::to_json(b.sim()));
  EXPECT_EQ(a.reset(42), b.reset(42));
}

TEST(EnvReset, NormalizedWithinUnitInterval) {
  auto cfg = sbt::shipped();
  cfg.episode.normalize = true;
  sb::Environment env(cfg);
  auto in_unit = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0 && x <= 1.0; });
  };
  EXPECT_TRUE(in_unit(env.reset(42)));
  std::mt19937_64 rng(9);
  while (!env.done()) ASSERT_TRUE(in_unit(env.step(2 + static_cast<int>(rng() % 7)).obs));
}

TEST(EnvStep, EmptyNetworkRewardIsZero) {
  sb::Environment env(sbt::zero_demand());
  env.reset(1);
  for (int a = 2; a <= 8; ++a) EXPECT_EQ(env.step(a).reward, 0.0);
}

TEST(EnvReward, HandExample) {
  std::vector<double> raw(sb::kObsDim, 0.0);
  raw[0] = 2;          // W_sr queue
  raw[4 * 2] = 4;      // E_sr queue
  raw[3] = 15;         // W_sr wait
  raw[4 * 5 + 3] = 5;  // N_l wait
  raw[kPedBase + 1] = 10;
  EXPECT_DOUBLE_EQ(sb::reward_from_raw(raw, {0.2, 0.2}), -12.0);
}

TEST(EnvStep, RewardRecomputesFromRawState) {
  auto cfg = sbt::shipped();
  cfg.reward = {0.35, 0.15};
  cfg.episode.normalize = true;
  sb::Environment env(cfg);
  env.reset(5);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1500; ++i) {
    const auto r = env.step(2 + static_cast<int>(rng() % 7));
    ASSERT_EQ(r.reward, hand_reward(r.info.raw, 0.35, 0.15));
  }
}

TEST(EnvStep, EpisodeEndsAtHorizon) {
  sb::Environment env(sbt::zero_demand());
  env.reset(3);
  for (int i = 1; i < sb::kHorizonSeconds; ++i) {
    const auto r = env.step(3);
    ASSERT_FALSE(r.done);
    ASSERT_EQ(r.info.t, i);
  }
  const auto last = env.step(3);
  EXPECT_TRUE(last.done);
  EXPECT_EQ(last.info.t, sb::kHorizonSeconds);
  try {
    env.step(3);
    FAIL();
  } catch (const sb::UsageError& e) {
    EXPECT_STREQ(e.what(), "episode is done; call reset");
  }
  env.reset(3);
  EXPECT_FALSE(env.step(3).done);
}

TEST(EnvStep, MisuseRaisesUsageError) {
  sb::Environment env(sbt::zero_demand());
  try {
    env.step(3);
    FAIL();
  } catch (const sb::UsageError& e) {
    EXPECT_STREQ(e.what(), "no active episode");
  }
  env.reset(1);
  EXPECT_THROW(env.step(1), sb::UsageError);
  EXPECT_THROW(env.step(9), sb::UsageError);
}

TEST(EnvStep, MaskPredictsAcceptance) {
  sb::Environment env(sbt::shipped());
  env.reset(8);
  std::mt19937_64 rng(8);
  int rejected = 0;
  while (!env.done()) {
    const auto mask = env.action_mask();
    const int a = 2 + static_cast<int>(rng() % 7);
    const auto r = env.step(a);
    ASSERT_EQ(r.info.wish_accepted, mask[static_cast<std::size_t>(a - 2)]) << "t " << r.info.t;
    rejected += !r.info.wish_accepted;
  }
  EXPECT_GT(rejected, 0);
}

TEST(EnvStep, MaskCases) {
  sb::Environment env(sbt::zero_demand());
  env.reset(1);
  auto m = env.action_mask();
  EXPECT_TRUE(m[0] && m[1] && m[2] && m[4] && m[5] && m[6]);
  EXPECT_FALSE(m[3]);  // phase 5 needs phase 4 first
  env.step(3);
  m = env.action_mask();
  EXPECT_EQ(std::count(m.begin(), m.end(), true), 1);  // mid-transition: only the target
  EXPECT_TRUE(m[1]);
}

TEST(EnvConfig, RejectsBadSettings) {
  auto cfg = sbt::shipped();
  cfg.reward.alpha_veh = -0.1;
  EXPECT_THROW(sb::validate(cfg), sb::ConfigError);
  cfg = sbt::shipped();
  cfg.episode.step_dt = 2.0;
  EXPECT_THROW(sb::validate(cfg), sb::ConfigError);
  EXPECT_THROW(sb::load_env_config("/nonexistent.json", "/nonexistent.json", "/nonexistent.csv"), sb::ConfigError);
}

TEST(EnvConfig, HashTracksContent) {
  auto cfg = sbt::shipped();
  const auto h = sb::config_hash(cfg);
  EXPECT_EQ(h, sb::config_hash(sbt::shipped()));
  cfg.reward.alpha_ped = 0.3;
  EXPECT_NE(h, sb::config_hash(cfg));
}
