#pragma once

// Episodic reset/step environment over the simulator, the signal controller and
// the demand model.
//
// Observation layout (un-normalized "raw" vector, 45 entries):
//   for each lane in W_sr, W_l, E_sr, E_l, N_sr, N_l, S_sr, S_l:
//       queue, wave, avg_speed, wait_veh
//   for each crosswalk in cw_W, cw_E, cw_N, cw_S:  wait_ped
//   phase one-hot over phases 1..8
//   in_transition flag
//
// Reward: -(sum queue + alpha_veh * sum wait_veh + alpha_ped * sum wait_ped), taken
// on the state after the step.

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "signalbench/controller.hpp"
#include "signalbench/demand.hpp"
#include "signalbench/network.hpp"
#include "signalbench/sim.hpp"
#include "signalbench/tslu.hpp"
#include "signalbench/wire.hpp"

namespace signalbench {

struct RewardConfig {
  double alpha_veh = 0.2;
  double alpha_ped = 0.2;
};

struct EpisodeConfig {
  int horizon = kHorizonSeconds;
  double step_dt = 1.0;
  bool normalize = false;
  double queue_cap = 40.0;
  double wave_cap = 40.0;
  double wait_cap = 300.0;
};

struct EnvConfig {
  NetworkConfig net;
  TsluConfig tslu;
  CountTable counts;
  RewardConfig reward;
  EpisodeConfig episode;
};

/// Directory holding the shipped configuration files.
std::filesystem::path default_config_dir();

EnvConfig load_env_config(const std::filesystem::path& net, const std::filesystem::path& tslu,
                          const std::filesystem::path& counts);
/// owl322.net.json, owl322.tslu.json and counts.synthetic.csv from default_config_dir().
EnvConfig default_env_config();

/// Throws ConfigError on invalid reward/episode settings or config files.
void validate(const EnvConfig& cfg);
std::string config_hash(const EnvConfig& cfg);

using StepInfo = wire::StepInfo;

struct StepResult {
  std::vector<double> obs;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

/// Lanes of the observation, in layout order.
std::vector<LaneRef> observed_lanes(const NetworkConfig& net);
std::vector<std::string> observation_names(const NetworkConfig& net);

inline constexpr std::size_t kLaneFeatures = 4;
inline constexpr std::size_t kObservedLanes = 8;
inline constexpr std::size_t kCrosswalks = 4;
inline constexpr std::size_t kObsDim = kObservedLanes * kLaneFeatures + kCrosswalks + kNumPhases + 1;

/// Sums the reward formula over a raw observation vector.
double reward_from_raw(const std::vector<double>& raw, const RewardConfig& rc);

class Environment {
 public:
  /// `controller` defaults to an in-process logic unit built from cfg.tslu.
  explicit Environment(EnvConfig cfg, std::unique_ptr<SignalController> controller = nullptr);

  std::vector<double> reset(std::uint64_t seed);
  StepResult step(int action);
  std::array<bool, kNumActions> action_mask() const;

  bool done() const { return done_; }
  bool active() const { return active_; }
  int t() const { return sim_.t; }
  const SimState& sim() const { return sim_; }
  const SignalController& controller() const { return *controller_; }
  const EnvConfig& config() const { return cfg_; }
  const Observations& last_observations() const { return last_obs_; }
  std::size_t obs_dim() const { return kObsDim; }
  /// Un-normalized observation of the current state.
  std::vector<double> raw_observation() const { return raw_state(last_obs_); }

 private:
  std::vector<double> raw_state(const Observations& o) const;
  std::vector<double> normalized(const std::vector<double>& raw) const;

  EnvConfig cfg_;
  SpawnProcess proc_;
  std::vector<LaneRef> lanes_;
  std::unique_ptr<SignalController> controller_;
  SimState sim_;
  Observations last_obs_;
  bool active_ = false;
  bool done_ = false;
};

}  // namespace signalbench
