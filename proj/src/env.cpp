#include "signalbench/env.hpp"

#include <algorithm>

#include "signalbench/errors.hpp"
#include "signalbench/hash.hpp"

#ifndef SIGNALBENCH_CONFIG_DIR
#define SIGNALBENCH_CONFIG_DIR "config"
#endif

namespace signalbench {

std::filesystem::path default_config_dir() {
  if (const char* env = std::getenv("SIGNALBENCH_CONFIG_DIR")) return env;
  return SIGNALBENCH_CONFIG_DIR;
}

EnvConfig load_env_config(const std::filesystem::path& net, const std::filesystem::path& tslu,
                          const std::filesystem::path& counts) {
  EnvConfig cfg;
  cfg.net = load_network(net);
  cfg.tslu = load_tslu(tslu, cfg.net);
  cfg.counts = load_counts(counts);
  validate(cfg);
  return cfg;
}

EnvConfig default_env_config() {
  const auto dir = default_config_dir();
  return load_env_config(dir / "owl322.net.json", dir / "owl322.tslu.json",
                         dir / "counts.synthetic.csv");
}

void validate(const EnvConfig& cfg) {
  validate(cfg.net);
  validate(cfg.tslu);
  compile(cfg.counts, cfg.net);
  if (!(cfg.reward.alpha_veh >= 0)) throw ConfigError("alpha_veh: must be >= 0");
  if (!(cfg.reward.alpha_ped >= 0)) throw ConfigError("alpha_ped: must be >= 0");
  const EpisodeConfig& e = cfg.episode;
  if (e.horizon < 1 || e.horizon > kHorizonSeconds) throw ConfigError("horizon: must lie in 1..4200");
  if (e.step_dt != 1.0) throw ConfigError("step_dt: the simulator runs at 1 s");
  if (!(e.queue_cap > 0 && e.wave_cap > 0 && e.wait_cap > 0))
    throw ConfigError("normalization caps: must be > 0");
}

std::string config_hash(const EnvConfig& cfg) {
  nlohmann::json j = {{"net", to_json(cfg.net)},
                      {"tslu", to_json(cfg.tslu)},
                      {"counts", to_csv(cfg.counts)},
                      {"alpha_veh", cfg.reward.alpha_veh},
                      {"alpha_ped", cfg.reward.alpha_ped},
                      {"horizon", cfg.episode.horizon},
                      {"normalize", cfg.episode.normalize}};
  return fnv1a_hex(j.dump());
}

std::vector<LaneRef> observed_lanes(const NetworkConfig& net) {
  std::vector<LaneRef> out;
  for (Arm a : kAllArms)
    for (LaneKind k : {LaneKind::SharedStraightRight, LaneKind::LeftTurn}) {
      const auto& lanes = net.arm(a).lanes;
      for (std::size_t i = 0; i < lanes.size(); ++i)
        if (lanes[i].kind == k) out.push_back(LaneRef{a, i});
    }
  return out;
}

std::vector<std::string> observation_names(const NetworkConfig& net) {
  std::vector<std::string> names;
  for (LaneRef r : observed_lanes(net)) {
    const std::string& id = net.arm(r.arm).lanes[r.slot].id;
    for (const char* f : {"queue", "wave", "avg_speed", "wait_veh"}) names.push_back(id + "." + f);
  }
  for (Arm a : kAllArms) names.push_back(net.arm(a).crosswalk.id + ".wait_ped");
  for (int p = 1; p <= kNumPhases; ++p) names.push_back("phase_" + std::to_string(p));
  names.push_back("in_transition");
  return names;
}

double reward_from_raw(const std::vector<double>& raw, const RewardConfig& rc) {
  double queue = 0.0, wait_veh = 0.0, wait_ped = 0.0;
  for (std::size_t l = 0; l < kObservedLanes; ++l) {
    queue += raw[l * kLaneFeatures + 0];
    wait_veh += raw[l * kLaneFeatures + 3];
  }
  for (std::size_t c = 0; c < kCrosswalks; ++c) wait_ped += raw[kObservedLanes * kLaneFeatures + c];
  return 0.0 - (queue + rc.alpha_veh * wait_veh + rc.alpha_ped * wait_ped);
}

Environment::Environment(EnvConfig cfg, std::unique_ptr<SignalController> controller)
    : cfg_(std::move(cfg)), controller_(std::move(controller)) {
  validate(cfg_);
  proc_ = compile(cfg_.counts, cfg_.net);
  lanes_ = observed_lanes(cfg_.net);
  if (lanes_.size() != kObservedLanes) throw ConfigError("network: expected 8 observed vehicle lanes");
  if (!controller_) controller_ = std::make_unique<LocalController>(cfg_.tslu);
}

std::vector<double> Environment::raw_state(const Observations& o) const {
  std::vector<double> v;
  v.reserve(kObsDim);
  for (LaneRef r : lanes_) {
    const LaneObservation& lo = o.at(r);
    v.insert(v.end(), {lo.queue, lo.wave, lo.avg_speed, lo.wait_veh});
  }
  for (double w : o.wait_ped) v.push_back(w);
  const int phase = controller_->active_phase();
  for (int p = 1; p <= kNumPhases; ++p) v.push_back(p == phase ? 1.0 : 0.0);
  v.push_back(controller_->in_transition() ? 1.0 : 0.0);
  return v;
}

std::vector<double> Environment::normalized(const std::vector<double>& raw) const {
  if (!cfg_.episode.normalize) return raw;
  const EpisodeConfig& e = cfg_.episode;
  auto clip = [](double x) { return std::clamp(x, 0.0, 1.0); };
  std::vector<double> v = raw;
  for (std::size_t l = 0; l < kObservedLanes; ++l) {
    double* f = &v[l * kLaneFeatures];
    f[0] = clip(f[0] / e.queue_cap);
    f[1] = clip(f[1] / e.wave_cap);
    f[2] = clip(f[2] / cfg_.net.arm(lanes_[l].arm).speed_limit);
    f[3] = clip(f[3] / e.wait_cap);
  }
  for (std::size_t c = 0; c < kCrosswalks; ++c) {
    double& w = v[kObservedLanes * kLaneFeatures + c];
    w = clip(w / e.wait_cap);
  }
  return v;
}

std::vector<double> Environment::reset(std::uint64_t seed) {
  sim_ = init(cfg_.net, seed);
  controller_->reset();
  active_ = true;
  done_ = false;
  last_obs_ = lane_observations(sim_, cfg_.net.detection_range);
  return normalized(raw_state(last_obs_));
}

StepResult Environment::step(int action) {
  if (!active_) throw UsageError("no active episode");
  if (done_) throw UsageError("episode is done; call reset");
  if (action < kFirstWish || action > kNumPhases)
    throw UsageError("action " + std::to_string(action) + " outside 2..8");

  const ControllerTick tick = controller_->step(action, sim_.t);
  const auto spawns = sample(proc_, sim_.t, sim_.rng);
  advance(sim_, tick.signals, spawns);
  last_obs_ = lane_observations(sim_, cfg_.net.detection_range);

  StepResult out;
  out.info.raw = raw_state(last_obs_);
  out.obs = normalized(out.info.raw);
  out.reward = reward_from_raw(out.info.raw, cfg_.reward);
  done_ = sim_.t >= cfg_.episode.horizon;
  out.done = done_;
  out.info.t = sim_.t;
  out.info.wish_accepted = tick.decision.accepted;
  out.info.reject_reason = tick.decision.reason;
  out.info.current_phase = controller_->active_phase();
  out.info.in_transition = controller_->in_transition();
  out.info.departed = sim_.total_departed();
  return out;
}

std::array<bool, kNumActions> Environment::action_mask() const { return controller_->mask(); }

}  // namespace signalbench
