#include "signalbench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "signalbench/errors.hpp"

namespace signalbench {

std::optional<PolicyKind> parse_policy(std::string_view s) {
  if (s == "fixed_time") return PolicyKind::FixedTime;
  if (s == "longest_queue") return PolicyKind::LongestQueue;
  if (s == "wish_file") return PolicyKind::WishFile;
  if (s == "random") return PolicyKind::Random;
  return std::nullopt;
}

std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::FixedTime: return "fixed_time";
    case PolicyKind::LongestQueue: return "longest_queue";
    case PolicyKind::WishFile: return "wish_file";
    case PolicyKind::Random: return "random";
  }
  return "?";
}

std::vector<int> load_wish_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open wish file " + path.string());
  std::vector<int> out;
  std::string tok;
  while (in >> tok) {
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size() || v < kFirstWish || v > kNumPhases)
      throw ConfigError(path.string() + ": bad wish '" + tok + "' (expected 2..8)");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(path.string() + ": no wishes");
  return out;
}

namespace {

class FixedTime final : public Policy {
 public:
  explicit FixedTime(std::vector<std::pair<int, int>> plan) : plan_(std::move(plan)) {
    if (plan_.empty()) throw ConfigError("fixed_time plan is empty");
    for (auto [phase, secs] : plan_) {
      if (phase < kFirstWish || phase > kNumPhases) throw ConfigError("fixed_time phase outside 2..8");
      if (secs <= 0) throw ConfigError("fixed_time durations must be positive");
      cycle_ += secs;
    }
  }
  void reset(std::uint64_t) override {}
  int act(const Environment& env, const std::vector<double>&) override {
    int r = env.t() % cycle_;
    for (auto [phase, secs] : plan_) {
      if (r < secs) return phase;
      r -= secs;
    }
    return plan_.back().first;
  }

 private:
  std::vector<std::pair<int, int>> plan_;
  int cycle_ = 0;
};

class LongestQueue final : public Policy {
 public:
  void reset(std::uint64_t) override {}
  int act(const Environment& env, const std::vector<double>& raw) override {
    const auto& cfg = env.config();
    const auto lanes = observed_lanes(cfg.net);
    const auto mask = env.action_mask();
    const int current = env.controller().active_phase();
    int best = -1;
    double best_score = -1.0;
    for (int phase = kFirstWish; phase <= kNumPhases; ++phase) {
      if (!mask[static_cast<std::size_t>(phase - kFirstWish)]) continue;
      const SignalStateVector colors = cfg.tslu.phases.colors(phase);
      double score = 0.0;
      for (std::size_t i = 0; i < lanes.size(); ++i)
        if (movement_permitted(cfg.net, lanes[i], colors)) score += raw[i * kLaneFeatures];
      // Waiting pedestrians count as one queued unit per served crosswalk.
      for (std::size_t c = 0; c < kCrosswalks; ++c)
        if (raw[kObservedLanes * kLaneFeatures + c] > 0.0 &&
            colors[index(crosswalk_group(kAllArms[c]))] == SignalColor::Green)
          score += 1.0;
      const bool better = score > best_score || (score == best_score && phase == current);
      if (better) {
        best = phase;
        best_score = score;
      }
    }
    return best < 0 ? std::max(current, kFirstWish) : best;
  }
};

class WishReplay final : public Policy {
 public:
  explicit WishReplay(std::vector<int> wishes) : wishes_(std::move(wishes)) {
    if (wishes_.empty()) throw ConfigError("wish_file policy needs at least one wish");
  }
  void reset(std::uint64_t) override { next_ = 0; }
  int act(const Environment&, const std::vector<double>&) override {
    const int w = wishes_[std::min(next_, wishes_.size() - 1)];
    ++next_;
    return w;
  }

 private:
  std::vector<int> wishes_;
  std::size_t next_ = 0;
};

class RandomWish final : public Policy {
 public:
  void reset(std::uint64_t seed) override { rng_.seed(seed ^ 0x5eed'0f'a11ULL); }
  int act(const Environment&, const std::vector<double>&) override {
    return kFirstWish + static_cast<int>(rng_() % kNumActions);
  }

 private:
  Rng rng_;
};

void put_number(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, p);
}

void put_number(std::string& out, std::uint64_t v) {
  char buf[24];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, p);
}

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg) {
  switch (cfg.kind) {
    case PolicyKind::FixedTime: return std::make_unique<FixedTime>(cfg.plan);
    case PolicyKind::LongestQueue: return std::make_unique<LongestQueue>();
    case PolicyKind::WishFile: return std::make_unique<WishReplay>(cfg.wishes);
    case PolicyKind::Random: return std::make_unique<RandomWish>();
  }
  throw ConfigError("unknown policy");
}

std::string metrics_header(const NetworkConfig& net) {
  std::string h = "t,phase,in_transition,wish,wish_accepted,reward,cum_reward,departed";
  for (const LaneRef& r : observed_lanes(net)) {
    const std::string& id = net.arm(r.arm).lanes[r.slot].id;
    for (const char* f : {"_queue", "_wave", "_wait"}) h += "," + id + f;
  }
  for (Arm a : kAllArms) h += "," + net.arm(a).crosswalk.id + "_wait_ped";
  return h;
}

EpisodeSummary run_episode(Environment& env, Policy& policy, std::uint64_t seed, std::ostream* csv,
                           InvariantMonitor* monitor) {
  policy.reset(seed);
  env.reset(seed);
  if (monitor) monitor->reset();
  if (csv) *csv << metrics_header(env.config().net) << '\n';

  EpisodeSummary sum;
  sum.seed = seed;
  double queue_total = 0.0;
  std::vector<double> raw = env.raw_observation();
  std::string line;
  while (!env.done()) {
    const int wish = policy.act(env, raw);
    const int second = env.t();
    StepResult r = env.step(wish);
    raw = std::move(r.info.raw);
    sum.total_reward += r.reward;
    ++sum.steps;
    if (!r.info.wish_accepted) ++sum.rejected_wishes;
    double q = 0.0;
    for (std::size_t i = 0; i < kObservedLanes; ++i) q += raw[i * kLaneFeatures];
    queue_total += q;

    if (monitor) {
      monitor->observe_signals(second, env.sim().signals, r.info.in_transition, r.info.current_phase);
      monitor->observe_sim(env.sim(), env.sim().signals);
    }
    if (csv) {
      line.clear();
      put_number(line, static_cast<std::uint64_t>(r.info.t));
      line += ',';
      put_number(line, static_cast<std::uint64_t>(r.info.current_phase));
      line += r.info.in_transition ? ",1," : ",0,";
      put_number(line, static_cast<std::uint64_t>(wish));
      line += r.info.wish_accepted ? ",1," : ",0,";
      put_number(line, r.reward);
      line += ',';
      put_number(line, sum.total_reward);
      line += ',';
      put_number(line, r.info.departed);
      for (std::size_t i = 0; i < kObservedLanes; ++i)
        for (std::size_t f : {0, 1, 3}) {
          line += ',';
          put_number(line, raw[i * kLaneFeatures + f]);
        }
      for (std::size_t c = 0; c < kCrosswalks; ++c) {
        line += ',';
        put_number(line, raw[kObservedLanes * kLaneFeatures + c]);
      }
      line += '\n';
      *csv << line;
    }
  }
  sum.mean_queue = sum.steps ? queue_total / sum.steps : 0.0;
  sum.total_wait = env.sim().total_vehicle_wait + env.sim().total_pedestrian_wait;
  sum.throughput = env.sim().total_departed();
  if (monitor) sum.violations = monitor->counts().total();
  return sum;
}

nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& e : s.episodes)
    eps.push_back({{"seed", e.seed},
                   {"steps", e.steps},
                   {"total_reward", e.total_reward},
                   {"mean_queue", e.mean_queue},
                   {"total_wait", e.total_wait},
                   {"throughput", e.throughput},
                   {"rejected_wishes", e.rejected_wishes},
                   {"violations", e.violations}});
  return {{"policy", s.policy},
          {"episodes", eps},
          {"mean_episode_reward", s.mean_episode_reward},
          {"mean_queue", s.mean_queue},
          {"total_wait", s.total_wait},
          {"throughput", s.throughput},
          {"violations", s.violations}};
}

RunSummary run(const RunOptions& opts) {
  if (opts.episodes < 1) throw ConfigError("episodes must be at least 1");
  if (opts.jobs < 1) throw ConfigError("jobs must be at least 1");
  validate(opts.env);
  make_policy(opts.policy);  // surface policy config errors before spawning workers
  if (!opts.out.empty()) std::filesystem::create_directories(opts.out);

  std::vector<EpisodeSummary> results(static_cast<std::size_t>(opts.episodes));
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    try {
      Environment env(opts.env, opts.controllers ? opts.controllers() : nullptr);
      auto policy = make_policy(opts.policy);
      std::optional<InvariantMonitor> monitor;
      if (opts.assert_invariants) monitor.emplace(opts.env.net, opts.env.tslu);
      for (int i; (i = next.fetch_add(1)) < opts.episodes;) {
        const std::uint64_t seed = opts.seed + static_cast<std::uint64_t>(i);
        std::ofstream file;
        if (!opts.out.empty()) {
          const auto path = opts.out / ("episode_" + std::to_string(seed) + ".csv");
          file.open(path, std::ios::binary);
          if (!file) throw std::runtime_error("cannot write " + path.string());
        }
        results[static_cast<std::size_t>(i)] =
            run_episode(env, *policy, seed, opts.out.empty() ? nullptr : &file, monitor ? &*monitor : nullptr);
        if (monitor && !monitor->clean()) {
          std::ostringstream msg;
          msg << "invariant violated in episode seed " << seed;
          if (!monitor->examples().empty())
            msg << " at t=" << monitor->examples().front().t << ": " << monitor->examples().front().what;
          throw std::runtime_error(msg.str());
        }
      }
    } catch (...) {
      std::lock_guard lock(err_mu);
      if (!first_error) first_error = std::current_exception();
      next.store(opts.episodes);
    }
  };

  const int n = std::min(opts.jobs, opts.episodes);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  RunSummary s;
  s.policy = std::string(to_string(opts.policy.kind));
  s.episodes = std::move(results);
  for (const auto& e : s.episodes) {
    s.mean_episode_reward += e.total_reward;
    s.mean_queue += e.mean_queue;
    s.total_wait += e.total_wait;
    s.throughput += e.throughput;
    s.violations += e.violations;
  }
  s.mean_episode_reward /= static_cast<double>(s.episodes.size());
  s.mean_queue /= static_cast<double>(s.episodes.size());

  if (!opts.out.empty()) {
    const auto path = opts.out / "summary.json";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << to_json(s).dump(2) << '\n';
  }
  return s;
}

}  // namespace signalbench
