#pragma once

// Headless episodes with baseline policies, per-step CSV metrics and summaries.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "signalbench/env.hpp"
#include "signalbench/invariants.hpp"

namespace signalbench {

enum class PolicyKind { FixedTime, LongestQueue, WishFile, Random };

std::optional<PolicyKind> parse_policy(std::string_view s);
std::string_view to_string(PolicyKind k);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::FixedTime;
  /// fixed_time: (phase, seconds) pairs issued cyclically as wishes.
  std::vector<std::pair<int, int>> plan = {{3, 30}, {2, 10}, {7, 30}, {6, 10}};
  /// wish_file: one wish per step; the last one repeats once the list runs out.
  std::vector<int> wishes;
};

/// Reads whitespace-separated wishes in 2..8. Throws ConfigError.
std::vector<int> load_wish_file(const std::filesystem::path& path);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual void reset(std::uint64_t seed) = 0;
  /// Always returns a phase in 2..8.
  virtual int act(const Environment& env, const std::vector<double>& raw) = 0;
};

std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg);

struct EpisodeSummary {
  std::uint64_t seed = 0;
  int steps = 0;
  double total_reward = 0.0;
  double mean_queue = 0.0;  // mean over steps of the summed lane queues
  double total_wait = 0.0;  // vehicle-seconds stopped plus pedestrian-seconds waiting
  std::uint64_t throughput = 0;  // vehicles departed
  std::uint64_t rejected_wishes = 0;
  std::uint64_t violations = 0;  // only counted with invariant checking on
};

struct RunSummary {
  std::string policy;
  std::vector<EpisodeSummary> episodes;
  double mean_episode_reward = 0.0;
  double mean_queue = 0.0;
  double total_wait = 0.0;
  std::uint64_t throughput = 0;
  std::uint64_t violations = 0;
};

nlohmann::json to_json(const RunSummary& s);

using ControllerFactory = std::function<std::unique_ptr<SignalController>()>;

struct RunOptions {
  EnvConfig env;
  PolicyConfig policy;
  std::uint64_t seed = 42;  // episode i runs with seed + i
  int episodes = 1;
  std::filesystem::path out;  // empty: no files written
  int jobs = 1;
  bool assert_invariants = false;
  ControllerFactory controllers;  // empty: in-process logic unit
};

/// Header line of the per-step CSV.
std::string metrics_header(const NetworkConfig& net);

/// Runs one episode, writing one CSV row per step to `csv` when given. With a
/// monitor, every step is audited.
EpisodeSummary run_episode(Environment& env, Policy& policy, std::uint64_t seed, std::ostream* csv,
                           InvariantMonitor* monitor);

/// Runs all episodes (optionally across worker threads), writes
/// <out>/episode_<seed>.csv and <out>/summary.json. Throws std::runtime_error with
/// the path on I/O failure.
RunSummary run(const RunOptions& opts);

}  // namespace signalbench
