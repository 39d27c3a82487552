// signalbench command-line front end.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "signalbench/errors.hpp"
#include "signalbench/runner.hpp"
#include "signalbench/service.hpp"

namespace sb = signalbench;

namespace {

struct ConfigPaths {
  std::string net, tslu, counts;

  void add(CLI::App* cmd, bool with_counts = true) {
    const auto dir = sb::default_config_dir();
    net = (dir / "owl322.net.json").string();
    tslu = (dir / "owl322.tslu.json").string();
    counts = (dir / "counts.synthetic.csv").string();
    cmd->add_option("--net", net, "network JSON")->capture_default_str();
    cmd->add_option("--tslu", tslu, "signal program JSON")->capture_default_str();
    if (with_counts) cmd->add_option("--counts", counts, "demand counts CSV")->capture_default_str();
  }
};

struct RewardFlags {
  double alpha_veh = 0.2, alpha_ped = 0.2;
  bool normalize = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--alpha-veh", alpha_veh, "reward weight of vehicle waiting time")->capture_default_str();
    cmd->add_option("--alpha-ped", alpha_ped, "reward weight of pedestrian waiting time")->capture_default_str();
    cmd->add_flag("--normalize", normalize, "scale observations to [0,1]");
  }
  void apply(sb::EnvConfig& cfg) const {
    cfg.reward.alpha_veh = alpha_veh;
    cfg.reward.alpha_ped = alpha_ped;
    cfg.episode.normalize = normalize;
  }
};

sb::ControllerFactory remote_controllers(const std::string& addr, const sb::TsluConfig& tslu) {
  if (addr.empty()) return {};
  const sb::Endpoint ep = sb::parse_endpoint(addr);
  const std::string hash = sb::config_hash(tslu);
  return [ep, hash] {
    return std::make_unique<sb::RemoteController>(std::make_unique<sb::TcpTransport>(ep), "env", hash);
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic traffic-signal control benchmark"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run headless episodes with a baseline policy");
  ConfigPaths run_paths;
  run_paths.add(run);
  RewardFlags run_reward;
  run_reward.add(run);
  std::string policy = "fixed_time", wish_file, tslu_addr, out;
  std::uint64_t seed = 42;
  int episodes = 1, jobs = 1;
  bool assert_invariants = false;
  run->add_option("--policy", policy, "fixed_time | longest_queue | wish_file | random")
      ->check(CLI::IsMember({"fixed_time", "longest_queue", "wish_file", "random"}))
      ->capture_default_str();
  run->add_option("--wish-file", wish_file, "wishes for the wish_file policy")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "seed of the first episode")->capture_default_str();
  run->add_option("--episodes", episodes, "number of episodes")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--out", out, "directory for per-episode CSVs and summary.json");
  run->add_option("--tslu-addr", tslu_addr, "use a signal controller served at host:port");
  run->add_flag("--assert-invariants", assert_invariants, "audit every step; fail on the first violation");

  // serve
  auto* serve = app.add_subcommand("serve", "serve environment sessions over TCP");
  ConfigPaths serve_paths;
  serve_paths.add(serve);
  RewardFlags serve_reward;
  serve_reward.add(serve);
  std::string listen = "127.0.0.1:7700";
  serve->add_option("--listen", listen, "host:port")->capture_default_str();

  // serve-tslu
  auto* serve_tslu = app.add_subcommand("serve-tslu", "serve the signal controller over TCP");
  ConfigPaths tslu_paths;
  tslu_paths.add(serve_tslu, false);
  std::string tslu_listen = "127.0.0.1:7701";
  serve_tslu->add_option("--listen", tslu_listen, "host:port")->capture_default_str();

  // validate-config
  auto* check = app.add_subcommand("validate-config", "load and validate configuration files");
  ConfigPaths check_paths;
  check_paths.add(check);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      sb::RunOptions opts;
      opts.env = sb::load_env_config(run_paths.net, run_paths.tslu, run_paths.counts);
      run_reward.apply(opts.env);
      opts.policy.kind = *sb::parse_policy(policy);
      if (opts.policy.kind == sb::PolicyKind::WishFile) {
        if (wish_file.empty()) throw sb::ConfigError("--policy wish_file needs --wish-file");
        opts.policy.wishes = sb::load_wish_file(wish_file);
      }
      opts.seed = seed;
      opts.episodes = episodes;
      opts.jobs = jobs;
      opts.out = out;
      opts.assert_invariants = assert_invariants;
      opts.controllers = remote_controllers(tslu_addr, opts.env.tslu);
      const sb::RunSummary s = sb::run(opts);
      std::cout << sb::to_json(s).dump(2) << '\n';
      return 0;
    }
    if (*serve) {
      sb::EnvConfig cfg = sb::load_env_config(serve_paths.net, serve_paths.tslu, serve_paths.counts);
      serve_reward.apply(cfg);
      sb::validate(cfg);
      sb::LineServer server([cfg] { return std::make_unique<sb::EnvSession>(cfg); });
      server.bind(sb::parse_endpoint(listen));
      std::cerr << "listening on port " << server.port() << std::endl;
      server.run();
      return 0;
    }
    if (*serve_tslu) {
      const sb::NetworkConfig net = sb::load_network(tslu_paths.net);
      const sb::TsluConfig tslu = sb::load_tslu(tslu_paths.tslu, net);
      sb::LineServer server([tslu] { return std::make_unique<sb::TsluSession>(tslu); });
      server.bind(sb::parse_endpoint(tslu_listen));
      std::cerr << "listening on port " << server.port() << std::endl;
      server.run();
      return 0;
    }
    if (*check) {
      const sb::EnvConfig cfg = sb::load_env_config(check_paths.net, check_paths.tslu, check_paths.counts);
      sb::validate(cfg);
      std::cout << "ok " << sb::config_hash(cfg) << '\n';
      return 0;
    }
  } catch (const sb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
