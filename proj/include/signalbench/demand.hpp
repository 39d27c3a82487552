#pragma once

// Classed 5-minute counts -> per-second Bernoulli spawn processes.

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "signalbench/network.hpp"
#include "signalbench/sim.hpp"

namespace signalbench {

inline constexpr int kBinSeconds = 300;
inline constexpr int kNumBins = 14;
inline constexpr int kHorizonSeconds = kBinSeconds * kNumBins;  // 4200

/// One CSV row: `bin_start,class,from,to,count`. For pedestrians `class` is
/// "pedestrian", `from` a crosswalk id and `to` the walking direction (fwd|rev).
struct CountRow {
  int bin_start = 0;
  std::string cls;
  std::string from;
  std::string to;
  int count = 0;
};

struct CountTable {
  std::vector<CountRow> rows;
};

CountTable parse_counts_csv(std::string_view text);
CountTable load_counts(const std::filesystem::path& path);
std::string to_csv(const CountTable& table);

struct Flow {
  SpawnEvent event;
  double p = 0.0;  // per-second spawn probability
};

struct SpawnProcess {
  std::array<std::vector<Flow>, kNumBins> bins;  // each sorted by flow key
  std::vector<BusLine> buses;
};

/// p = count / 300 per row. Throws ConfigError for invalid rows, counts above 300
/// ("per-second probability exceeds 1") or routes no lane can serve.
SpawnProcess compile(const CountTable& counts, const NetworkConfig& net);

/// Spawn events for second t. One uniform draw per flow with 0 < p < 1, in flow-key
/// order, then scheduled buses. Throws std::out_of_range unless 0 <= t < 4200.
std::vector<SpawnEvent> sample(const SpawnProcess& proc, int t, Rng& rng);

}  // namespace signalbench
