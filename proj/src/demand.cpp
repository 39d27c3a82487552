#include "signalbench/demand.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json_util.hpp"
#include "signalbench/errors.hpp"

namespace signalbench {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s, const std::string& ctx) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError(ctx + ": expected an integer, got '" + std::string(s) + "'");
  return v;
}

std::optional<Arm> crosswalk_arm(const NetworkConfig& net, std::string_view id) {
  for (Arm a : kAllArms)
    if (net.arm(a).crosswalk.id == id) return a;
  return std::nullopt;
}

}  // namespace

CountTable parse_counts_csv(std::string_view text) {
  CountTable table;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> cells;
    for (std::size_t start = 0;;) {
      const auto comma = line.find(',', start);
      cells.push_back(trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const std::string ctx = "counts line " + std::to_string(line_no);
    if (!header_seen) {
      if (cells != std::vector<std::string_view>{"bin_start", "class", "from", "to", "count"})
        throw ConfigError(ctx + ": header must be bin_start,class,from,to,count");
      header_seen = true;
      continue;
    }
    if (cells.size() != 5) throw ConfigError(ctx + ": expected 5 columns");
    table.rows.push_back({parse_int(cells[0], ctx + " bin_start"), std::string(cells[1]),
                          std::string(cells[2]), std::string(cells[3]),
                          parse_int(cells[4], ctx + " count")});
  }
  if (!header_seen) throw ConfigError("counts: missing header");
  return table;
}

CountTable load_counts(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  try {
    return parse_counts_csv(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string to_csv(const CountTable& table) {
  std::ostringstream out;
  out << "bin_start,class,from,to,count\n";
  for (const CountRow& r : table.rows)
    out << r.bin_start << ',' << r.cls << ',' << r.from << ',' << r.to << ',' << r.count << '\n';
  return out.str();
}

SpawnProcess compile(const CountTable& counts, const NetworkConfig& net) {
  SpawnProcess proc;
  // Key order: class name, from, to. std::map keeps flows sorted per bin.
  std::array<std::map<std::tuple<std::string, std::string, std::string>, Flow>, kNumBins> bins;
  for (const CountRow& r : counts.rows) {
    const std::string ctx = "counts[" + std::to_string(r.bin_start) + "," + r.cls + "," + r.from +
                            "," + r.to + "]";
    if (r.bin_start < 0 || r.bin_start % kBinSeconds != 0 || r.bin_start >= kHorizonSeconds)
      throw ConfigError(ctx + ".bin_start: must be a multiple of 300 in [0, 4200)");
    if (r.count < 0) throw ConfigError(ctx + ".count: must be >= 0");
    if (r.count > kBinSeconds) throw ConfigError(ctx + ".count: per-second probability exceeds 1");
    Flow flow;
    flow.p = static_cast<double>(r.count) / kBinSeconds;
    if (r.cls == "pedestrian") {
      auto arm = crosswalk_arm(net, r.from);
      if (!arm) throw ConfigError(ctx + ".from: unknown crosswalk '" + r.from + "'");
      if (r.to != "fwd" && r.to != "rev") throw ConfigError(ctx + ".to: direction must be fwd or rev");
      flow.event = SpawnEvent::pedestrian(*arm, r.to == "rev");
    } else {
      auto cls = parse_vehicle_class(r.cls);
      if (!cls) throw ConfigError(ctx + ".class: unknown class '" + r.cls + "'");
      auto from = parse_arm(r.from);
      auto to = parse_arm(r.to);
      if (!from || !to) throw ConfigError(ctx + ": unknown arm");
      auto mv = movement_between(*from, *to);
      if (!mv) throw ConfigError(ctx + ": U-turns are not modeled");
      if (!choose_lane(net, *from, *cls, *mv)) throw ConfigError(ctx + ": no lane serves this route");
      flow.event = SpawnEvent::vehicle(*cls, *from, *mv);
    }
    auto [it, inserted] = bins[static_cast<std::size_t>(r.bin_start / kBinSeconds)].emplace(
        std::make_tuple(r.cls, r.from, r.to), flow);
    if (!inserted) throw ConfigError(ctx + ": duplicate row");
  }
  for (std::size_t b = 0; b < bins.size(); ++b)
    for (auto& [key, flow] : bins[b]) proc.bins[b].push_back(flow);
  proc.buses = net.bus_timetable;
  for (const BusLine& line : proc.buses)
    for (int off : line.offsets)
      if (off < 0 || off >= kHorizonSeconds)
        throw ConfigError("bus_timetable.offsets: must lie in [0, 4200)");
  return proc;
}

std::vector<SpawnEvent> sample(const SpawnProcess& proc, int t, Rng& rng) {
  if (t < 0 || t >= kHorizonSeconds) throw std::out_of_range("sample: t outside [0, 4200)");
  std::vector<SpawnEvent> out;
  for (const Flow& f : proc.bins[static_cast<std::size_t>(t / kBinSeconds)]) {
    if (f.p <= 0.0) continue;
    if (f.p >= 1.0 || uniform01(rng) < f.p) out.push_back(f.event);
  }
  for (const BusLine& line : proc.buses)
    if (std::binary_search(line.offsets.begin(), line.offsets.end(), t))
      out.push_back(SpawnEvent::vehicle(VehicleClassId::Bus, line.arm, line.movement));
  return out;
}

}  // namespace signalbench
