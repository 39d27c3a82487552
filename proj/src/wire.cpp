#include "signalbench/wire.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "signalbench/errors.hpp"

namespace signalbench::wire {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 12> kTypeNames = {
    "hello", "hello_ack", "put", "put_ack", "reset", "step",
    "mask",  "close",     "obs", "mask_ack", "bye",  "error"};

/// Reads fields of one message and remembers which ones were consumed so leftovers
/// can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
    if (!j_.is_object()) throw ProtocolError(ctx_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) throw ProtocolError(ctx_ + ": missing field '" + key + "'");
    used_.insert(key);
    return *it;
  }

  std::int64_t i64(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_integer()) throw ProtocolError(ctx_ + "." + key + ": expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t u64(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_unsigned()) throw ProtocolError(ctx_ + "." + key + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  int i32(const std::string& key, int lo, int hi) {
    const std::int64_t v = i64(key);
    if (v < lo || v > hi)
      throw ProtocolError(ctx_ + "." + key + ": " + std::to_string(v) + " outside " +
                          std::to_string(lo) + ".." + std::to_string(hi));
    return static_cast<int>(v);
  }

  bool boolean(const std::string& key) {
    const json& v = get(key);
    if (!v.is_boolean()) throw ProtocolError(ctx_ + "." + key + ": expected a boolean");
    return v.get<bool>();
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) throw ProtocolError(ctx_ + "." + key + ": expected a number");
    return v.get<double>();
  }

  std::string str(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) throw ProtocolError(ctx_ + "." + key + ": expected a string");
    return v.get<std::string>();
  }

  const std::string& ctx() const { return ctx_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ProtocolError(ctx_ + ": unknown field '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string ctx_;
  std::set<std::string> used_;
};

json codes_json(const SignalStateVector& colors) {
  json o = json::object();
  for (SignalGroup g : kAllGroups) o[std::string(to_string(g))] = color_code(colors[index(g)]);
  return o;
}

SignalStateVector read_codes(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw ProtocolError(ctx + ": expected an object of signal codes");
  CodeMap codes;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto g = parse_group(it.key());
    if (!g) throw ProtocolError(ctx + ": unknown field '" + it.key() + "'");
    if (!it.value().is_number_integer())
      throw ProtocolError(ctx + "." + it.key() + ": expected an integer code");
    codes[*g] = it.value().get<int>();
  }
  try {
    return codes_to_colors(codes);
  } catch (const ProtocolError& e) {
    throw ProtocolError(ctx + ": " + e.what());
  }
}

json mask_json(const std::array<bool, kNumActions>& m) {
  json a = json::array();
  for (bool b : m) a.push_back(b);
  return a;
}

std::array<bool, kNumActions> read_mask(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != kNumActions)
    throw ProtocolError(ctx + ": expected an array of 7 booleans");
  std::array<bool, kNumActions> m{};
  for (std::size_t i = 0; i < kNumActions; ++i) {
    if (!j[i].is_boolean()) throw ProtocolError(ctx + ": expected an array of 7 booleans");
    m[i] = j[i].get<bool>();
  }
  return m;
}

json doubles_json(const std::vector<double>& v, const char* ctx) {
  json a = json::array();
  for (double x : v) {
    if (!std::isfinite(x)) throw ProtocolError(std::string(ctx) + ": non-finite value");
    a.push_back(x);
  }
  return a;
}

std::vector<double> read_doubles(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw ProtocolError(ctx + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const json& x : j) {
    if (!x.is_number()) throw ProtocolError(ctx + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

void check_wish(const std::map<std::string, int>& ap) {
  if (ap.size() != 1 || !ap.count("phase_wish"))
    throw ProtocolError("put.ap_values: exactly one key 'phase_wish' expected");
  const int w = ap.at("phase_wish");
  if (w < kFirstWish || w > kNumPhases)
    throw ProtocolError("put.ap_values.phase_wish: " + std::to_string(w) + " outside 2..8");
}

json response_body(const WireResponse& r) {
  if (r.active_phase < 1 || r.active_phase > kNumPhases)
    throw ProtocolError("put_ack.active_phase: outside 1..8");
  json o = {{"seq", r.seq},
            {"active_phase", r.active_phase},
            {"in_transition", r.in_transition},
            {"signal_codes", codes_json(r.signals)}};
  if (r.wish) o["wish"] = {{"accepted", r.wish->accepted}, {"reason", r.wish->reason}};
  if (r.mask) o["mask"] = mask_json(*r.mask);
  return o;
}

WireResponse read_response_body(Reader& rd) {
  WireResponse r;
  r.seq = rd.i64("seq");
  r.active_phase = rd.i32("active_phase", 1, kNumPhases);
  r.in_transition = rd.boolean("in_transition");
  r.signals = read_codes(rd.get("signal_codes"), rd.ctx() + ".signal_codes");
  if (rd.has("wish")) {
    Reader w(rd.get("wish"), rd.ctx() + ".wish");
    r.wish = WishStatus{w.boolean("accepted"), w.str("reason")};
    w.finish();
  }
  if (rd.has("mask")) r.mask = read_mask(rd.get("mask"), rd.ctx() + ".mask");
  return r;
}

json to_json(const Message& m) {
  json o = json::object();
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, Hello>) {
          o = {{"session", msg.session},
               {"protocol_version", msg.protocol_version},
               {"config_hash", msg.config_hash}};
        } else if constexpr (std::is_same_v<T, HelloAck>) {
          o = {{"session", msg.session},
               {"protocol_version", msg.protocol_version},
               {"config_hash", msg.config_hash},
               {"obs_dim", msg.obs_dim},
               {"action_count", msg.action_count}};
          if (msg.controller) o["controller"] = response_body(*msg.controller);
        } else if constexpr (std::is_same_v<T, WireRequest>) {
          check_wish(msg.ap_values);
          o = {{"seq", msg.seq},
               {"sim_time", msg.sim_time},
               {"ap_values", msg.ap_values},
               {"feedback", codes_json(msg.feedback)}};
        } else if constexpr (std::is_same_v<T, WireResponse>) {
          o = response_body(msg);
        } else if constexpr (std::is_same_v<T, ResetRequest>) {
          o = {{"seq", msg.seq}, {"seed", msg.seed}};
        } else if constexpr (std::is_same_v<T, StepRequest>) {
          o = {{"seq", msg.seq}, {"action", msg.action}};
        } else if constexpr (std::is_same_v<T, MaskRequest> || std::is_same_v<T, CloseRequest> ||
                             std::is_same_v<T, Bye>) {
          o = {{"seq", msg.seq}};
        } else if constexpr (std::is_same_v<T, ObsResponse>) {
          o = {{"seq", msg.seq},
               {"obs", doubles_json(msg.obs, "obs.obs")},
               {"reward", msg.reward},
               {"done", msg.done},
               {"info",
                {{"t", msg.info.t},
                 {"wish_accepted", msg.info.wish_accepted},
                 {"reject_reason", msg.info.reject_reason},
                 {"current_phase", msg.info.current_phase},
                 {"in_transition", msg.info.in_transition},
                 {"departed", msg.info.departed},
                 {"raw", doubles_json(msg.info.raw, "obs.info.raw")}}}};
          if (!std::isfinite(msg.reward)) throw ProtocolError("obs.reward: non-finite value");
        } else if constexpr (std::is_same_v<T, MaskResponse>) {
          o = {{"seq", msg.seq}, {"mask", mask_json(msg.mask)}};
        } else if constexpr (std::is_same_v<T, ErrorResponse>) {
          o = {{"seq", msg.seq}, {"message", msg.message}};
        }
      },
      m);
  o["type"] = type_name(m);
  return o;
}

Message from_json(const json& j) {
  if (!j.is_object()) throw ProtocolError("frame: expected a JSON object");
  auto it = j.find("type");
  if (it == j.end() || !it->is_string()) throw ProtocolError("frame: missing field 'type'");
  const std::string type = it->get<std::string>();
  Reader rd(j, type);
  rd.get("type");
  Message out;
  if (type == "hello") {
    out = Hello{rd.str("session"), rd.i32("protocol_version", 0, 1 << 20), rd.str("config_hash")};
  } else if (type == "hello_ack") {
    HelloAck a;
    a.session = rd.str("session");
    a.protocol_version = rd.i32("protocol_version", 0, 1 << 20);
    a.config_hash = rd.str("config_hash");
    a.obs_dim = rd.i32("obs_dim", 0, 1 << 20);
    a.action_count = rd.i32("action_count", 0, 1 << 20);
    if (rd.has("controller")) {
      Reader c(rd.get("controller"), "hello_ack.controller");
      a.controller = read_response_body(c);
      c.finish();
    }
    out = a;
  } else if (type == "put") {
    WireRequest r;
    r.seq = rd.i64("seq");
    r.sim_time = rd.i32("sim_time", 0, 1 << 30);
    const json& ap = rd.get("ap_values");
    if (!ap.is_object()) throw ProtocolError("put.ap_values: expected an object");
    for (auto a = ap.begin(); a != ap.end(); ++a) {
      if (a.key() != "phase_wish") throw ProtocolError("put.ap_values: unknown field '" + a.key() + "'");
      if (!a.value().is_number_integer()) throw ProtocolError("put.ap_values.phase_wish: expected an integer");
      const auto w = a.value().get<std::int64_t>();
      if (w < kFirstWish || w > kNumPhases)
        throw ProtocolError("put.ap_values.phase_wish: " + std::to_string(w) + " outside 2..8");
      r.ap_values[a.key()] = static_cast<int>(w);
    }
    check_wish(r.ap_values);
    r.feedback = read_codes(rd.get("feedback"), "put.feedback");
    out = r;
  } else if (type == "put_ack") {
    out = read_response_body(rd);
  } else if (type == "reset") {
    out = ResetRequest{rd.i64("seq"), rd.u64("seed")};
  } else if (type == "step") {
    const auto seq = rd.i64("seq");
    out = StepRequest{seq, rd.i32("action", -(1 << 30), 1 << 30)};
  } else if (type == "mask") {
    out = MaskRequest{rd.i64("seq")};
  } else if (type == "close") {
    out = CloseRequest{rd.i64("seq")};
  } else if (type == "obs") {
    ObsResponse r;
    r.seq = rd.i64("seq");
    r.obs = read_doubles(rd.get("obs"), "obs.obs");
    r.reward = rd.number("reward");
    r.done = rd.boolean("done");
    Reader in(rd.get("info"), "obs.info");
    r.info.t = in.i32("t", 0, 1 << 30);
    r.info.wish_accepted = in.boolean("wish_accepted");
    r.info.reject_reason = in.str("reject_reason");
    r.info.current_phase = in.i32("current_phase", 1, kNumPhases);
    r.info.in_transition = in.boolean("in_transition");
    r.info.departed = in.u64("departed");
    r.info.raw = read_doubles(in.get("raw"), "obs.info.raw");
    in.finish();
    out = r;
  } else if (type == "mask_ack") {
    const auto seq = rd.i64("seq");
    out = MaskResponse{seq, read_mask(rd.get("mask"), "mask_ack.mask")};
  } else if (type == "bye") {
    out = Bye{rd.i64("seq")};
  } else if (type == "error") {
    const auto seq = rd.i64("seq");
    out = ErrorResponse{seq, rd.str("message")};
  } else {
    throw ProtocolError("frame: unknown message type '" + type + "'");
  }
  rd.finish();
  return out;
}

}  // namespace

int color_code(SignalColor c) {
  switch (c) {
    case SignalColor::Red: return 1;
    case SignalColor::RedYellow: return 2;
    case SignalColor::Green: return 3;
    case SignalColor::Yellow: return 4;
  }
  return 0;
}

SignalColor color_from_code(SignalGroup g, int code) {
  switch (code) {
    case 1: return SignalColor::Red;
    case 2: return SignalColor::RedYellow;
    case 3: return SignalColor::Green;
    case 4: return SignalColor::Yellow;
    default:
      throw ProtocolError("unknown signal code " + std::to_string(code) + " for group " +
                          std::string(to_string(g)));
  }
}

CodeMap colors_to_codes(const SignalStateVector& colors) {
  CodeMap m;
  for (SignalGroup g : kAllGroups) m[g] = color_code(colors[index(g)]);
  return m;
}

SignalStateVector codes_to_colors(const CodeMap& codes) {
  SignalStateVector out;
  for (SignalGroup g : kAllGroups) {
    auto it = codes.find(g);
    if (it == codes.end())
      throw ProtocolError("missing signal code for group " + std::string(to_string(g)));
    out[index(g)] = color_from_code(g, it->second);
  }
  return out;
}

std::string_view type_name(const Message& m) { return kTypeNames[m.index()]; }

// Invalid UTF-8 in free-text fields (echoed input in error messages) is replaced, not fatal.
std::string encode(const Message& m) {
  return to_json(m).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

Message decode(std::string_view frame) {
  if (!frame.empty() && frame.back() == '\n') frame.remove_suffix(1);
  if (frame.empty()) throw DecodeError("empty frame", 0);
  if (auto nl = frame.find('\n'); nl != std::string_view::npos)
    throw DecodeError("frame spans multiple lines", nl);
  json j;
  try {
    j = json::parse(frame.begin(), frame.end());
  } catch (const json::parse_error& e) {
    throw DecodeError("malformed frame: " + std::string(e.what()), e.byte > 0 ? e.byte - 1 : 0);
  }
  return from_json(j);
}

std::string encode_request(const WireRequest& r) { return encode(Message{r}); }

WireRequest decode_request(std::string_view frame) {
  Message m = decode(frame);
  if (auto* r = std::get_if<WireRequest>(&m)) return *r;
  throw ProtocolError("expected a put message, got '" + std::string(type_name(m)) + "'");
}

std::string encode_response(const WireResponse& r) { return encode(Message{r}); }

WireResponse decode_response(std::string_view frame) {
  Message m = decode(frame);
  if (auto* r = std::get_if<WireResponse>(&m)) return *r;
  throw ProtocolError("expected a put_ack message, got '" + std::string(type_name(m)) + "'");
}

}  // namespace signalbench::wire
