#pragma once

// Line-framed JSON messages shared by the signal controller link (put / put_ack)
// and the environment service (hello, reset, step, mask, close). One message per
// line, UTF-8. Decoding is strict: unknown or missing fields are errors.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "signalbench/signals.hpp"
#include "signalbench/tslu.hpp"

namespace signalbench::wire {

inline constexpr int kProtocolVersion = 1;

/// Repo-defined signal code table: red=1, red_yellow=2, green=3, yellow=4.
int color_code(SignalColor c);
/// Throws ProtocolError naming the group and the code when `code` is not in the table.
SignalColor color_from_code(SignalGroup g, int code);

using CodeMap = std::map<SignalGroup, int>;
CodeMap colors_to_codes(const SignalStateVector& colors);
/// Requires an entry for all seven groups.
SignalStateVector codes_to_colors(const CodeMap& codes);

struct Hello {
  std::string session;
  int protocol_version = kProtocolVersion;
  std::string config_hash;  // empty: accept whatever the server runs
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct WishStatus {
  bool accepted = false;
  std::string reason;
  friend bool operator==(const WishStatus&, const WishStatus&) = default;
};

/// put: agent/environment -> signal controller.
struct WireRequest {
  std::int64_t seq = 0;
  int sim_time = 0;
  std::map<std::string, int> ap_values;  // must hold exactly "phase_wish" in 2..8
  SignalStateVector feedback = all_red();  // colors the environment currently shows
  friend bool operator==(const WireRequest&, const WireRequest&) = default;
};

/// put_ack: signal controller -> environment.
struct WireResponse {
  std::int64_t seq = 0;
  int active_phase = 1;
  bool in_transition = false;
  SignalStateVector signals = all_red();
  std::optional<WishStatus> wish;
  std::optional<std::array<bool, kNumActions>> mask;
  friend bool operator==(const WireResponse&, const WireResponse&) = default;
};

struct HelloAck {
  std::string session;
  int protocol_version = kProtocolVersion;
  std::string config_hash;
  int obs_dim = 0;
  int action_count = kNumActions;
  std::optional<WireResponse> controller;  // signal-controller sessions: initial state
  friend bool operator==(const HelloAck&, const HelloAck&) = default;
};

struct ResetRequest {
  std::int64_t seq = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const ResetRequest&, const ResetRequest&) = default;
};

struct StepRequest {
  std::int64_t seq = 0;
  int action = 0;  // phase 2..8
  friend bool operator==(const StepRequest&, const StepRequest&) = default;
};

struct MaskRequest {
  std::int64_t seq = 0;
  friend bool operator==(const MaskRequest&, const MaskRequest&) = default;
};

struct CloseRequest {
  std::int64_t seq = 0;
  friend bool operator==(const CloseRequest&, const CloseRequest&) = default;
};

struct StepInfo {
  int t = 0;
  bool wish_accepted = true;
  std::string reject_reason;
  int current_phase = 1;
  bool in_transition = false;
  std::uint64_t departed = 0;
  std::vector<double> raw;  // un-normalized observation
  friend bool operator==(const StepInfo&, const StepInfo&) = default;
};

struct ObsResponse {
  std::int64_t seq = 0;
  std::vector<double> obs;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
  friend bool operator==(const ObsResponse&, const ObsResponse&) = default;
};

struct MaskResponse {
  std::int64_t seq = 0;
  std::array<bool, kNumActions> mask{};
  friend bool operator==(const MaskResponse&, const MaskResponse&) = default;
};

struct Bye {
  std::int64_t seq = 0;
  friend bool operator==(const Bye&, const Bye&) = default;
};

struct ErrorResponse {
  std::int64_t seq = 0;
  std::string message;
  friend bool operator==(const ErrorResponse&, const ErrorResponse&) = default;
};

using Message = std::variant<Hello, HelloAck, WireRequest, WireResponse, ResetRequest, StepRequest,
                             MaskRequest, CloseRequest, ObsResponse, MaskResponse, Bye, ErrorResponse>;

/// One JSON object followed by '\n'. Throws ProtocolError if the record is invalid.
std::string encode(const Message& m);

/// Accepts one frame with or without its trailing newline. Malformed JSON throws
/// DecodeError carrying the byte offset; schema violations throw ProtocolError.
Message decode(std::string_view frame);

std::string encode_request(const WireRequest& r);
WireRequest decode_request(std::string_view frame);
std::string encode_response(const WireResponse& r);
WireResponse decode_response(std::string_view frame);

/// Message type tag as it appears on the wire ("put", "step", ...).
std::string_view type_name(const Message& m);

}  // namespace signalbench::wire
