#pragma once

// Signal controller backends for the environment: the logic unit in-process, or
// behind the put/put_ack wire protocol.

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "signalbench/tslu.hpp"
#include "signalbench/wire.hpp"

namespace signalbench {

struct ControllerTick {
  Decision decision;
  SignalStateVector signals = all_red();
};

class SignalController {
 public:
  virtual ~SignalController() = default;

  /// Back to phase 1, all red.
  virtual void reset() = 0;
  /// Submit the phase wish, then advance one second.
  virtual ControllerTick step(int wish, int sim_time) = 0;

  virtual std::array<bool, kNumActions> mask() const = 0;
  virtual int active_phase() const = 0;
  virtual bool in_transition() const = 0;
  virtual SignalStateVector signals() const = 0;
};

class LocalController final : public SignalController {
 public:
  explicit LocalController(TsluConfig cfg) : cfg_(std::move(cfg)) {}

  void reset() override { state_ = initial_controller(); }
  ControllerTick step(int wish, int sim_time) override;
  std::array<bool, kNumActions> mask() const override { return action_mask(state_, cfg_); }
  int active_phase() const override { return signalbench::active_phase(state_); }
  bool in_transition() const override { return state_.in_transition; }
  SignalStateVector signals() const override { return state_.colors(); }

  const ControllerState& state() const { return state_; }
  const TsluConfig& config() const { return cfg_; }

 private:
  TsluConfig cfg_;
  ControllerState state_ = initial_controller();
};

/// Server side of a line-framed session: one reply frame per request frame.
class LineSession {
 public:
  virtual ~LineSession() = default;
  /// Returns the encoded reply. After an error reply or a close, finished() is true.
  virtual std::string handle(std::string_view frame) = 0;
  virtual bool finished() const = 0;
};

/// Signal-controller session: hello, then put / reset / close requests.
class TsluSession final : public LineSession {
 public:
  explicit TsluSession(TsluConfig cfg);

  std::string handle(std::string_view frame) override;
  bool finished() const override { return finished_; }

 private:
  wire::WireResponse status(std::int64_t seq, std::optional<wire::WishStatus> wish) const;
  std::string fail(std::int64_t seq, const std::string& message);

  TsluConfig cfg_;
  std::string hash_;
  ControllerState state_ = initial_controller();
  bool greeted_ = false;
  bool finished_ = false;
  std::int64_t last_seq_ = -1;
};

std::string config_hash(const TsluConfig& cfg);

/// Carries one request frame to a session and returns its reply frame.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string exchange(const std::string& frame) = 0;
};

/// Hands frames straight to an in-memory session (still fully encoded/decoded).
class LoopbackTransport final : public Transport {
 public:
  explicit LoopbackTransport(std::unique_ptr<LineSession> session) : session_(std::move(session)) {}
  std::string exchange(const std::string& frame) override { return session_->handle(frame); }

 private:
  std::unique_ptr<LineSession> session_;
};

/// Client side of the signal-controller protocol.
class RemoteController final : public SignalController {
 public:
  /// Performs the hello handshake. Throws ProtocolError on a refused session.
  RemoteController(std::unique_ptr<Transport> transport, std::string session_id,
                   std::string expected_hash = {});

  void reset() override;
  ControllerTick step(int wish, int sim_time) override;
  std::array<bool, kNumActions> mask() const override { return mask_; }
  int active_phase() const override { return active_phase_; }
  bool in_transition() const override { return in_transition_; }
  SignalStateVector signals() const override { return signals_; }

 private:
  wire::Message roundtrip(const wire::Message& m);
  void absorb(const wire::WireResponse& r);

  std::unique_ptr<Transport> transport_;
  std::int64_t seq_ = 0;
  int active_phase_ = 1;
  bool in_transition_ = false;
  SignalStateVector signals_ = all_red();
  std::array<bool, kNumActions> mask_{};
};

}  // namespace signalbench
