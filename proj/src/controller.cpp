#include "signalbench/controller.hpp"

#include "signalbench/errors.hpp"
#include "signalbench/hash.hpp"

namespace signalbench {

using namespace wire;

ControllerTick LocalController::step(int wish, int /*sim_time*/) {
  ControllerTick out;
  out.decision = request_phase(state_, cfg_, wish);
  out.signals = tick(state_, cfg_);
  return out;
}

std::string config_hash(const TsluConfig& cfg) { return fnv1a_hex(to_json(cfg).dump()); }

TsluSession::TsluSession(TsluConfig cfg) : cfg_(std::move(cfg)), hash_(config_hash(cfg_)) {}

WireResponse TsluSession::status(std::int64_t seq, std::optional<WishStatus> wish) const {
  WireResponse r;
  r.seq = seq;
  r.active_phase = active_phase(state_);
  r.in_transition = state_.in_transition;
  r.signals = state_.colors();
  r.wish = std::move(wish);
  r.mask = action_mask(state_, cfg_);
  return r;
}

std::string TsluSession::fail(std::int64_t seq, const std::string& message) {
  finished_ = true;
  return encode(ErrorResponse{seq, message});
}

std::string TsluSession::handle(std::string_view frame) {
  if (finished_) return encode(ErrorResponse{0, "session closed"});
  Message msg;
  try {
    msg = decode(frame);
  } catch (const ProtocolError& e) {
    return fail(0, e.what());
  }
  if (auto* h = std::get_if<Hello>(&msg)) {
    if (greeted_) return fail(0, "duplicate hello");
    if (h->protocol_version != kProtocolVersion) return fail(0, "unsupported protocol_version");
    if (!h->config_hash.empty() && h->config_hash != hash_) return fail(0, "config_hash mismatch");
    greeted_ = true;
    HelloAck ack;
    ack.session = h->session;
    ack.config_hash = hash_;
    ack.controller = status(0, std::nullopt);
    return encode(ack);
  }
  if (!greeted_) return fail(0, "hello required first");
  auto check_seq = [&](std::int64_t seq) {
    if (seq <= last_seq_) throw ProtocolError("seq must increase (got " + std::to_string(seq) + ")");
    last_seq_ = seq;
  };
  try {
    if (auto* r = std::get_if<WireRequest>(&msg)) {
      check_seq(r->seq);
      if (r->feedback != state_.colors()) throw ProtocolError("feedback does not match controller signals");
      const Decision d = request_phase(state_, cfg_, r->ap_values.at("phase_wish"));
      tick(state_, cfg_);
      return encode(status(r->seq, WishStatus{d.accepted, d.reason}));
    }
    if (auto* r = std::get_if<ResetRequest>(&msg)) {
      check_seq(r->seq);
      state_ = initial_controller();
      return encode(status(r->seq, std::nullopt));
    }
    if (auto* r = std::get_if<CloseRequest>(&msg)) {
      check_seq(r->seq);
      finished_ = true;
      return encode(Bye{r->seq});
    }
  } catch (const ProtocolError& e) {
    return fail(0, e.what());
  }
  return fail(0, "unexpected message '" + std::string(type_name(msg)) + "'");
}

RemoteController::RemoteController(std::unique_ptr<Transport> transport, std::string session_id,
                                   std::string expected_hash)
    : transport_(std::move(transport)) {
  Message reply = roundtrip(Hello{std::move(session_id), kProtocolVersion, std::move(expected_hash)});
  auto* ack = std::get_if<HelloAck>(&reply);
  if (!ack || !ack->controller) throw ProtocolError("signal controller: expected hello_ack");
  absorb(*ack->controller);
}

Message RemoteController::roundtrip(const Message& m) {
  Message reply = decode(transport_->exchange(encode(m)));
  if (auto* err = std::get_if<ErrorResponse>(&reply))
    throw ProtocolError("signal controller: " + err->message);
  return reply;
}

void RemoteController::absorb(const WireResponse& r) {
  active_phase_ = r.active_phase;
  in_transition_ = r.in_transition;
  signals_ = r.signals;
  if (!r.mask) throw ProtocolError("signal controller: put_ack without mask");
  mask_ = *r.mask;
}

void RemoteController::reset() {
  const std::int64_t seq = ++seq_;
  Message reply = roundtrip(ResetRequest{seq, 0});
  auto* r = std::get_if<WireResponse>(&reply);
  if (!r || r->seq != seq) throw ProtocolError("signal controller: bad reset reply");
  absorb(*r);
}

ControllerTick RemoteController::step(int wish, int sim_time) {
  if (wish < kFirstWish || wish > kNumPhases)
    throw ProtocolError("phase wish " + std::to_string(wish) + " outside 2..8");
  WireRequest req;
  req.seq = ++seq_;
  req.sim_time = sim_time;
  req.ap_values["phase_wish"] = wish;
  req.feedback = signals_;
  Message reply = roundtrip(req);
  auto* r = std::get_if<WireResponse>(&reply);
  if (!r || r->seq != req.seq || !r->wish) throw ProtocolError("signal controller: bad put_ack");
  absorb(*r);
  return ControllerTick{Decision{r->wish->accepted, r->wish->reason}, r->signals};
}

}  // namespace signalbench
