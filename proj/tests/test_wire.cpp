#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "signalbench/errors.hpp"
#include "signalbench/wire.hpp"

namespace sb = signalbench;
namespace wire = signalbench::wire;
using sb::SignalColor;
using sb::SignalGroup;

namespace {

sb::SignalStateVector random_colors(std::mt19937_64& rng) {
  sb::SignalStateVector v;
  for (auto& c : v) c = static_cast<SignalColor>(rng() % 4);
  return v;
}

std::string random_text(std::mt19937_64& rng) {
  static const std::string alphabet = "abcXYZ _-:\"\\/\n\t";
  std::string s;
  const auto n = rng() % 12;
  for (std::size_t i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
  if (rng() % 4 == 0) s += "\xc3\xa9";
  return s;
}

double random_double(std::mt19937_64& rng) {
  switch (rng() % 4) {
    case 0: return 0.0;
    case 1: return static_cast<double>(static_cast<int>(rng() % 2000) - 1000);
    case 2: return std::ldexp(static_cast<double>(rng() >> 11), -40) - 1000.0;
    default: return -std::ldexp(static_cast<double>(rng() >> 11), -53);
  }
}

std::array<bool, sb::kNumActions> random_mask(std::mt19937_64& rng) {
  std::array<bool, sb::kNumActions> m{};
  for (auto& b : m) b = rng() % 2;
  return m;
}

wire::WireResponse random_response(std::mt19937_64& rng) {
  wire::WireResponse r;
  r.seq = static_cast<std::int64_t>(rng() % 1000000);
  r.active_phase = 1 + static_cast<int>(rng() % 8);
  r.in_transition = rng() % 2;
  r.signals = random_colors(rng);
  if (rng() % 2) r.wish = wire::WishStatus{static_cast<bool>(rng() % 2), random_text(rng)};
  if (rng() % 2) r.mask = random_mask(rng);
  return r;
}

wire::Message random_message(std::mt19937_64& rng) {
  const auto seq = static_cast<std::int64_t>(rng() % 1000000);
  switch (rng() % 12) {
    case 0: return wire::Hello{random_text(rng), wire::kProtocolVersion, random_text(rng)};
    case 1: {
      wire::HelloAck a{random_text(rng), wire::kProtocolVersion, random_text(rng), 45, 7, std::nullopt};
      if (rng() % 2) a.controller = random_response(rng);
      return a;
    }
    case 2: {
      wire::WireRequest r;
      r.seq = seq;
      r.sim_time = static_cast<int>(rng() % 4200);
      r.ap_values["phase_wish"] = 2 + static_cast<int>(rng() % 7);
      r.feedback = random_colors(rng);
      return r;
    }
    case 3: return random_response(rng);
    case 4: return wire::ResetRequest{seq, rng()};
    case 5: return wire::StepRequest{seq, 2 + static_cast<int>(rng() % 7)};
    case 6: return wire::MaskRequest{seq};
    case 7: return wire::CloseRequest{seq};
    case 8: {
      wire::ObsResponse o;
      o.seq = seq;
      for (int i = 0; i < 45; ++i) o.obs.push_back(random_double(rng));
      o.reward = random_double(rng);
      o.done = rng() % 2;
      o.info.t = static_cast<int>(rng() % 4201);
      o.info.wish_accepted = rng() % 2;
      o.info.reject_reason = random_text(rng);
      o.info.current_phase = 1 + static_cast<int>(rng() % 8);
      o.info.in_transition = rng() % 2;
      o.info.departed = rng() % 100000;
      o.info.raw = o.obs;
      return o;
    }
    case 9: return wire::MaskResponse{seq, random_mask(rng)};
    case 10: return wire::Bye{seq};
    default: return wire::ErrorResponse{seq, random_text(rng)};
  }
}

}  // namespace

TEST(Wire, PutRoundTrip) {
  wire::WireRequest r;
  r.seq = 1;
  r.sim_time = 10;
  r.ap_values["phase_wish"] = 3;
  r.feedback = sb::all_red();
  r.feedback[sb::index(SignalGroup::VehW)] = SignalColor::Green;
  const std::string bytes = wire::encode_request(r);
  EXPECT_EQ(bytes.back(), '\n');
  EXPECT_EQ(bytes.find('\n'), bytes.size() - 1);
  EXPECT_EQ(wire::decode_request(bytes), r);
  EXPECT_EQ(wire::encode_request(wire::decode_request(bytes)), bytes);
}

TEST(Wire, RandomMessagesRoundTrip) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 5000; ++i) {
    const wire::Message m = random_message(rng);
    const std::string bytes = wire::encode(m);
    ASSERT_EQ(bytes.find('\n'), bytes.size() - 1);
    const wire::Message back = wire::decode(bytes);
    ASSERT_EQ(back, m) << bytes;
    ASSERT_EQ(wire::encode(back), bytes);
  }
}

TEST(Wire, TruncatedFrameIsDecodeError) {
  const std::string bytes = wire::encode(wire::StepRequest{4, 3});
  for (std::size_t cut = 1; cut + 2 < bytes.size(); ++cut) {
    try {
      wire::decode(bytes.substr(0, cut));
      FAIL() << "accepted truncated frame of " << cut << " bytes";
    } catch (const sb::DecodeError& e) {
      EXPECT_LE(e.offset(), cut);
    }
  }
}

TEST(Wire, UnknownFieldRejected) {
  EXPECT_THROW(wire::decode(R"({"type":"step","seq":1,"action":3,"extra":0})"), sb::ProtocolError);
  EXPECT_THROW(wire::decode(R"({"type":"reset","seq":1,"seed":2,"info":{}})"), sb::ProtocolError);
}

TEST(Wire, MissingFieldRejected) {
  EXPECT_THROW(wire::decode(R"({"type":"step","seq":1})"), sb::ProtocolError);
  EXPECT_THROW(wire::decode(R"({"seq":1,"action":3})"), sb::ProtocolError);
  EXPECT_THROW(wire::decode(R"({"type":"step","seq":1,"action":"3"})"), sb::ProtocolError);
}

TEST(Wire, FramingRejected) {
  EXPECT_THROW(wire::decode(""), sb::ProtocolError);
  EXPECT_THROW(wire::decode("{\"type\":\"mask\",\"seq\":1}\n{\"type\":\"mask\",\"seq\":2}\n"), sb::ProtocolError);
  EXPECT_THROW(wire::decode("[1,2]"), sb::ProtocolError);
  EXPECT_THROW(wire::decode(R"({"type":"teleport","seq":1})"), sb::ProtocolError);
}

TEST(Wire, PhaseWishValidated) {
  EXPECT_THROW(wire::decode_request(
                   R"({"type":"put","seq":1,"sim_time":0,"ap_values":{"phase_wish":9},"feedback":{"veh_w":1,"veh_e":1,"veh_n":1,"veh_s":1,"veh_w_left":1,"ped_we":1,"ped_ns":1}})"),
               sb::ProtocolError);
  EXPECT_THROW(wire::decode_request(
                   R"({"type":"put","seq":1,"sim_time":0,"ap_values":{"phase_wish":3,"other":1},"feedback":{"veh_w":1,"veh_e":1,"veh_n":1,"veh_s":1,"veh_w_left":1,"ped_we":1,"ped_ns":1}})"),
               sb::ProtocolError);
}

TEST(Wire, CodeTable) {
  EXPECT_EQ(wire::color_code(SignalColor::Red), 1);
  EXPECT_EQ(wire::color_code(SignalColor::RedYellow), 2);
  EXPECT_EQ(wire::color_code(SignalColor::Green), 3);
  EXPECT_EQ(wire::color_code(SignalColor::Yellow), 4);
}

TEST(Wire, GreenCodesMapToGreen) {
  const auto r = wire::decode_response(
      R"({"type":"put_ack","seq":2,"active_phase":3,"in_transition":false,"signal_codes":{"veh_w":3,"veh_e":3,"veh_n":1,"veh_s":1,"veh_w_left":1,"ped_we":1,"ped_ns":1}})");
  EXPECT_EQ(r.signals[sb::index(SignalGroup::VehW)], SignalColor::Green);
  EXPECT_EQ(r.signals[sb::index(SignalGroup::VehE)], SignalColor::Green);
  EXPECT_EQ(r.signals[sb::index(SignalGroup::VehN)], SignalColor::Red);
}

TEST(Wire, CodeMapIsBijective) {
  for (auto g : sb::kAllGroups) {
    for (int code = 1; code <= 4; ++code)
      EXPECT_EQ(wire::color_code(wire::color_from_code(g, code)), code);
    for (auto c : {SignalColor::Red, SignalColor::RedYellow, SignalColor::Green, SignalColor::Yellow})
      EXPECT_EQ(wire::color_from_code(g, wire::color_code(c)), c);
  }
}

TEST(Wire, UnknownCodeNamesGroupAndCode) {
  try {
    wire::color_from_code(SignalGroup::PedWE, 7);
    FAIL();
  } catch (const sb::ProtocolError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("ped_we"), std::string::npos);
    EXPECT_NE(what.find('7'), std::string::npos);
  }
}

TEST(Wire, MissingGroupRejected) {
  EXPECT_THROW(wire::decode_response(
                   R"({"type":"put_ack","seq":2,"active_phase":3,"in_transition":false,"signal_codes":{"veh_w":3}})"),
               sb::ProtocolError);
}

TEST(Wire, InvalidUtf8InMessageIsReplaced) {
  const std::string bytes = wire::encode(wire::ErrorResponse{1, "bad \xff\xa0 byte"});
  const auto back = std::get<wire::ErrorResponse>(wire::decode(bytes));
  EXPECT_EQ(back.seq, 1);
  EXPECT_EQ(back.message.substr(0, 4), "bad ");
}

// Every example frame in the protocol document decodes and re-encodes to the same bytes.
TEST(Wire, DocumentedFramesAreExact) {
  std::ifstream in(std::filesystem::path(SIGNALBENCH_SOURCE_DIR) / "docs" / "wire.md");
  ASSERT_TRUE(in);
  int frames = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("{\"", 0) != 0) continue;
    ++frames;
    EXPECT_EQ(wire::encode(wire::decode(line)), line + "\n");
  }
  EXPECT_GE(frames, 16);
}
