#include <gtest/gtest.h>

#include <random>

#include "rem/epnet/frame.hpp"
#include "rem/epnet/messages.hpp"

using namespace rem::epnet;

namespace {

FrameError::Kind decode_error(const Buffer& bytes) {
  try {
    decode_frame(bytes);
  } catch (const FrameError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decode accepted a bad frame";
  return FrameError::Kind::malformed;
}

Frame random_frame(std::mt19937_64& rng) {
  static const FrameType types[] = {FrameType::sdm_query, FrameType::sdm_response, FrameType::ep_deploy,
                                    FrameType::ep_ack,     FrameType::ep_output,    FrameType::error};
  Frame f;
  f.type = types[rng() % 6];
  f.header.resize(rng() % 300);
  for (auto& c : f.header) c = static_cast<char>(rng());
  f.sections.resize(rng() % 6);
  for (auto& s : f.sections) {
    s.resize(rng() % 2000);
    for (auto& b : s) b = static_cast<std::uint8_t>(rng());
  }
  return f;
}

}  // namespace

TEST(Frame, EmptyQueryIsSixBytes) {
  const Buffer bytes = encode_frame(sdm_query_frame());
  EXPECT_EQ(bytes, (Buffer{0, 0, 0, 2, 0x01, 0}));
  const auto d = decode_frame(bytes);
  EXPECT_EQ(d.consumed, 6u);
  EXPECT_EQ(d.frame.type, FrameType::sdm_query);
  EXPECT_TRUE(d.frame.header.empty());
  EXPECT_TRUE(d.frame.sections.empty());
}

TEST(Frame, DeployWithOneByteSectionsRoundTrips) {
  Frame f{FrameType::ep_deploy, R"({"package_id":"p"})", {{0x01}, {0x02}, {0x03}}};
  const Buffer bytes = encode_frame(f);
  EXPECT_EQ(bytes.size(), 4u + 1 + 1 + f.header.size() + 3 * 5);
  const auto d = decode_frame(bytes);
  EXPECT_EQ(d.frame, f);
  EXPECT_EQ(encode_frame(d.frame), bytes);
}

TEST(Frame, LongHeaderUsesMultiByteLength) {
  Frame f{FrameType::error, std::string(200, 'x'), {}};
  const Buffer bytes = encode_frame(f);
  EXPECT_EQ(bytes[5], 0xC8);
  EXPECT_EQ(bytes[6], 0x01);
  EXPECT_EQ(decode_frame(bytes).frame, f);
}

TEST(Frame, TruncatedFrameIsRejected) {
  Buffer bytes{0, 0, 0, 10, 0x01, 0, 0, 0, 0, 0, 0, 0, 0};  // declares 10, carries 9
  EXPECT_EQ(decode_error(bytes), FrameError::Kind::truncated);
  EXPECT_EQ(decode_error({0, 0}), FrameError::Kind::truncated);
}

TEST(Frame, UnknownTypeIsRejected) {
  EXPECT_EQ(decode_error({0, 0, 0, 2, 0x42, 0}), FrameError::Kind::unknown_type);
  EXPECT_THROW(encode_frame(Frame{static_cast<FrameType>(0x42), "", {}}), FrameError);
}

TEST(Frame, OversizedLengthIsRejected) {
  const std::uint32_t len = kMaxFrameLength + 1;
  Buffer bytes{static_cast<std::uint8_t>(len >> 24), static_cast<std::uint8_t>(len >> 16),
               static_cast<std::uint8_t>(len >> 8), static_cast<std::uint8_t>(len), 0x01, 0};
  EXPECT_EQ(decode_error(bytes), FrameError::Kind::too_large);
  Frame big{FrameType::ep_deploy, "", {Buffer(kMaxFrameLength, 0)}};
  EXPECT_THROW(encode_frame(big), FrameError);
}

TEST(Frame, MalformedPayloads) {
  EXPECT_EQ(decode_error({0, 0, 0, 3, 0x01, 0x80, 0x00}), FrameError::Kind::malformed);  // non-minimal
  EXPECT_EQ(decode_error({0, 0, 0, 2, 0x01, 0x05}), FrameError::Kind::malformed);        // header too long
  EXPECT_EQ(decode_error({0, 0, 0, 4, 0x01, 0x00, 0, 0}), FrameError::Kind::malformed);  // partial section len
  EXPECT_EQ(decode_error({0, 0, 0, 7, 0x01, 0x00, 0, 0, 0, 9, 1}), FrameError::Kind::malformed);
  EXPECT_EQ(decode_error({0, 0, 0, 1, 0x01}), FrameError::Kind::malformed);
}

TEST(Frame, TrailingBytesAreLeftAlone) {
  Buffer bytes = encode_frame(Frame{FrameType::ep_ack, "{}", {{7, 7}}});
  const std::size_t first = bytes.size();
  const Buffer second = encode_frame(sdm_query_frame());
  bytes.insert(bytes.end(), second.begin(), second.end());
  const auto d = decode_frame(bytes);
  EXPECT_EQ(d.consumed, first);
  EXPECT_EQ(decode_frame(std::span(bytes).subspan(first)).frame.type, FrameType::sdm_query);
}

TEST(Frame, SeededFuzzRoundTrip) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    const Frame f = random_frame(rng);
    const Buffer bytes = encode_frame(f);
    const auto d = decode_frame(bytes);
    ASSERT_EQ(d.frame, f);
    ASSERT_EQ(d.consumed, bytes.size());
  }
}

// Every strict prefix of a valid frame must fail cleanly.
TEST(Frame, PrefixesNeverDecode) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    const Buffer bytes = encode_frame(random_frame(rng));
    for (std::size_t n = 0; n < bytes.size(); n += 1 + n / 8) {
      const Buffer prefix(bytes.begin(), bytes.begin() + n);
      EXPECT_THROW(decode_frame(prefix), FrameError);
    }
  }
}

TEST(Messages, DeployRoundTrip) {
  EpPackage p;
  p.meta.package_id = "ep-F";
  p.meta.requester = "T";
  p.meta.receiver_id = "T";
  p.meta.receiver = Endpoint{"127.0.0.1", 4000};
  p.meta.object_count = 2;
  p.meta.object_indices = {3, 4};
  p.alg = {1, 2, 3};
  p.mdl = {4};
  p.objects = {{5, 6}, {7}};
  EXPECT_EQ(package_from_frame(decode_frame(encode_frame(to_frame(p))).frame), p);

  Frame bad = to_frame(p);
  bad.sections.pop_back();
  EXPECT_THROW(package_from_frame(bad), ProtocolError);
  EXPECT_THROW(package_from_frame(Frame{FrameType::ep_deploy, "not json", {}}), ProtocolError);
  EXPECT_THROW(package_from_frame(sdm_query_frame()), ProtocolError);
}

TEST(Messages, OutputAndAckRoundTrip) {
  OutputMessage out{"ep-M", "M", {0, 1}, StageTimings{1e-3, 2e-3, 3e-3, 4e-3, 5e-3}, {{1}, {2}}};
  const OutputMessage back = output_from_frame(to_frame(out));
  EXPECT_EQ(back.object_indices, out.object_indices);
  ASSERT_TRUE(back.timings);
  EXPECT_EQ(back.timings->proc1, 4e-3);
  EXPECT_EQ(back.outputs, out.outputs);

  const DeployAck ack = ack_from_frame(to_frame(DeployAck{"ep-M", "M", 2}));
  EXPECT_EQ(ack.package_id, "ep-M");
  EXPECT_EQ(ack.object_count, 2);
  EXPECT_EQ(error_reason(error_frame("boom")), "boom");
}
