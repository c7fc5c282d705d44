#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rem::epnet {

using Buffer = std::vector<std::uint8_t>;

// Wire layout, all integers big-endian:
//
//   u32 length          bytes that follow this field
//   u8  type
//   varint header_len   unsigned LEB128
//   header_len bytes    header text (JSON)
//   repeated:           u32 section_len, section_len bytes
//
// Sections run to the end of the frame, so an empty frame of any type is
// 6 bytes long: 00 00 00 02 <type> 00.
enum class FrameType : std::uint8_t {
  sdm_query = 0x01,
  sdm_response = 0x02,
  ep_deploy = 0x03,
  ep_ack = 0x04,
  ep_output = 0x05,
  error = 0x7F,
};

inline constexpr std::uint32_t kMaxFrameLength = 64u << 20;

bool is_known_frame_type(std::uint8_t byte);
const char* to_string(FrameType type);

struct Frame {
  FrameType type = FrameType::error;
  std::string header;
  std::vector<Buffer> sections;

  bool operator==(const Frame&) const = default;
};

class FrameError : public std::runtime_error {
 public:
  enum class Kind { truncated, unknown_type, too_large, malformed };

  FrameError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

Buffer encode_frame(const Frame& frame);

struct DecodedFrame {
  Frame frame;
  std::size_t consumed = 0;  // 4 + declared length
};

// Decodes the frame at the start of `bytes`. Never reads past the declared
// frame; trailing bytes belong to the next frame.
DecodedFrame decode_frame(std::span<const std::uint8_t> bytes);

// Parses only the length prefix. Throws too_large past the cap.
std::uint32_t peek_frame_length(std::span<const std::uint8_t, 4> prefix);

}  // namespace rem::epnet
