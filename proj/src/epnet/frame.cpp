#include "rem/epnet/frame.hpp"

#include <limits>

namespace rem::epnet {

namespace {

void put_u32(Buffer& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

void put_varint(Buffer& out, std::uint64_t v) {
  do {
    std::uint8_t byte = v & 0x7F;
    v >>= 7;
    if (v != 0) byte |= 0x80;
    out.push_back(byte);
  } while (v != 0);
}

std::size_t varint_size(std::uint64_t v) {
  std::size_t n = 1;
  while (v >>= 7) ++n;
  return n;
}

}  // namespace

bool is_known_frame_type(std::uint8_t byte) {
  switch (static_cast<FrameType>(byte)) {
    case FrameType::sdm_query:
    case FrameType::sdm_response:
    case FrameType::ep_deploy:
    case FrameType::ep_ack:
    case FrameType::ep_output:
    case FrameType::error: return true;
  }
  return false;
}

const char* to_string(FrameType type) {
  switch (type) {
    case FrameType::sdm_query: return "SDM_QUERY";
    case FrameType::sdm_response: return "SDM_RESPONSE";
    case FrameType::ep_deploy: return "EP_DEPLOY";
    case FrameType::ep_ack: return "EP_ACK";
    case FrameType::ep_output: return "EP_OUTPUT";
    case FrameType::error: return "ERROR";
  }
  return "UNKNOWN";
}

Buffer encode_frame(const Frame& frame) {
  if (!is_known_frame_type(static_cast<std::uint8_t>(frame.type)))
    throw FrameError(FrameError::Kind::unknown_type, "cannot encode an unknown frame type");
  std::uint64_t length = 1 + varint_size(frame.header.size()) + frame.header.size();
  for (const auto& s : frame.sections) {
    if (s.size() > std::numeric_limits<std::uint32_t>::max())
      throw FrameError(FrameError::Kind::too_large, "section exceeds 4 GiB");
    length += 4 + s.size();
  }
  if (length > kMaxFrameLength)
    throw FrameError(FrameError::Kind::too_large,
                     "frame of " + std::to_string(length) + " bytes exceeds the 64 MiB cap");

  Buffer out;
  out.reserve(4 + length);
  put_u32(out, static_cast<std::uint32_t>(length));
  out.push_back(static_cast<std::uint8_t>(frame.type));
  put_varint(out, frame.header.size());
  out.insert(out.end(), frame.header.begin(), frame.header.end());
  for (const auto& s : frame.sections) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

std::uint32_t peek_frame_length(std::span<const std::uint8_t, 4> prefix) {
  const std::uint32_t length = get_u32(prefix.data());
  if (length > kMaxFrameLength)
    throw FrameError(FrameError::Kind::too_large,
                     "declared length " + std::to_string(length) + " exceeds the 64 MiB cap");
  return length;
}

DecodedFrame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FrameError(FrameError::Kind::truncated, "stream ends inside the length field");
  const std::uint32_t length = peek_frame_length(bytes.first<4>());
  if (bytes.size() - 4 < length) {
    throw FrameError(FrameError::Kind::truncated,
                     "frame declares " + std::to_string(length) + " bytes but only " +
                         std::to_string(bytes.size() - 4) + " are available");
  }
  if (length < 2) throw FrameError(FrameError::Kind::malformed, "frame too short for type and header");

  const auto payload = bytes.subspan(4, length);
  std::size_t pos = 0;
  const std::uint8_t type = payload[pos++];
  if (!is_known_frame_type(type))
    throw FrameError(FrameError::Kind::unknown_type, "unknown frame type byte " + std::to_string(type));

  std::uint64_t header_len = 0;
  for (int shift = 0;; shift += 7) {
    if (pos >= payload.size()) throw FrameError(FrameError::Kind::malformed, "header length runs past the frame");
    if (shift > 28) throw FrameError(FrameError::Kind::malformed, "header length varint too long");
    const std::uint8_t b = payload[pos++];
    header_len |= std::uint64_t{b & 0x7Fu} << shift;
    if ((b & 0x80) == 0) {
      if (b == 0 && shift > 0) throw FrameError(FrameError::Kind::malformed, "non-minimal header length");
      break;
    }
  }
  if (header_len > payload.size() - pos)
    throw FrameError(FrameError::Kind::malformed, "header runs past the frame");

  DecodedFrame out;
  out.frame.type = static_cast<FrameType>(type);
  out.frame.header.assign(reinterpret_cast<const char*>(payload.data() + pos), header_len);
  pos += header_len;
  while (pos < payload.size()) {
    if (payload.size() - pos < 4)
      throw FrameError(FrameError::Kind::malformed, "section length runs past the frame");
    const std::uint32_t n = get_u32(payload.data() + pos);
    pos += 4;
    if (n > payload.size() - pos) throw FrameError(FrameError::Kind::malformed, "section runs past the frame");
    out.frame.sections.emplace_back(payload.begin() + pos, payload.begin() + pos + n);
    pos += n;
  }
  out.consumed = 4 + std::size_t{length};
  return out;
}

}  // namespace rem::epnet
