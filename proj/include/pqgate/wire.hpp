#ifndef PQGATE_WIRE_HPP
#define PQGATE_WIRE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

// Frame grammar (ASCII, one message per line):
//
//   frame   = kind SP round SP payload LF
//   kind    = "HELLO" | "RSP_BIT" | "ROUND_RESULT" | "DONE"
//   round   = decimal uint32, no sign, no leading zeros
//   payload = decimal uint32, no sign, no leading zeros
//
// Payload meaning per kind: HELLO carries the protocol version; RSP_BIT the
// sender's measurement bit (0 or 1); ROUND_RESULT 0 = success, 1 = failure;
// DONE 0 = stream complete, 1 = rounds exhausted.
namespace pqgate::remote {

inline constexpr std::uint32_t kProtocolVersion = 1;

enum class MessageKind { hello, rsp_bit, round_result, done };

struct WireMessage {
  MessageKind kind = MessageKind::hello;
  std::uint32_t round = 0;
  std::uint32_t payload = 0;

  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

std::string_view kind_name(MessageKind kind);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

std::string serialize(const WireMessage& message);

/// Parses exactly one complete frame, trailing LF included.
WireMessage deserialize(std::string_view frame);

/// Incremental decoder for a byte stream; offsets in errors are relative to
/// the start of the stream.
class FrameReader {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }
  std::optional<WireMessage> next();
  // Bytes received but not yet consumed as a full frame.
  std::size_t pending() const { return buffer_.size(); }

 private:
  std::string buffer_;
  std::size_t consumed_ = 0;
};

}  // namespace pqgate::remote

#endif  // PQGATE_WIRE_HPP
