#include "pqgate/wire.hpp"

#include <array>
#include <charconv>

namespace pqgate::remote {

namespace {

constexpr std::array<std::pair<MessageKind, std::string_view>, 4> kKinds{{
    {MessageKind::hello, "HELLO"},
    {MessageKind::rsp_bit, "RSP_BIT"},
    {MessageKind::round_result, "ROUND_RESULT"},
    {MessageKind::done, "DONE"},
}};

// Parses a uint32 field starting at `pos`, ending right before `terminator`.
std::uint32_t parse_field(std::string_view frame, std::size_t& pos, char terminator,
                          std::string_view name, std::size_t base) {
  const std::size_t end = frame.find(terminator, pos);
  if (end == std::string_view::npos) throw ParseError("truncated frame, missing " + std::string(name), base + frame.size());
  const std::string_view digits = frame.substr(pos, end - pos);
  if (digits.empty()) throw ParseError("empty " + std::string(name), base + pos);
  if (digits.size() > 1 && digits.front() == '0')
    throw ParseError("leading zero in " + std::string(name), base + pos);
  std::uint32_t value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec == std::errc::result_out_of_range)
    throw ParseError(std::string(name) + " out of range", base + pos);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    const auto bad = static_cast<std::size_t>(ptr - frame.data());
    throw ParseError("invalid digit in " + std::string(name), base + bad);
  }
  pos = end + 1;
  return value;
}

WireMessage parse_frame(std::string_view frame, std::size_t base) {
  std::size_t pos = frame.find(' ');
  if (pos == std::string_view::npos) throw ParseError("truncated frame, missing kind", base + frame.size());
  const std::string_view name = frame.substr(0, pos);
  WireMessage msg;
  bool known = false;
  for (const auto& [kind, text] : kKinds) {
    if (text == name) {
      msg.kind = kind;
      known = true;
    }
  }
  if (!known) throw ParseError("unknown message kind '" + std::string(name) + "'", base);
  ++pos;
  msg.round = parse_field(frame, pos, ' ', "round", base);
  const std::size_t payload_at = pos;
  msg.payload = parse_field(frame, pos, '\n', "payload", base);
  if (pos != frame.size()) throw ParseError("trailing bytes after frame", base + pos);
  const bool binary = msg.kind != MessageKind::hello;
  if (binary && msg.payload > 1) throw ParseError("payload must be 0 or 1", base + payload_at);
  return msg;
}

}  // namespace

std::string_view kind_name(MessageKind kind) {
  for (const auto& [k, text] : kKinds)
    if (k == kind) return text;
  return "?";
}

std::string serialize(const WireMessage& message) {
  std::string out(kind_name(message.kind));
  out += ' ';
  out += std::to_string(message.round);
  out += ' ';
  out += std::to_string(message.payload);
  out += '\n';
  return out;
}

WireMessage deserialize(std::string_view frame) { return parse_frame(frame, 0); }

std::optional<WireMessage> FrameReader::next() {
  const std::size_t end = buffer_.find('\n');
  if (end == std::string::npos) return std::nullopt;
  const WireMessage msg = parse_frame(std::string_view(buffer_).substr(0, end + 1), consumed_);
  consumed_ += end + 1;
  buffer_.erase(0, end + 1);
  return msg;
}

}  // namespace pqgate::remote
