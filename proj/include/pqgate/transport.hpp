#ifndef PQGATE_TRANSPORT_HPP
#define PQGATE_TRANSPORT_HPP

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pqgate/wire.hpp"

namespace pqgate::remote {

enum class Party { alice, bob };

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LogEntry {
  Party from;
  WireMessage message;
};

/// Append-only record of every frame put on the wire, shared by both ends.
class TransportLog {
 public:
  void record(Party from, const WireMessage& message);
  std::vector<LogEntry> entries() const;
  std::size_t count_from(Party from) const;
  void clear();

 private:
  mutable std::mutex mutex_;
  std::vector<LogEntry> entries_;
};

/// One side of an ordered, reliable message stream. Frames are serialized on
/// send and parsed on receive regardless of the underlying medium.
class Endpoint {
 public:
  Endpoint(Party self, TransportLog* log) : self_(self), log_(log) {}
  virtual ~Endpoint() = default;
  Endpoint(const Endpoint&) = delete;
  Endpoint& operator=(const Endpoint&) = delete;

  void send(const WireMessage& message);
  // Blocks until a frame arrives; throws TransportError once the peer has
  // closed and no frames remain.
  WireMessage receive();
  virtual void close() = 0;

  Party self() const { return self_; }

 protected:
  virtual void write_bytes(const std::string& bytes) = 0;
  // Appends at least one byte to `reader`, or returns false at end of stream.
  virtual bool read_bytes(FrameReader& reader) = 0;

 private:
  Party self_;
  TransportLog* log_;
  FrameReader reader_;
};

/// Two in-memory byte queues joining an Alice endpoint to a Bob endpoint.
class InProcessLink {
 public:
  explicit InProcessLink(TransportLog* log = nullptr);
  Endpoint& alice() { return *alice_; }
  Endpoint& bob() { return *bob_; }

 private:
  struct Queue {
    std::mutex mutex;
    std::condition_variable ready;
    std::deque<std::string> frames;
    bool closed = false;
  };
  class Side;

  std::shared_ptr<Queue> to_bob_;
  std::shared_ptr<Queue> to_alice_;
  std::unique_ptr<Endpoint> alice_;
  std::unique_ptr<Endpoint> bob_;
};

/// Stream socket endpoint (TCP over IPv4).
class TcpEndpoint final : public Endpoint {
 public:
  TcpEndpoint(Party self, int fd, TransportLog* log);
  ~TcpEndpoint() override;

  static std::unique_ptr<TcpEndpoint> connect(const std::string& address, Party self,
                                              TransportLog* log);
  void close() override;

 protected:
  void write_bytes(const std::string& bytes) override;
  bool read_bytes(FrameReader& reader) override;

 private:
  int fd_;
};

/// Listening socket bound to "host:port"; port 0 picks an ephemeral port.
class TcpListener {
 public:
  explicit TcpListener(const std::string& address);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::unique_ptr<TcpEndpoint> accept(Party self, TransportLog* log);
  // "host:port" with the port actually bound.
  std::string address() const;
  // Unblocks a pending accept(), which then throws TransportError.
  void interrupt();

 private:
  int fd_;
  std::string host_;
};

std::pair<std::string, std::uint16_t> split_address(const std::string& address);

}  // namespace pqgate::remote

#endif  // PQGATE_TRANSPORT_HPP
