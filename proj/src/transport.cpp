#include "pqgate/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace pqgate::remote {

void TransportLog::record(Party from, const WireMessage& message) {
  std::lock_guard lock(mutex_);
  entries_.push_back({from, message});
}

std::vector<LogEntry> TransportLog::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::size_t TransportLog::count_from(Party from) const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.from == from ? 1 : 0;
  return n;
}

void TransportLog::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

void Endpoint::send(const WireMessage& message) {
  write_bytes(serialize(message));
  if (log_ != nullptr) log_->record(self_, message);
}

WireMessage Endpoint::receive() {
  for (;;) {
    if (auto msg = reader_.next()) return *msg;
    if (!read_bytes(reader_)) {
      throw TransportError(reader_.pending() > 0 ? "stream closed inside a frame"
                                                 : "stream closed by peer");
    }
  }
}

// ---------------------------------------------------------------------------

class InProcessLink::Side final : public Endpoint {
 public:
  Side(Party self, TransportLog* log, std::shared_ptr<Queue> out, std::shared_ptr<Queue> in)
      : Endpoint(self, log), out_(std::move(out)), in_(std::move(in)) {}
  ~Side() override { close(); }

  void close() override {
    {
      std::lock_guard lock(out_->mutex);
      out_->closed = true;
    }
    out_->ready.notify_all();
  }

 protected:
  void write_bytes(const std::string& bytes) override {
    {
      std::lock_guard lock(out_->mutex);
      if (out_->closed) throw TransportError("send on closed link");
      out_->frames.push_back(bytes);
    }
    out_->ready.notify_one();
  }

  bool read_bytes(FrameReader& reader) override {
    std::unique_lock lock(in_->mutex);
    in_->ready.wait(lock, [&] { return !in_->frames.empty() || in_->closed; });
    if (in_->frames.empty()) return false;
    reader.feed(in_->frames.front());
    in_->frames.pop_front();
    return true;
  }

 private:
  std::shared_ptr<Queue> out_;
  std::shared_ptr<Queue> in_;
};

InProcessLink::InProcessLink(TransportLog* log)
    : to_bob_(std::make_shared<Queue>()), to_alice_(std::make_shared<Queue>()) {
  alice_ = std::make_unique<Side>(Party::alice, log, to_bob_, to_alice_);
  bob_ = std::make_unique<Side>(Party::bob, log, to_alice_, to_bob_);
}

// ---------------------------------------------------------------------------

std::pair<std::string, std::uint16_t> split_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0)
    throw TransportError("address must be host:port, got '" + address + "'");
  std::uint16_t port = 0;
  const char* first = address.data() + colon + 1;
  const char* last = address.data() + address.size();
  const auto [ptr, ec] = std::from_chars(first, last, port);
  if (ec != std::errc() || ptr != last || first == last)
    throw TransportError("invalid port in address '" + address + "'");
  return {address.substr(0, colon), port};
}

namespace {

sockaddr_in resolve(const std::string& address) {
  const auto [host, port] = split_address(address);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  const std::string numeric = host == "localhost" ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, numeric.c_str(), &addr.sin_addr) != 1)
    throw TransportError("unsupported host '" + host + "' (IPv4 literal or localhost)");
  return addr;
}

[[noreturn]] void fail(const std::string& what) {
  throw TransportError(what + ": " + std::strerror(errno));
}

}  // namespace

TcpEndpoint::TcpEndpoint(Party self, int fd, TransportLog* log) : Endpoint(self, log), fd_(fd) {
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpEndpoint::~TcpEndpoint() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpEndpoint> TcpEndpoint::connect(const std::string& address, Party self,
                                                  TransportLog* log) {
  const sockaddr_in addr = resolve(address);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) fail("socket");
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int err = errno;
    ::close(fd);
    errno = err;
    fail("connect to " + address);
  }
  return std::make_unique<TcpEndpoint>(self, fd, log);
}

void TcpEndpoint::close() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_WR);
}

void TcpEndpoint::write_bytes(const std::string& bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("send");
    }
    sent += static_cast<std::size_t>(n);
  }
}

bool TcpEndpoint::read_bytes(FrameReader& reader) {
  char buf[4096];
  for (;;) {
    const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
    if (n > 0) {
      reader.feed(std::string_view(buf, static_cast<std::size_t>(n)));
      return true;
    }
    if (n == 0) return false;
    if (errno != EINTR) fail("recv");
  }
}

TcpListener::TcpListener(const std::string& address) : host_(split_address(address).first) {
  const sockaddr_in addr = resolve(address);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) fail("socket");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int err = errno;
    ::close(fd_);
    errno = err;
    fail("bind " + address);
  }
  if (::listen(fd_, 16) != 0) {
    const int err = errno;
    ::close(fd_);
    errno = err;
    fail("listen");
  }
}

TcpListener::~TcpListener() { ::close(fd_); }

std::unique_ptr<TcpEndpoint> TcpListener::accept(Party self, TransportLog* log) {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return std::make_unique<TcpEndpoint>(self, fd, log);
    if (errno != EINTR) fail("accept");
  }
}

void TcpListener::interrupt() { ::shutdown(fd_, SHUT_RDWR); }

std::string TcpListener::address() const {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) fail("getsockname");
  return host_ + ":" + std::to_string(ntohs(addr.sin_port));
}

}  // namespace pqgate::remote
