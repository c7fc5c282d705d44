#include "rem/epnet/socket.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>

namespace rem::epnet {

namespace {

std::string sys_error(const std::string& what) { return what + ": " + std::strerror(errno); }

sockaddr_in resolve(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const auto port = std::to_string(ep.port);
  if (const int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw NetError("cannot resolve '" + ep.host + "': " + ::gai_strerror(rc));
  }
  sockaddr_in addr{};
  std::memcpy(&addr, res->ai_addr, sizeof addr);
  ::freeaddrinfo(res);
  return addr;
}

}  // namespace

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

Endpoint Endpoint::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
    throw std::invalid_argument("expected host:port, got '" + text + "'");
  Endpoint ep;
  ep.host = text.substr(0, colon);
  std::size_t used = 0;
  unsigned long port = 0;
  try {
    port = std::stoul(text.substr(colon + 1), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() - colon - 1 || port > 65535)
    throw std::invalid_argument("bad port in '" + text + "'");
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Socket Socket::connect(const Endpoint& to, std::chrono::milliseconds timeout) {
  const sockaddr_in addr = resolve(to);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) throw NetError(sys_error("socket"));

  const int flags = ::fcntl(s.fd_, F_GETFL, 0);
  ::fcntl(s.fd_, F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(s.fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
  if (rc != 0 && errno != EINPROGRESS) throw NetError(sys_error("connect to " + to.to_string()));
  if (rc != 0) {
    pollfd pfd{s.fd_, POLLOUT, 0};
    rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (rc == 0) throw TimeoutError("connect to " + to.to_string() + " timed out");
    if (rc < 0) throw NetError(sys_error("poll"));
    int err = 0;
    socklen_t len = sizeof err;
    ::getsockopt(s.fd_, SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
      errno = err;
      throw NetError(sys_error("connect to " + to.to_string()));
    }
  }
  ::fcntl(s.fd_, F_SETFL, flags);
  int one = 1;
  ::setsockopt(s.fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return s;
}

void Socket::set_receive_timeout(std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
}

void Socket::send_all(std::span<const std::uint8_t> bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw NetError(sys_error("send"));
    }
    bytes = bytes.subspan(static_cast<std::size_t>(n));
  }
}

bool Socket::recv_exact(std::span<std::uint8_t> out) {
  std::size_t got = 0;
  while (got < out.size()) {
    const ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
    if (n == 0) {
      if (got == 0) return false;
      throw NetError("connection closed mid-message");
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw TimeoutError("receive timed out");
      throw NetError(sys_error("recv"));
    }
    got += static_cast<std::size_t>(n);
  }
  return true;
}

void write_frame(Socket& s, const Frame& frame) { s.send_all(encode_frame(frame)); }

std::optional<Frame> read_frame(Socket& s) {
  std::array<std::uint8_t, 4> prefix{};
  if (!s.recv_exact(prefix)) return std::nullopt;
  const std::uint32_t length = peek_frame_length(prefix);
  Buffer buf(4 + std::size_t{length});
  std::copy(prefix.begin(), prefix.end(), buf.begin());
  if (length > 0 && !s.recv_exact(std::span(buf).subspan(4)))
    throw NetError("connection closed mid-frame");
  return decode_frame(buf).frame;
}

Listener::Listener(const Endpoint& bind) {
  sockaddr_in addr = resolve(bind);
  socket_ = Socket(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!socket_.valid()) throw NetError(sys_error("socket"));
  int one = 1;
  ::setsockopt(socket_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    throw NetError(sys_error("bind " + bind.to_string()));
  if (::listen(socket_.fd(), 64) != 0) throw NetError(sys_error("listen"));
  socklen_t len = sizeof addr;
  ::getsockname(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  bound_ = Endpoint{bind.host, ntohs(addr.sin_port)};
}

std::optional<Socket> Listener::accept(std::chrono::milliseconds poll) {
  if (!socket_.valid()) return std::nullopt;
  pollfd pfd{socket_.fd(), POLLIN, 0};
  const int rc = ::poll(&pfd, 1, static_cast<int>(poll.count()));
  if (rc <= 0) return std::nullopt;
  const int fd = ::accept4(socket_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) return std::nullopt;
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return Socket(fd);
}

}  // namespace rem::epnet
