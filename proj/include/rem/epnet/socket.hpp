#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "rem/epnet/frame.hpp"

namespace rem::epnet {

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a receive deadline passes.
class TimeoutError : public NetError {
 public:
  using NetError::NetError;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  std::string to_string() const;
  static Endpoint parse(const std::string& text);  // "host:port"

  bool operator==(const Endpoint&) const = default;
};

// Owning TCP stream socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  static Socket connect(const Endpoint& to, std::chrono::milliseconds timeout);

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void close();
  void shutdown();

  // Applies to every subsequent receive; zero disables the deadline.
  void set_receive_timeout(std::chrono::milliseconds timeout);

  void send_all(std::span<const std::uint8_t> bytes);
  // Returns false on a clean end of stream before the first byte.
  bool recv_exact(std::span<std::uint8_t> out);

 private:
  int fd_ = -1;
};

void write_frame(Socket& s, const Frame& frame);
// nullopt on a clean end of stream between frames.
std::optional<Frame> read_frame(Socket& s);

class Listener {
 public:
  explicit Listener(const Endpoint& bind);
  Listener(Listener&&) = default;
  Listener& operator=(Listener&&) = default;

  Endpoint endpoint() const { return bound_; }
  // Waits up to `poll` for a connection.
  std::optional<Socket> accept(std::chrono::milliseconds poll);
  void close() { socket_.close(); }

 private:
  Socket socket_;
  Endpoint bound_;
};

}  // namespace rem::epnet
