#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hector::net {

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TimeoutError : public NetError {
 public:
  TimeoutError() : NetError("socket operation timed out") {}
};

using Clock = std::chrono::steady_clock;

/// Owning socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close();
  /// Unblocks any thread waiting on this socket.
  void shutdown();

  /// Throws TimeoutError when the deadline passes, NetError on failure or EOF.
  void send_all(std::span<const std::uint8_t> data,
                std::optional<Clock::time_point> deadline = std::nullopt);
  void send_all(const std::string& text,
                std::optional<Clock::time_point> deadline = std::nullopt) {
    send_all(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), deadline);
  }
  void recv_exact(std::span<std::uint8_t> out,
                  std::optional<Clock::time_point> deadline = std::nullopt);
  /// Up to `max` bytes; empty on orderly EOF.
  std::vector<std::uint8_t> recv_some(std::size_t max,
                                      std::optional<Clock::time_point> deadline = std::nullopt);

 private:
  int fd_ = -1;
};

struct Endpoint {
  std::string host;
  std::uint16_t port;
};

/// Parses "host:port"; a bare port means 127.0.0.1.
Endpoint parse_endpoint(const std::string& text);

Socket connect_tcp(const Endpoint& ep, std::chrono::milliseconds timeout);

class Listener {
 public:
  explicit Listener(const Endpoint& ep);
  std::uint16_t port() const { return port_; }
  /// Returns nullopt on timeout or after close().
  std::optional<Socket> accept(std::chrono::milliseconds timeout);
  void close() { sock_.shutdown(); sock_.close(); }

 private:
  Socket sock_;
  std::uint16_t port_ = 0;
};

/// Buffered newline-delimited reader over a socket.
class LineReader {
 public:
  explicit LineReader(Socket& sock) : sock_(sock) {}
  /// Next line without its terminator; nullopt on EOF.
  std::optional<std::string> next(std::optional<Clock::time_point> deadline = std::nullopt);

 private:
  Socket& sock_;
  std::string buffer_;
};

}  // namespace hector::net
