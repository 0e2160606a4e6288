// Copyright 2026 The edgemeter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "edgemeter/measurement.hpp"

namespace edgemeter::net {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// `host:port`; an empty host means all interfaces.
std::optional<Endpoint> parse_endpoint(std::string_view text);

/// Owning file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close();
  void shutdown();

 private:
  int fd_ = -1;
};

/// Throws TransportError(AddressInUse) when the port is taken.
Socket listen_tcp(const Endpoint& endpoint);
std::uint16_t local_port(const Socket& socket);
/// Waits up to `timeout` for a connection; an invalid Socket on timeout.
Socket accept_tcp(const Socket& listener, Micros timeout);
/// Throws TransportError(ConnectFailed).
Socket connect_tcp(const Endpoint& endpoint);

/// Newline-framed text over a stream socket.
class LineChannel {
 public:
  explicit LineChannel(Socket socket) : socket_(std::move(socket)) {}

  /// Appends '\n' and writes the whole line in one send loop.
  void send_line(std::string_view line);
  /// Next line without its '\n'. nullopt on timeout; throws
  /// TransportError(ProtocolViolation) on an over-long line and
  /// TransportError(ConnectFailed) once the peer has closed.
  std::optional<std::string> read_line(Micros timeout);

  Socket& socket() { return socket_; }

 private:
  Socket socket_;
  std::string buffer_;
};

}  // namespace edgemeter::net
