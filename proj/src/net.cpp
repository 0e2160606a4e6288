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

#include "edgemeter/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include <fmt/format.h>

#include "edgemeter/error.hpp"
#include "edgemeter/protocol.hpp"

namespace edgemeter::net {

std::optional<Endpoint> parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) return std::nullopt;
  const auto port_text = text.substr(colon + 1);
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (port_text.empty() || ec != std::errc{} || ptr != port_text.data() + port_text.size() ||
      port > 65535) {
    return std::nullopt;
  }
  return Endpoint{std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

Socket::~Socket() { close(); }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

namespace {

addrinfo* resolve(const Endpoint& endpoint, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* result = nullptr;
  const auto port = std::to_string(endpoint.port);
  const char* host = endpoint.host.empty() ? nullptr : endpoint.host.c_str();
  const int rc = ::getaddrinfo(host, port.c_str(), &hints, &result);
  if (rc != 0) {
    throw TransportError(passive ? ErrorCode::AddressInUse : ErrorCode::ConnectFailed,
                         fmt::format("cannot resolve {}: {}", endpoint.host, ::gai_strerror(rc)));
  }
  return result;
}

}  // namespace

Socket listen_tcp(const Endpoint& endpoint) {
  addrinfo* info = resolve(endpoint, true);
  Socket s(::socket(info->ai_family, info->ai_socktype, info->ai_protocol));
  const int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const int rc = ::bind(s.fd(), info->ai_addr, info->ai_addrlen);
  const int bind_errno = errno;
  ::freeaddrinfo(info);
  if (rc != 0 || ::listen(s.fd(), 4) != 0) {
    throw TransportError(ErrorCode::AddressInUse,
                         fmt::format("cannot listen on {}:{}: {}", endpoint.host, endpoint.port,
                                     std::strerror(rc != 0 ? bind_errno : errno)));
  }
  return s;
}

std::uint16_t local_port(const Socket& socket) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  ::getsockname(socket.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  return ntohs(addr.sin_port);
}

Socket accept_tcp(const Socket& listener, Micros timeout) {
  pollfd pfd{listener.fd(), POLLIN, 0};
  if (::poll(&pfd, 1, static_cast<int>(timeout.count() / 1000)) <= 0) return Socket{};
  Socket s(::accept(listener.fd(), nullptr, nullptr));
  if (s.valid()) {
    const int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  return s;
}

Socket connect_tcp(const Endpoint& endpoint) {
  addrinfo* info = nullptr;
  try {
    info = resolve(endpoint, false);
  } catch (const TransportError& e) {
    throw TransportError(ErrorCode::ConnectFailed, e.what());
  }
  Socket s(::socket(info->ai_family, info->ai_socktype, info->ai_protocol));
  const int rc = ::connect(s.fd(), info->ai_addr, info->ai_addrlen);
  const int err = errno;
  ::freeaddrinfo(info);
  if (rc != 0) {
    throw TransportError(ErrorCode::ConnectFailed, fmt::format("cannot connect to {}:{}: {}",
                                                               endpoint.host, endpoint.port,
                                                               std::strerror(err)));
  }
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return s;
}

void LineChannel::send_line(std::string_view line) {
  std::string data(line);
  data += '\n';
  std::size_t done = 0;
  while (done < data.size()) {
    const auto n = ::send(socket_.fd(), data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(ErrorCode::ConnectFailed, fmt::format("send: {}", std::strerror(errno)));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> LineChannel::read_line(Micros timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (const auto eol = buffer_.find('\n'); eol != std::string::npos) {
      std::string line = buffer_.substr(0, eol);
      buffer_.erase(0, eol + 1);
      return line;
    }
    if (buffer_.size() > protocol::kMaxLineLength) {
      throw TransportError(ErrorCode::ProtocolViolation, "line exceeds maximum length");
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() < 0) return std::nullopt;
    pollfd pfd{socket_.fd(), POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) {
      if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
      continue;
    }
    char chunk[16384];
    const auto n = ::recv(socket_.fd(), chunk, sizeof chunk, 0);
    if (n == 0) throw TransportError(ErrorCode::ConnectFailed, "peer closed the connection");
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw TransportError(ErrorCode::ConnectFailed, fmt::format("recv: {}", std::strerror(errno)));
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace edgemeter::net
