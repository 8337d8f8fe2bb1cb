/*
 * Copyright 2026 The envmon Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "envmon/transport.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>

#include "envmon/error.hpp"
#include "envmon/text.hpp"

namespace envmon {

HostPort parse_host_port(std::string_view address) {
  auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(Errc::ConfigInvalid, "address '" + std::string(address) + "' is not host:port");
  }
  auto port = text::parse_int64(address.substr(colon + 1));
  if (!port || *port < 0 || *port > 65535) {
    throw Error(Errc::ConfigInvalid, "bad port in '" + std::string(address) + "'");
  }
  return {std::string(address.substr(0, colon)), static_cast<std::uint16_t>(*port)};
}

TcpTransport::~TcpTransport() { close(); }

bool TcpTransport::open(const std::string& address) {
  close();
  HostPort hp;
  try {
    hp = parse_host_port(address);
  } catch (const Error&) {
    return false;
  }

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  auto port = std::to_string(hp.port);
  if (::getaddrinfo(hp.host.c_str(), port.c_str(), &hints, &res) != 0) return false;

  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  return fd_ >= 0;
}

bool TcpTransport::send(std::span<const std::uint8_t> octets) {
  if (fd_ < 0) return false;
  std::size_t sent = 0;
  while (sent < octets.size()) {
    auto n = ::send(fd_, octets.data() + sent, octets.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

std::optional<wire::Bytes> TcpTransport::receive(std::chrono::milliseconds wait) {
  if (fd_ < 0) return std::nullopt;
  pollfd pfd{fd_, POLLIN, 0};
  int rc = ::poll(&pfd, 1, static_cast<int>(wait.count()));
  if (rc == 0) return wire::Bytes{};
  if (rc < 0) return errno == EINTR ? std::optional<wire::Bytes>(wire::Bytes{}) : std::nullopt;

  wire::Bytes buf(4096);
  auto n = ::recv(fd_, buf.data(), buf.size(), 0);
  if (n <= 0) {
    if (n < 0 && (errno == EINTR || errno == EAGAIN)) return wire::Bytes{};
    return std::nullopt;
  }
  buf.resize(static_cast<std::size_t>(n));
  return buf;
}

void TcpTransport::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

}  // namespace envmon
