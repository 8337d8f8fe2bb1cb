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

#include "envmon/broker_server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <limits>

#include <httplib.h>
#include <json.hpp>

#include "envmon/error.hpp"
#include "envmon/log.hpp"
#include "envmon/text.hpp"
#include "envmon/transport.hpp"

namespace envmon::broker {

using nlohmann::json;

namespace {

constexpr int kPollMs = 100;

int bind_listener(const HostPort& hp, std::uint16_t& bound_port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  auto port = std::to_string(hp.port);
  const char* host = hp.host.empty() || hp.host == "*" ? nullptr : hp.host.c_str();
  if (int rc = ::getaddrinfo(host, port.c_str(), &hints, &res); rc != 0) {
    throw Error(Errc::BindFailure, "cannot resolve '" + hp.host + "': " + ::gai_strerror(rc));
  }

  int fd = -1;
  std::string last_error = "no usable address";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) break;
    last_error = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) {
    throw Error(Errc::BindFailure,
                "cannot bind " + hp.host + ":" + std::to_string(hp.port) + ": " + last_error);
  }

  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  bound_port = addr.ss_family == AF_INET6
                   ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                   : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  return fd;
}

bool send_all(int fd, const wire::Bytes& octets) {
  std::size_t sent = 0;
  while (sent < octets.size()) {
    auto n = ::send(fd, octets.data() + sent, octets.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply_json(res, status, {{"error", message}});
}

std::optional<std::uint8_t> parse_pin(const std::string& s) {
  auto v = text::parse_int64(s);
  if (!v || *v < 0 || *v > 255) return std::nullopt;
  return static_cast<std::uint8_t>(*v);
}

}  // namespace

BrokerServer::BrokerServer(std::shared_ptr<Broker> broker, Clock& clock)
    : broker_(std::move(broker)), clock_(clock), http_(std::make_unique<httplib::Server>()) {}

BrokerServer::~BrokerServer() { stop(); }

void BrokerServer::start() {
  const auto& cfg = broker_->config();
  listen_fd_ = bind_listener(parse_host_port(cfg.listen_address), device_port_);

  auto http_hp = parse_host_port(cfg.http_listen_address);
  setup_http_routes();
  bool bound = false;
  if (http_hp.port == 0) {
    int port = http_->bind_to_any_port(http_hp.host);
    bound = port > 0;
    if (bound) http_port_ = static_cast<std::uint16_t>(port);
  } else {
    bound = http_->bind_to_port(http_hp.host, http_hp.port);
    http_port_ = http_hp.port;
  }
  if (!bound) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(Errc::BindFailure, "cannot bind HTTP on " + cfg.http_listen_address);
  }

  running_ = true;
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
  // stop() is a no-op until the listener loop is running.
  http_->wait_until_ready();
  accept_thread_ = std::thread([this] { accept_loop(); });
  log::event("broker_listening", {{"device_port", device_port_}, {"http_port", http_port_}});
}

void BrokerServer::stop() {
  if (!running_.exchange(false)) return;
  http_->stop();
  if (http_thread_.joinable()) http_thread_.join();
  if (accept_thread_.joinable()) accept_thread_.join();
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  std::list<Connection> conns;
  {
    std::lock_guard lock(conn_mutex_);
    for (auto& c : connections_) {
      if (c.fd >= 0) ::shutdown(c.fd, SHUT_RDWR);
    }
    conns.splice(conns.end(), connections_);
  }
  for (auto& c : conns) {
    if (c.thread.joinable()) c.thread.join();
  }
  log::event("broker_stopped");
}

std::size_t BrokerServer::connection_count() const {
  std::lock_guard lock(conn_mutex_);
  std::size_t n = 0;
  for (const auto& c : connections_) n += c.done ? 0 : 1;
  return n;
}

void BrokerServer::reap_finished() {
  std::list<Connection> finished;
  {
    std::lock_guard lock(conn_mutex_);
    for (auto it = connections_.begin(); it != connections_.end();) {
      auto next = std::next(it);
      if (it->done) finished.splice(finished.end(), connections_, it);
      it = next;
    }
  }
  for (auto& c : finished) c.thread.join();
}

void BrokerServer::accept_loop() {
  while (running_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, kPollMs);
    reap_finished();
    if (rc <= 0) continue;
    int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

    std::lock_guard lock(conn_mutex_);
    if (!running_) {
      ::close(fd);
      break;
    }
    auto& conn = connections_.emplace_back();
    conn.fd = fd;
    conn.thread = std::thread([this, &conn] { serve_connection(conn); });
  }
}

void BrokerServer::serve_connection(Connection& conn) {
  Session session;
  std::uint8_t buf[4096];
  bool open = true;
  while (open && running_) {
    pollfd pfd{conn.fd, POLLIN, 0};
    int rc = ::poll(&pfd, 1, kPollMs);
    if (rc == 0) continue;
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) break;
    auto n = ::recv(conn.fd, buf, sizeof(buf), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;

    std::vector<wire::ProtocolMessage> messages;
    try {
      messages = session.decoder.feed({buf, static_cast<std::size_t>(n)});
    } catch (const Error& e) {
      log::event("broker_protocol_error", {{"device", session.device_id}, {"error", e.what()}});
      break;
    }
    for (const auto& msg : messages) {
      HandleResult result;
      try {
        result = broker_->handle_message(session, msg, clock_.now_ms());
      } catch (const Error& e) {
        log::event("broker_store_error", {{"device", session.device_id}, {"error", e.what()}});
        open = false;
        break;
      }
      wire::Bytes out;
      for (const auto& rsp : result.responses) wire::append_message(out, rsp);
      if (!out.empty() && !send_all(conn.fd, out)) open = false;
      if (result.disconnect) open = false;
      if (!open) break;
    }
  }
  if (!session.device_id.empty()) {
    log::event("broker_session_closed", {{"device", session.device_id}});
  }
  {
    std::lock_guard lock(conn_mutex_);
    ::close(conn.fd);
    conn.fd = -1;
  }
  conn.done = true;
}

void BrokerServer::setup_http_routes() {
  http_->Get("/devices", [this](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& d : broker_->list_devices(clock_.now_ms())) {
      out.push_back({{"device", d.device_id}, {"online", d.online}, {"last_seen_ms", d.last_seen_ms}});
    }
    reply_json(res, 200, out);
  });

  http_->Get(R"(/devices/([^/]+)/pins/([^/]+)/latest)",
             [this](const httplib::Request& req, httplib::Response& res) {
               auto pin = parse_pin(req.matches[2]);
               if (!pin) return reply_error(res, 400, "bad pin");
               try {
                 auto rec = broker_->get_latest(req.matches[1].str(), *pin, clock_.now_ms());
                 reply_json(res, 200,
                            {{"pin", rec.pin},
                             {"value", rec.value},
                             {"updated_at_ms", rec.updated_at_ms},
                             {"stale", rec.stale}});
               } catch (const Error&) {
                 reply_error(res, 404, "not found");
               }
             });

  http_->Get(R"(/devices/([^/]+)/pins/([^/]+)/history)",
             [this](const httplib::Request& req, httplib::Response& res) {
               auto pin = parse_pin(req.matches[2]);
               if (!pin) return reply_error(res, 400, "bad pin");
               std::int64_t from = 0;
               std::int64_t to = std::numeric_limits<std::int64_t>::max();
               if (req.has_param("from")) {
                 auto v = text::parse_int64(req.get_param_value("from"));
                 if (!v) return reply_error(res, 400, "bad from");
                 from = *v;
               }
               if (req.has_param("to")) {
                 auto v = text::parse_int64(req.get_param_value("to"));
                 if (!v) return reply_error(res, 400, "bad to");
                 to = *v;
               }
               try {
                 json out = json::array();
                 for (const auto& e : broker_->get_history(req.matches[1].str(), *pin, from, to)) {
                   out.push_back({{"ts", e.timestamp_ms}, {"value", e.value}});
                 }
                 reply_json(res, 200, out);
               } catch (const Error& e) {
                 reply_error(res, 400, e.what());
               }
             });
}

}  // namespace envmon::broker
