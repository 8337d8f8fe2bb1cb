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

#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <thread>

#include "envmon/broker.hpp"
#include "envmon/clock.hpp"

namespace httplib {
class Server;
}

namespace envmon::broker {

/// Network front end: the device TCP listener (one thread per connection)
/// plus the HTTP query API. Ports given as 0 are picked by the kernel.
class BrokerServer {
 public:
  BrokerServer(std::shared_ptr<Broker> broker, Clock& clock);
  ~BrokerServer();
  BrokerServer(const BrokerServer&) = delete;
  BrokerServer& operator=(const BrokerServer&) = delete;

  // Throws Error(BindFailure) if either address cannot be bound.
  void start();
  // Closes listeners and every device connection, then joins all threads.
  void stop();

  std::uint16_t device_port() const noexcept { return device_port_; }
  std::uint16_t http_port() const noexcept { return http_port_; }
  std::size_t connection_count() const;

 private:
  struct Connection {
    int fd = -1;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void accept_loop();
  void serve_connection(Connection& conn);
  void setup_http_routes();
  void reap_finished();

  std::shared_ptr<Broker> broker_;
  Clock& clock_;
  std::unique_ptr<httplib::Server> http_;
  std::thread http_thread_;
  std::thread accept_thread_;
  int listen_fd_ = -1;
  std::uint16_t device_port_ = 0;
  std::uint16_t http_port_ = 0;
  std::atomic<bool> running_{false};
  mutable std::mutex conn_mutex_;
  std::list<Connection> connections_;
};

}  // namespace envmon::broker
