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

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "envmon/broker.hpp"
#include "envmon/broker_server.hpp"
#include "envmon/error.hpp"
#include "envmon/transport.hpp"

using namespace envmon;
using namespace envmon::broker;
using wire::Command;
using wire::StatusCode;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("envmon_broker_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

BrokerConfig make_config(const std::string& name) {
  BrokerConfig c;
  c.token_table = {{"secret", "dev"}, {"t2", "dev2"}};
  c.history_path = fresh_dir(name);
  return c;
}

wire::ProtocolMessage hw(std::uint16_t id, std::uint8_t pin, std::string_view value) {
  return wire::make_hardware_write(id, pin, value);
}

Session logged_in(Broker& b, std::string_view token = "secret", std::int64_t now = 0) {
  Session s;
  auto r = b.handle_message(s, wire::make_login(1, token), now);
  EXPECT_TRUE(s.authenticated);
  EXPECT_FALSE(r.disconnect);
  return s;
}

}  // namespace

TEST(HandleMessage, LoginKnownToken) {
  Broker b(make_config("login"));
  Session s;
  auto r = b.handle_message(s, wire::make_login(1, "secret"), 0);
  ASSERT_EQ(r.responses.size(), 1u);
  EXPECT_EQ(r.responses[0], wire::make_response(1, StatusCode::Ok));
  EXPECT_FALSE(r.disconnect);
  EXPECT_TRUE(s.authenticated);
  EXPECT_EQ(s.device_id, "dev");
}

TEST(HandleMessage, LoginUnknownToken) {
  Broker b(make_config("login_bad"));
  Session s;
  auto r = b.handle_message(s, wire::make_login(4, "nope"), 0);
  ASSERT_EQ(r.responses.size(), 1u);
  EXPECT_EQ(wire::response_status(r.responses[0]), 9);
  EXPECT_EQ(r.responses[0].message_id, 4);
  EXPECT_TRUE(r.disconnect);
  EXPECT_FALSE(s.authenticated);
}

TEST(HandleMessage, AuthGate) {
  Broker b(make_config("gate"));
  for (const auto& msg : {hw(1, 0, "1.0"), wire::make_ping(2), wire::make_response(3, StatusCode::Ok)}) {
    Session s;
    auto r = b.handle_message(s, msg, 0);
    ASSERT_EQ(r.responses.size(), 1u);
    EXPECT_EQ(wire::response_status(r.responses[0]), 2);
    EXPECT_TRUE(r.disconnect);
  }
  EXPECT_EQ(b.history_size(), 0u);
  EXPECT_TRUE(b.list_devices(0).empty());
}

TEST(HandleMessage, HardwareWriteUpdatesLatest) {
  Broker b(make_config("hw"));
  auto s = logged_in(b);
  auto r = b.handle_message(s, hw(2, 1, "98"), 1000);
  EXPECT_TRUE(r.responses.empty());
  EXPECT_FALSE(r.disconnect);
  auto rec = b.get_latest("dev", 1, 1000);
  EXPECT_EQ(rec.device_id, "dev");
  EXPECT_EQ(rec.pin, 1);
  EXPECT_EQ(rec.value, "98");
  EXPECT_EQ(rec.updated_at_ms, 1000);
  EXPECT_FALSE(rec.stale);
}

TEST(HandleMessage, PingAndMalformedBody) {
  Broker b(make_config("ping"));
  auto s = logged_in(b);
  auto r = b.handle_message(s, wire::make_ping(9), 0);
  EXPECT_EQ(r.responses.at(0), wire::make_response(9, StatusCode::Ok));

  wire::ProtocolMessage junk{Command::Hw, 10, wire::to_bytes(std::string("vr\0" "0", 4))};
  r = b.handle_message(s, junk, 0);
  EXPECT_EQ(wire::response_status(r.responses.at(0)), 2);
  EXPECT_TRUE(r.disconnect);
}

TEST(HandleMessage, ReloginAsOtherDeviceRefused) {
  Broker b(make_config("relogin"));
  auto s = logged_in(b);
  auto r = b.handle_message(s, wire::make_login(2, "t2"), 0);
  EXPECT_TRUE(r.disconnect);
  EXPECT_EQ(s.device_id, "dev");
}

TEST(GetLatest, Examples) {
  Broker b(make_config("latest"));
  EXPECT_THROW(b.get_latest("dev", 200, 0), Error);
  auto s = logged_in(b);
  b.handle_message(s, hw(2, 0, "23.4"), 0);
  b.handle_message(s, hw(3, 0, "24.0"), 2000);
  EXPECT_EQ(b.get_latest("dev", 0, 2000).value, "24.0");
  EXPECT_FALSE(b.get_latest("dev", 0, 32000).stale);
  EXPECT_TRUE(b.get_latest("dev", 0, 32001).stale);
  try {
    b.get_latest("dev", 200, 0);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotFound);
  }
}

TEST(GetHistory, Examples) {
  Broker b(make_config("history"));
  EXPECT_TRUE(b.get_history("dev", 0, 0, 100000).empty());
  auto s = logged_in(b);
  b.handle_message(s, hw(2, 0, "1.0"), 0);
  b.handle_message(s, hw(3, 0, "2.0"), 2000);
  b.handle_message(s, hw(4, 0, "3.0"), 4000);
  auto h = b.get_history("dev", 0, 0, 3000);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[0].value, "1.0");
  EXPECT_EQ(h[1].value, "2.0");
  EXPECT_TRUE(b.get_history("dev", 0, 5000, 5000).empty());
  EXPECT_EQ(b.get_history("dev", 0, 4000, 4001).size(), 1u);
  try {
    b.get_history("dev", 0, 10, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BadRange);
  }
}

TEST(GetHistory, IntervalMembershipOracle) {
  Broker b(make_config("interval"));
  auto s = logged_in(b);
  std::vector<std::int64_t> times;
  std::mt19937_64 gen(8);
  std::int64_t t = 0;
  for (int i = 0; i < 200; ++i) {
    t += static_cast<std::int64_t>(gen() % 3000);
    times.push_back(t);
    b.handle_message(s, hw(static_cast<std::uint16_t>(i + 2), 0, std::to_string(i)), t);
  }
  for (int q = 0; q < 500; ++q) {
    std::int64_t a = static_cast<std::int64_t>(gen() % (t + 2000));
    std::int64_t z = a + static_cast<std::int64_t>(gen() % 20000);
    std::size_t expected = 0;
    for (auto x : times) expected += (x >= a && x < z) ? 1 : 0;
    ASSERT_EQ(b.get_history("dev", 0, a, z).size(), expected) << a << " " << z;
  }
}

TEST(ListDevices, OnlineAndOffline) {
  Broker b(make_config("list"));
  EXPECT_TRUE(b.list_devices(0).empty());
  auto s = logged_in(b, "secret", 0);
  for (std::int64_t t = 10000; t <= 40000; t += 10000) b.handle_message(s, wire::make_ping(2), t);
  auto d = b.list_devices(45000);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_TRUE(d[0].online);
  EXPECT_EQ(d[0].last_seen_ms, 40000);
  EXPECT_TRUE(b.list_devices(70000)[0].online);
  EXPECT_FALSE(b.list_devices(71000)[0].online);
}

TEST(Durability, RestartRebuildsState) {
  auto cfg = make_config("durable");
  {
    Broker b(cfg);
    auto s = logged_in(b);
    for (int i = 0; i < 50; ++i) {
      b.handle_message(s, hw(2, 0, std::to_string(i) + ".5"), i * 2000);
      b.handle_message(s, hw(3, 1, std::to_string(50 + i)), i * 2000);
    }
  }
  Broker b(cfg);
  EXPECT_EQ(b.history_size(), 100u);
  EXPECT_EQ(b.get_latest("dev", 0, 0).value, "49.5");
  EXPECT_EQ(b.get_latest("dev", 1, 0).value, "99");
  EXPECT_EQ(b.get_latest("dev", 1, 0).updated_at_ms, 98000);
  auto h = b.get_history("dev", 0, 0, 1'000'000);
  ASSERT_EQ(h.size(), 50u);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(h[i].value, std::to_string(i) + ".5");
}

TEST(Durability, TornLastLineIsSkipped) {
  auto cfg = make_config("torn");
  {
    Broker b(cfg);
    auto s = logged_in(b);
    b.handle_message(s, hw(2, 0, "1.0"), 0);
    b.handle_message(s, hw(3, 0, "2.0"), 10);
  }
  {
    std::ofstream out(cfg.history_path / "dev.jsonl", std::ios::app);
    out << R"({"ts":20,"device":"dev","pi)";
  }
  Broker b(cfg);
  EXPECT_EQ(b.history_size(), 2u);
  EXPECT_EQ(b.get_latest("dev", 0, 0).value, "2.0");
}

TEST(Durability, CorruptMiddleLineIsAnError) {
  auto cfg = make_config("corrupt");
  std::filesystem::create_directories(cfg.history_path);
  {
    std::ofstream out(cfg.history_path / "dev.jsonl");
    out << "garbage\n" << history_entry_to_json_line({0, "dev", 0, "1"}) << "\n";
  }
  EXPECT_THROW(Broker b(cfg), Error);
}

TEST(HistoryLine, RoundTrip) {
  HistoryEntry e{1234, "dev", 1, "98"};
  auto line = history_entry_to_json_line(e);
  auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["ts"], 1234);
  EXPECT_EQ(j["device"], "dev");
  EXPECT_EQ(j["pin"], 1);
  EXPECT_EQ(j["value"], "98");
  EXPECT_EQ(history_entry_from_json_line(line), e);
}

TEST(Config, Validation) {
  BrokerConfig c;
  c.token_table = {{"a", "dev"}, {"b", "dev"}};
  EXPECT_THROW(c.validate(), Error);
  c.token_table = {{"a", "../etc"}};
  EXPECT_THROW(c.validate(), Error);
  c.token_table = {{"a", "ok_id-1.x"}};
  EXPECT_NO_THROW(c.validate());
}

TEST(AuthSoundness, RandomTrafficNeverWritesWithoutLogin) {
  Broker b(make_config("soundness"));
  std::mt19937_64 gen(77);
  std::size_t accepted_writes = 0;
  for (int round = 0; round < 2000; ++round) {
    Session s;
    bool authed = false;
    for (int i = 0; i < 8; ++i) {
      wire::ProtocolMessage m;
      switch (gen() % 4) {
        case 0: m = wire::make_login(1, gen() % 3 == 0 ? "secret" : "wrong"); break;
        case 1: m = wire::make_ping(2); break;
        case 2: m = hw(3, 0, "1.0"); break;
        default: m = wire::make_response(4, StatusCode::Ok); break;
      }
      auto before = b.history_size();
      auto r = b.handle_message(s, m, 0);
      if (m.command == Command::Login) authed = !r.disconnect;
      if (b.history_size() != before) {
        ASSERT_TRUE(authed);
        ++accepted_writes;
      }
      if (r.disconnect) break;
    }
  }
  EXPECT_GT(accepted_writes, 0u);
}

TEST(Concurrency, ParallelSessionsLoseNothing) {
  auto cfg = make_config("parallel");
  cfg.token_table.clear();
  for (int d = 0; d < 8; ++d) cfg.token_table["tok" + std::to_string(d)] = "dev" + std::to_string(d);
  Broker b(cfg);
  std::vector<std::thread> threads;
  for (int d = 0; d < 8; ++d) {
    threads.emplace_back([&b, d] {
      Session s;
      b.handle_message(s, wire::make_login(1, "tok" + std::to_string(d)), 0);
      for (int i = 0; i < 250; ++i) {
        b.handle_message(s, hw(static_cast<std::uint16_t>(i + 2), 0, std::to_string(i)), i);
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(b.history_size(), 2000u);
  for (int d = 0; d < 8; ++d) {
    auto h = b.get_history("dev" + std::to_string(d), 0, 0, 1000);
    ASSERT_EQ(h.size(), 250u);
    for (int i = 0; i < 250; ++i) ASSERT_EQ(h[i].value, std::to_string(i));
  }
  Broker reloaded(cfg);
  EXPECT_EQ(reloaded.history_size(), 2000u);
}

TEST(Server, TcpAndHttpRoundTrip) {
  auto cfg = make_config("server");
  cfg.listen_address = "127.0.0.1:0";
  cfg.http_listen_address = "127.0.0.1:0";
  SystemClock clock;
  auto broker = std::make_shared<Broker>(cfg);
  BrokerServer server(broker, clock);
  server.start();
  ASSERT_NE(server.device_port(), 0);
  ASSERT_NE(server.http_port(), 0);

  TcpTransport t;
  ASSERT_TRUE(t.open("127.0.0.1:" + std::to_string(server.device_port())));
  wire::Bytes out;
  wire::append_message(out, wire::make_login(1, "secret"));
  wire::append_message(out, hw(2, 1, "98"));
  wire::append_message(out, wire::make_ping(3));
  ASSERT_TRUE(t.send(out));
  wire::StreamDecoder dec;
  std::vector<wire::ProtocolMessage> got;
  for (int i = 0; i < 50 && got.size() < 2; ++i) {
    auto data = t.receive(std::chrono::milliseconds(100));
    ASSERT_TRUE(data);
    auto msgs = dec.feed(*data);
    got.insert(got.end(), msgs.begin(), msgs.end());
  }
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0], wire::make_response(1, StatusCode::Ok));
  EXPECT_EQ(got[1], wire::make_response(3, StatusCode::Ok));

  httplib::Client http("127.0.0.1", server.http_port());
  auto latest = http.Get("/devices/dev/pins/1/latest");
  ASSERT_TRUE(latest);
  EXPECT_EQ(latest->status, 200);
  auto j = nlohmann::json::parse(latest->body);
  EXPECT_EQ(j["pin"], 1);
  EXPECT_EQ(j["value"], "98");
  EXPECT_EQ(j["stale"], false);

  auto hist = http.Get("/devices/dev/pins/1/history?from=0&to=99999999999999");
  ASSERT_TRUE(hist);
  EXPECT_EQ(nlohmann::json::parse(hist->body).size(), 1u);

  auto devices = http.Get("/devices");
  ASSERT_TRUE(devices);
  auto dj = nlohmann::json::parse(devices->body);
  ASSERT_EQ(dj.size(), 1u);
  EXPECT_EQ(dj[0]["device"], "dev");
  EXPECT_EQ(dj[0]["online"], true);

  EXPECT_EQ(http.Get("/devices/dev/pins/7/latest")->status, 404);
  EXPECT_EQ(http.Get("/devices/dev/pins/999/latest")->status, 400);
  EXPECT_EQ(http.Get("/devices/dev/pins/1/history?from=9&to=1")->status, 400);
  EXPECT_EQ(http.Get("/devices/dev/pins/1/history?from=abc")->status, 400);

  // The broker drops a peer that sends garbage.
  ASSERT_TRUE(t.send(std::vector<std::uint8_t>{0xFF, 0, 1, 0, 0}));
  std::optional<wire::Bytes> end = wire::Bytes{};
  for (int i = 0; i < 50 && end && end->empty(); ++i) end = t.receive(std::chrono::milliseconds(100));
  EXPECT_FALSE(end);
  server.stop();
}

TEST(Server, BindConflictIsReported) {
  auto cfg = make_config("bind");
  cfg.listen_address = "127.0.0.1:0";
  cfg.http_listen_address = "127.0.0.1:0";
  SystemClock clock;
  BrokerServer first(std::make_shared<Broker>(cfg), clock);
  first.start();
  auto cfg2 = cfg;
  cfg2.listen_address = "127.0.0.1:" + std::to_string(first.device_port());
  BrokerServer second(std::make_shared<Broker>(cfg2), clock);
  try {
    second.start();
    FAIL() << "expected BindFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BindFailure);
  }
}
