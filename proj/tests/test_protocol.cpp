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

#include "edgemeter/protocol.hpp"

#include <random>
#include <thread>

#include <sys/socket.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "edgemeter/net.hpp"
#include "test_util.hpp"

namespace edgemeter::protocol {
namespace {

using edgemeter::testing::at_us;
using edgemeter::testing::code_of;

TEST(Base64, KnownVectors) {
  auto enc = [](std::string s) {
    return base64_encode(std::vector<std::uint8_t>(s.begin(), s.end()));
  };
  EXPECT_EQ(enc(""), "");
  EXPECT_EQ(enc("f"), "Zg==");
  EXPECT_EQ(enc("fo"), "Zm8=");
  EXPECT_EQ(enc("foo"), "Zm9v");
  EXPECT_EQ(enc("foobar"), "Zm9vYmFy");
  EXPECT_FALSE(base64_decode("Zm9"));
  EXPECT_FALSE(base64_decode("Zm9*"));
  EXPECT_FALSE(base64_decode("Z==="));
}

TEST(Base64, RandomRoundTrip) {
  std::mt19937 rng(4);
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::uint8_t> bytes(rng() % 200);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    ASSERT_EQ(base64_decode(base64_encode(bytes)), bytes);
  }
}

std::vector<Message> samples() {
  return {
      Hello{"run-1", "rpi4", "mobilenet_v2", 100, 4, SyncFields{0.0123, 0.0004, 0.0001, 8}},
      Hello{"run-2", "coral", "m", 1, 1, std::nullopt},
      TimeProbe{1700000000.25},
      TimeReply{1.5, 2.25, 2.5},
      Event{"run-1", "inf_start_batch_3", at_us(1'700'000'000'123'456)},
      Result{"run-1", {"img_7", {{5, 0.75}, {1, 0.125}}}},
      Fetch{"images/a.jpg"},
      Data{"images/a.jpg", 2, {0, 1, 2, 255}, false, 131076},
      Data{"images/a.jpg", 3, {}, true, 131076},
      EndRun{"run-1", std::nullopt},
      EndRun{"run-1", 100},
      ErrorMsg{"FetchOutsideRoot", "nope"},
  };
}

TEST(Wire, RoundTripEveryKind) {
  for (const auto& m : samples()) {
    const auto line = encode(m);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    EXPECT_EQ(decode(line), m) << line;
  }
}

TEST(Wire, FieldNames) {
  const auto hello = nlohmann::json::parse(encode(samples()[0]));
  EXPECT_EQ(hello["kind"], "HELLO");
  EXPECT_EQ(hello["run_id"], "run-1");
  EXPECT_EQ(hello["batch_count"], 100);
  EXPECT_EQ(hello["clock_offset"], 0.0123);
  const auto event = nlohmann::json::parse(encode(samples()[4]));
  EXPECT_EQ(event["kind"], "EVENT");
  EXPECT_EQ(event["label"], "inf_start_batch_3");
  EXPECT_DOUBLE_EQ(event["time_s"].get<double>(), 1700000000.123456);
  const auto result = nlohmann::json::parse(encode(samples()[5]));
  EXPECT_EQ(result["topk"][0][0], 5);
  const auto data = nlohmann::json::parse(encode(samples()[7]));
  EXPECT_EQ(data["data"], "AAEC/w==");
  EXPECT_EQ(data["eof"], false);
  EXPECT_EQ(kind_name(samples()[3]), "TIME_REPLY");
}

TEST(Wire, RejectsMalformed) {
  for (const char* bad : {"", "{", "[]", "{\"kind\":\"NOPE\"}", "{\"kind\":\"EVENT\",\"run_id\":\"r\"}",
                          "{\"kind\":\"EVENT\",\"run_id\":\"r\",\"label\":\"x\",\"time_s\":\"1\"}",
                          "{\"kind\":\"DATA\",\"path\":\"p\",\"seq\":0,\"data\":\"!!\",\"eof\":false,\"size\":1}"}) {
    EXPECT_EQ(code_of([&] { decode(bad); }), ErrorCode::ProtocolViolation) << bad;
  }
}

TEST(Net, Endpoint) {
  const auto e = net::parse_endpoint("127.0.0.1:9000");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->host, "127.0.0.1");
  EXPECT_EQ(e->port, 9000);
  EXPECT_EQ(net::parse_endpoint(":0")->host, "");
  EXPECT_FALSE(net::parse_endpoint("host"));
  EXPECT_FALSE(net::parse_endpoint("host:70000"));
  EXPECT_FALSE(net::parse_endpoint("host:x"));
}

TEST(Net, LineChannelLoopback) {
  auto listener = net::listen_tcp({"127.0.0.1", 0});
  const auto port = net::local_port(listener);
  EXPECT_EQ(code_of([&] { net::listen_tcp({"127.0.0.1", port}); }), ErrorCode::AddressInUse);
  std::thread client([port] {
    net::LineChannel ch(net::connect_tcp({"127.0.0.1", port}));
    ch.send_line("one");
    ch.send_line(std::string(200'000, 'x'));
    const auto echo = ch.read_line(Micros{2'000'000});
    ASSERT_TRUE(echo);
    EXPECT_EQ(*echo, "ack");
  });
  net::LineChannel server(net::accept_tcp(listener, Micros{2'000'000}));
  EXPECT_EQ(server.read_line(Micros{2'000'000}), "one");
  EXPECT_EQ(server.read_line(Micros{2'000'000})->size(), 200'000u);
  EXPECT_FALSE(server.read_line(Micros{10'000}));
  server.send_line("ack");
  client.join();
  EXPECT_EQ(code_of([&] { server.read_line(Micros{2'000'000}); }), ErrorCode::ConnectFailed);
}

TEST(Net, OverlongLine) {
  auto listener = net::listen_tcp({"127.0.0.1", 0});
  const auto port = net::local_port(listener);
  std::thread client([port] {
    auto socket = net::connect_tcp({"127.0.0.1", port});
    const std::string junk(kMaxLineLength + 10, 'y');
    std::size_t sent = 0;
    while (sent < junk.size()) {
      const auto n = ::send(socket.fd(), junk.data() + sent, junk.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) break;
      sent += static_cast<std::size_t>(n);
    }
  });
  net::LineChannel server(net::accept_tcp(listener, Micros{2'000'000}));
  EXPECT_EQ(code_of([&] {
              while (true) server.read_line(Micros{2'000'000});
            }),
            ErrorCode::ProtocolViolation);
  server.socket().close();
  client.join();
}

TEST(Net, ConnectRefused) {
  auto listener = net::listen_tcp({"127.0.0.1", 0});
  const auto port = net::local_port(listener);
  listener.close();
  EXPECT_EQ(code_of([&] { net::connect_tcp({"127.0.0.1", port}); }), ErrorCode::ConnectFailed);
}

}  // namespace
}  // namespace edgemeter::protocol
