// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <nlohmann/json.hpp>

#include "editduet/gateway.hpp"
#include "oracles.hpp"

#include <httplib.h>

using namespace editduet;
using namespace editduet::testing;
using nlohmann::json;

namespace {

CompletionRequest request(const std::string& user_text) {
  CompletionRequest r;
  r.messages = {{"system", "sys", {}}, {"user", user_text, {}}};
  return r;
}

GatewayErrorKind error_kind(ChatGateway& g, const CompletionRequest& r) {
  try {
    g.complete(r);
  } catch (const GatewayError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no GatewayError";
  return GatewayErrorKind::BadResponse;
}

// Local chat-completions endpoint answering from a handler.
class FakeServer {
 public:
  explicit FakeServer(httplib::Server::Handler handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

json completion(const std::string& content) {
  return {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
}

RemoteConfig fast_config(const std::string& url) {
  RemoteConfig c;
  c.base_url = url;
  c.api_key = "test-key";
  c.model = "test-model";
  c.initial_backoff = std::chrono::milliseconds(1);
  c.timeout = std::chrono::seconds(5);
  return c;
}

}  // namespace

TEST(ScriptedGateway, RepliesInOrderThenExhausts) {
  ScriptedGateway g({{std::nullopt, "one"}, {std::nullopt, "two"}});
  EXPECT_EQ(g.complete(request("a")), "one");
  EXPECT_EQ(g.complete(request("b")), "two");
  EXPECT_EQ(error_kind(g, request("c")), GatewayErrorKind::Exhausted);
  EXPECT_EQ(g.consumed(), 2u);
  // The unanswered request is still recorded.
  EXPECT_EQ(g.requests().size(), 3u);
}

TEST(ScriptedGateway, MatchNamesExpectedSubstring) {
  ScriptedGateway g({{std::string("kneading"), "x"}});
  try {
    g.complete(request("oven only"));
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.kind(), GatewayErrorKind::ScriptMismatch);
    EXPECT_NE(std::string(e.what()).find("\"kneading\""), std::string::npos);
  }
}

TEST(ScriptedGateway, ParsesObjectReplies) {
  const auto entries = ScriptedGateway::parse_script(
      json::parse(R"({"entries":[{"match":null,"reply":{"tool":"DONE","args":{}}},{"reply":"plain"}]})"));
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].reply, R"({"args":{},"tool":"DONE"})");
  EXPECT_FALSE(entries[0].match);
  EXPECT_THROW(ScriptedGateway::load_script(data_dir() / "missing.json"), SchemaError);
}

TEST(Gateway, RequestValidation) {
  CompletionRequest r;
  EXPECT_THROW(validate_request(r), std::invalid_argument);
  r.messages = {{"user", "hi", {}}};
  EXPECT_THROW(validate_request(r), std::invalid_argument);
  ScriptedGateway g({{std::nullopt, "x"}});
  EXPECT_THROW(g.complete(r), std::invalid_argument);
}

TEST(Gateway, ImagesBecomeContentParts) {
  const json wire = to_json(ChatMessage{"user", "compare", {{"image/png", "QUJD"}}});
  ASSERT_TRUE(wire["content"].is_array());
  EXPECT_EQ(wire["content"][0]["type"], "text");
  EXPECT_EQ(wire["content"][1]["image_url"]["url"], "data:image/png;base64,QUJD");
}

TEST(RemoteGateway, PostsChatCompletion) {
  json seen;
  std::string auth;
  FakeServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(completion("hello").dump(), "application/json");
  });
  RemoteGateway g(fast_config(server.base_url()));
  CompletionRequest r = request("hi");
  r.temperature = 0.7;
  r.seed = 5;
  r.constraint = json{{"type", "object"}};
  EXPECT_EQ(g.complete(r), "hello");
  EXPECT_EQ(auth, "Bearer test-key");
  EXPECT_EQ(seen["model"], "test-model");
  EXPECT_EQ(seen["seed"], 5);
  EXPECT_DOUBLE_EQ(seen["temperature"].get<double>(), 0.7);
  EXPECT_EQ(seen["messages"].size(), 2u);
  EXPECT_EQ(seen["response_format"]["json_schema"]["schema"], r.constraint);
}

TEST(RemoteGateway, RetriesServerErrorsThenSucceeds) {
  std::atomic<int> calls{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    res.set_content(completion("ok").dump(), "application/json");
  });
  RemoteGateway g(fast_config(server.base_url()));
  EXPECT_EQ(g.complete(request("hi")), "ok");
  EXPECT_EQ(calls.load(), 3);
}

TEST(RemoteGateway, ErrorKinds) {
  std::atomic<int> status{401};
  std::atomic<int> calls{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = status.load();
    res.set_content(status == 200 ? R"({"choices":[]})" : "nope", "text/plain");
  });
  RemoteGateway g(fast_config(server.base_url()));
  EXPECT_EQ(error_kind(g, request("hi")), GatewayErrorKind::Auth);
  EXPECT_EQ(calls.load(), 1);
  status = 429;
  calls = 0;
  EXPECT_EQ(error_kind(g, request("hi")), GatewayErrorKind::RateLimited);
  EXPECT_EQ(calls.load(), 4);
  status = 200;
  EXPECT_EQ(error_kind(g, request("hi")), GatewayErrorKind::BadResponse);
}

TEST(RemoteGateway, UnreachableHostIsTransport) {
  auto config = fast_config("http://127.0.0.1:1/v1");
  config.max_retries = 1;
  RemoteGateway g(config);
  EXPECT_EQ(error_kind(g, request("hi")), GatewayErrorKind::Transport);
}

TEST(RecordReplay, ReplaysByteIdenticallyAndMissesOnEdits) {
  TempDir dir("session");
  auto inner = std::make_shared<ScriptedGateway>(std::vector<ScriptEntry>{{std::nullopt, "reply ☃"}});
  {
    auto rec = record_replay(dir.path(), SessionMode::Record, inner);
    EXPECT_EQ(rec->complete(request("hi")), "reply ☃");
  }
  auto replay = record_replay(dir.path(), SessionMode::Replay);
  EXPECT_EQ(replay->complete(request("hi")), "reply ☃");
  EXPECT_THROW(replay->complete(request("hi!")), CacheMiss);
  EXPECT_EQ(RecordReplayGateway::request_hash(request("hi")).size(), 64u);
  EXPECT_NE(RecordReplayGateway::request_hash(request("hi")), RecordReplayGateway::request_hash(request("ho")));
  EXPECT_THROW(record_replay(dir.path() / "none", SessionMode::Replay), std::invalid_argument);
}

TEST(RecordReplay, RecordWithoutNetworkIsTransport) {
  TempDir dir("offline");
  auto config = fast_config("http://127.0.0.1:1/v1");
  config.max_retries = 0;
  auto rec = record_replay(dir.path(), SessionMode::Record, std::make_shared<RemoteGateway>(config));
  EXPECT_EQ(error_kind(*rec, request("hi")), GatewayErrorKind::Transport);
}
